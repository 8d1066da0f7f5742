// SPDX-License-Identifier: Apache-2.0
//
// csimeta: knowledge-driven meta-learning toolkit for CSI feedback
// Copyright (C) 2026 The csimeta authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "csimeta/augment.hpp"

#include "csimeta/error.hpp"
#include "csimeta/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace csimeta
{

namespace
{

constexpr double pi = 3.14159265358979323846;

struct SchemeName
{
    AugmentScheme scheme;
    const char *name;
};

constexpr SchemeName scheme_names[] = {
    {AugmentScheme::none, "none"},
    {AugmentScheme::noise_injection, "noise-injection"},
    {AugmentScheme::flipping, "flipping"},
    {AugmentScheme::cyclic_shift, "cyclic-shift"},
    {AugmentScheme::random_shift, "random-shift"},
    {AugmentScheme::rotation, "rotation"},
    {AugmentScheme::proposed, "proposed"},
};

} // namespace

const char *to_string(AugmentScheme scheme) noexcept
{
    for (const auto &s : scheme_names)
        if (s.scheme == scheme)
            return s.name;
    return "unknown";
}

AugmentScheme parse_scheme(std::string_view name)
{
    for (const auto &s : scheme_names)
        if (name == s.name)
            return s.scheme;
    throw Error(ErrorKind::UnknownScheme, "unknown augmentation scheme '" + std::string(name) + "'");
}

void AugmentConfig::validate() const
{
    if (n_aug == 0)
        throw Error(ErrorKind::Validation, "augment.n_aug must be >= 1");
    if (!std::isfinite(noise_snr_db))
        throw Error(ErrorKind::Validation, "augment.noise_snr_db must be finite");
}

ChannelStats estimate_stats(const SystemConfig &cfg, std::span<const TimeChannel> seeds)
{
    if (seeds.empty())
        throw Error(ErrorKind::Validation, "estimate_stats: no seed channels");

    const auto nt = static_cast<Eigen::Index>(cfg.n_t);
    const auto nr = static_cast<Eigen::Index>(cfg.n_r);
    ChannelStats stats;
    stats.n_slot = seeds.size();
    stats.ue_id = seeds.front().ue_id;
    stats.n_r = cfg.n_r;
    stats.n_t = cfg.n_t;

    for (const auto &h : seeds)
    {
        if (h.ue_id != stats.ue_id)
            throw Error(ErrorKind::Validation, "estimate_stats: seeds mix UE " + std::to_string(stats.ue_id) +
                                                   " and UE " + std::to_string(h.ue_id));
        if (h.taps.size() != cfg.n_d)
            throw Error(ErrorKind::ShapeMismatch, "estimate_stats: seed has wrong tap count");
        for (const auto &tap : h.taps)
            if (tap.rows() != nr || tap.cols() != nt)
                throw Error(ErrorKind::ShapeMismatch, "estimate_stats: seed tap shape mismatch");
    }

    const double norm = static_cast<double>(cfg.n_t * cfg.n_r * seeds.size());
    for (std::size_t d = 0; d < cfg.n_d; ++d)
    {
        ComplexMatrix sum_tx = ComplexMatrix::Zero(nt, nt);
        ComplexMatrix sum_rx = ComplexMatrix::Zero(nr, nr);
        double power = 0.0;
        for (const auto &h : seeds)
        {
            const ComplexMatrix &tap = h.taps[d];
            sum_tx.noalias() += tap.adjoint() * tap;
            sum_rx.noalias() += tap * tap.adjoint();
            power += tap.squaredNorm();
        }
        stats.p_hat.push_back(power / norm);
        if (power > 0.0)
        {
            const double tr_tx = sum_tx.trace().real();
            const double tr_rx = sum_rx.trace().real();
            ComplexMatrix r_tx = sum_tx * (static_cast<double>(cfg.n_t) / tr_tx);
            ComplexMatrix r_rx = sum_rx * (static_cast<double>(cfg.n_r) / tr_rx);
            stats.r.push_back(kron(r_rx, r_tx));
            stats.r_tx.push_back(std::move(r_tx));
            stats.r_rx.push_back(std::move(r_rx));
        }
        else
        {
            stats.r_tx.push_back(ComplexMatrix::Zero(nt, nt));
            stats.r_rx.push_back(ComplexMatrix::Zero(nr, nr));
            stats.r.push_back(ComplexMatrix::Zero(nt * nr, nt * nr));
        }
    }
    return stats;
}

AugmentPlan prepare_augmentation(const ChannelStats &stats)
{
    AugmentPlan plan;
    plan.p_hat = stats.p_hat;
    plan.n_r = stats.n_r;
    plan.n_t = stats.n_t;
    plan.ue_id = stats.ue_id;
    const auto dim = static_cast<Eigen::Index>(stats.n_r * stats.n_t);
    for (std::size_t d = 0; d < stats.p_hat.size(); ++d)
    {
        if (stats.p_hat[d] <= 0.0)
        {
            plan.coloring.push_back(ComplexMatrix::Zero(dim, dim));
            continue;
        }
        const EigenDecomposition eig = hermitian_eig(stats.r[d]);
        ComplexMatrix c = eig.vectors;
        for (Eigen::Index k = 0; k < dim; ++k)
            c.col(k) *= std::sqrt(std::max(eig.values(k), 0.0));
        plan.coloring.push_back(std::sqrt(stats.p_hat[d]) * c);
    }
    return plan;
}

ComplexVector draw_delay_vector(const AugmentPlan &plan, std::size_t d, RngStream &rng)
{
    const auto dim = static_cast<Eigen::Index>(plan.n_r * plan.n_t);
    const ComplexMatrix n = complex_gaussian(rng, dim, 1);
    return plan.coloring.at(d) * n.col(0);
}

ComplexMatrix reshape_delay_vector(const ComplexVector &h, std::size_t n_r, std::size_t n_t)
{
    if (h.size() != static_cast<Eigen::Index>(n_r * n_t))
        throw Error(ErrorKind::ShapeMismatch, "reshape_delay_vector: length differs from n_r * n_t");
    ComplexMatrix m(static_cast<Eigen::Index>(n_r), static_cast<Eigen::Index>(n_t));
    for (std::size_t r = 0; r < n_r; ++r)
        for (std::size_t t = 0; t < n_t; ++t)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
                std::conj(h(static_cast<Eigen::Index>(r * n_t + t)));
    return m;
}

ComplexVector vectorize_delay_matrix(const ComplexMatrix &m)
{
    ComplexVector h(m.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index t = 0; t < m.cols(); ++t)
            h(r * m.cols() + t) = std::conj(m(r, t));
    return h;
}

TimeChannel augment_channel(const AugmentPlan &plan, RngStream &rng)
{
    TimeChannel h;
    h.ue_id = plan.ue_id;
    const auto nr = static_cast<Eigen::Index>(plan.n_r);
    const auto nt = static_cast<Eigen::Index>(plan.n_t);
    h.taps.reserve(plan.p_hat.size());
    for (std::size_t d = 0; d < plan.p_hat.size(); ++d)
    {
        if (plan.p_hat[d] <= 0.0)
        {
            h.taps.push_back(ComplexMatrix::Zero(nr, nt));
            continue;
        }
        h.taps.push_back(reshape_delay_vector(draw_delay_vector(plan, d, rng), plan.n_r, plan.n_t));
    }
    return h;
}

TimeChannel augment_channel(const ChannelStats &stats, RngStream &rng)
{
    return augment_channel(prepare_augmentation(stats), rng);
}

std::vector<CsiEigen> augment_dataset(const SystemConfig &cfg, const AugmentConfig &aug,
                                      const std::vector<std::vector<TimeChannel>> &per_ue_seeds,
                                      std::uint64_t seed, unsigned threads)
{
    aug.validate();
    std::vector<std::vector<CsiEigen>> per_ue(per_ue_seeds.size());
    parallel_for(per_ue_seeds.size(), threads, [&](std::size_t q) {
        try
        {
            const ChannelStats stats = estimate_stats(cfg, per_ue_seeds[q]);
            const AugmentPlan plan = prepare_augmentation(stats);
            auto &out = per_ue[q];
            out.reserve(aug.n_aug);
            for (std::size_t i = 0; i < aug.n_aug; ++i)
            {
                RngStream rng(seed, stream_key({purpose::augment, stats.ue_id, i}));
                TimeChannel h = augment_channel(plan, rng);
                h.slot = static_cast<std::uint32_t>(i);
                CsiEigen csi = channel_to_csi(cfg, h);
                csi.prov.origin = Origin::augmented;
                out.push_back(std::move(csi));
            }
        }
        catch (const Error &e)
        {
            throw Error(e.kind(), "augment_dataset: UE index " + std::to_string(q) + ": " + e.what());
        }
    });

    std::vector<CsiEigen> all;
    all.reserve(per_ue_seeds.size() * aug.n_aug);
    for (auto &ue : per_ue)
        for (auto &s : ue)
            all.push_back(std::move(s));
    return all;
}

std::vector<CsiEigen> augment_baseline(AugmentScheme scheme, std::span<const CsiEigen> samples,
                                       const RngStream &rng, const AugmentConfig &params, std::size_t n_out)
{
    if (samples.empty())
        throw Error(ErrorKind::Validation, "augment_baseline: no samples");
    if (scheme == AugmentScheme::proposed)
        throw Error(ErrorKind::UnknownScheme, "augment_baseline: 'proposed' needs channel seeds, not CSI samples");
    if (scheme == AugmentScheme::none)
        return {};

    if (scheme == AugmentScheme::flipping)
        n_out = samples.size();

    std::vector<CsiEigen> out;
    out.reserve(n_out);
    for (std::size_t k = 0; k < n_out; ++k)
    {
        const CsiEigen &src = samples[k % samples.size()];
        RngStream r = rng.child(k);
        CsiEigen s = src;
        const Eigen::Index nt = s.w.rows();
        const Eigen::Index nsb = s.w.cols();
        switch (scheme)
        {
        case AugmentScheme::noise_injection: {
            // Unit-norm columns: per-entry signal power 1/n_t.
            const double sigma =
                std::sqrt(1.0 / static_cast<double>(nt) / std::pow(10.0, params.noise_snr_db / 10.0));
            s.w += sigma * complex_gaussian(r, nt, nsb);
            break;
        }
        case AugmentScheme::flipping:
            s.w = src.w.rowwise().reverse();
            s.eigvals = src.eigvals.reverse();
            break;
        case AugmentScheme::cyclic_shift: {
            const Eigen::Index shift = nt > 1 ? 1 + static_cast<Eigen::Index>(r.uniform_index(nt - 1)) : 0;
            for (Eigen::Index i = 0; i < nt; ++i)
                s.w.row((i + shift) % nt) = src.w.row(i);
            break;
        }
        case AugmentScheme::random_shift: {
            const Eigen::Index shift = nsb > 1 ? 1 + static_cast<Eigen::Index>(r.uniform_index(nsb - 1)) : 0;
            for (Eigen::Index l = 0; l < nsb; ++l)
            {
                s.w.col((l + shift) % nsb) = src.w.col(l);
                if (src.eigvals.size() == nsb)
                    s.eigvals((l + shift) % nsb) = src.eigvals(l);
            }
            break;
        }
        case AugmentScheme::rotation:
            s.w *= std::polar(1.0, 2.0 * pi * r.uniform());
            break;
        default:
            break;
        }
        normalize_columns(s.w);
        s.prov.origin = Origin::baseline_augmented;
        out.push_back(std::move(s));
    }
    return out;
}

CovarianceCheck covariance_match(const ChannelStats &stats, std::size_t draws, RngStream &rng)
{
    if (draws == 0)
        throw Error(ErrorKind::Validation, "covariance_match: draws must be >= 1");
    const AugmentPlan plan = prepare_augmentation(stats);
    const auto dim = static_cast<Eigen::Index>(stats.n_r * stats.n_t);
    CovarianceCheck check;
    for (std::size_t d = 0; d < stats.p_hat.size(); ++d)
    {
        if (stats.p_hat[d] <= 0.0)
            continue;
        ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
        for (std::size_t k = 0; k < draws; ++k)
        {
            const ComplexVector h = draw_delay_vector(plan, d, rng);
            acc.noalias() += h * h.adjoint();
        }
        acc /= static_cast<double>(draws);
        const ComplexMatrix target = stats.p_hat[d] * stats.r[d];
        const double cov_err = (acc - target).norm() / target.norm();
        const double power = acc.trace().real() / static_cast<double>(dim);
        const double pow_err = std::abs(power - stats.p_hat[d]) / stats.p_hat[d];
        check.max_cov_error = std::max(check.max_cov_error, cov_err);
        check.max_power_error = std::max(check.max_power_error, pow_err);
        ++check.delays;
    }
    return check;
}

} // namespace csimeta
