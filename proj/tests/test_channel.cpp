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

#include "doctest.h"
#include "oracles.hpp"

#include "csimeta/channel.hpp"
#include "csimeta/error.hpp"

using namespace csimeta;

namespace
{

SimScenario single_ray()
{
    SimScenario s;
    s.clusters = {Cluster{2, 1.0, 20.0, 95.0, 150.0}};
    s.rays_per_cluster = 1;
    s.doppler_max = 0.0;
    return s;
}

ComplexVector phase_fixed(ComplexVector v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-12)
        {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
        }
    return v;
}

template <typename Fn>
ErrorKind kind_of(Fn &&fn)
{
    try
    {
        fn();
    }
    catch (const Error &e)
    {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Io;
}

} // namespace

TEST_CASE("static single path gives identical rank-1 slots")
{
    const SystemConfig cfg;
    const auto slots = simulate_ue(cfg, single_ray(), RngStream(3, 1), 3, 7);
    REQUIRE(slots.size() == 3);
    for (std::size_t s = 0; s < 3; ++s)
    {
        CHECK(slots[s].ue_id == 7);
        CHECK(slots[s].slot == s);
        for (std::size_t d = 0; d < cfg.n_d; ++d)
            CHECK((slots[s].taps[d] - slots[0].taps[d]).norm() == 0.0);
    }
    const ComplexMatrix &tap = slots[0].taps[2];
    CHECK(tap.norm() > 0.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < tap.rows(); ++i)
        for (Eigen::Index j = i + 1; j < tap.rows(); ++j)
            for (Eigen::Index k = 0; k < tap.cols(); ++k)
                for (Eigen::Index l = k + 1; l < tap.cols(); ++l)
                    worst = std::max(worst, std::abs(tap(i, k) * tap(j, l) - tap(i, l) * tap(j, k)));
    CHECK(worst < 1e-10);
    CHECK(slots[0].taps[0].norm() == 0.0);
}

TEST_CASE("per-tap power follows the cluster profile")
{
    const SystemConfig cfg;
    const SimScenario scen = SimScenario::desk_default();
    const auto profile = scen.tap_power_profile(cfg.n_d);
    std::vector<double> acc(cfg.n_d, 0.0);
    const std::uint32_t n_ue = 10000;
    for (std::uint32_t u = 0; u < n_ue; ++u)
    {
        const auto h = simulate_ue(cfg, scen, RngStream(17, stream_key({u})), 1, u);
        for (std::size_t d = 0; d < cfg.n_d; ++d)
            acc[d] += h[0].taps[d].squaredNorm() / static_cast<double>(cfg.n_r * cfg.n_t);
    }
    for (std::size_t d = 0; d < cfg.n_d; ++d)
    {
        const double p = acc[d] / n_ue;
        if (profile[d] == 0.0)
            CHECK(p == 0.0);
        else
            CHECK(std::abs(p - profile[d]) / profile[d] < 0.03);
    }
}

TEST_CASE("simulate_ue is deterministic and slots of a UE differ by Doppler only")
{
    const SystemConfig cfg;
    const SimScenario scen = SimScenario::desk_default();
    const auto a = simulate_ue(cfg, scen, RngStream(5, 9), 4, 1);
    const auto b = simulate_ue(cfg, scen, RngStream(5, 9), 4, 1);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t d = 0; d < cfg.n_d; ++d)
            CHECK((a[s].taps[d] - b[s].taps[d]).norm() == 0.0);
    // Starting later reproduces the tail of a longer run.
    const auto tail = simulate_ue(cfg, scen, RngStream(5, 9), 2, 1, 2);
    CHECK(tail[0].slot == 2);
    for (std::size_t d = 0; d < cfg.n_d; ++d)
        CHECK((tail[0].taps[d] - a[2].taps[d]).norm() < 1e-12);
}

TEST_CASE("rank-1 flat channel maps to its right singular vector")
{
    SystemConfig cfg;
    std::mt19937_64 gen(8);
    const ComplexMatrix u = oracle::random_complex(gen, static_cast<int>(cfg.n_r), 1);
    ComplexMatrix v = oracle::random_complex(gen, static_cast<int>(cfg.n_t), 1);
    v /= v.norm();
    TimeChannel h;
    h.taps.assign(cfg.n_d, ComplexMatrix::Zero(static_cast<Eigen::Index>(cfg.n_r), static_cast<Eigen::Index>(cfg.n_t)));
    h.taps[0] = u * v.adjoint();
    const CsiEigen w = channel_to_csi(cfg, h);
    for (Eigen::Index l = 0; l < w.w.cols(); ++l)
    {
        CHECK(oracle::cos2(w.w.col(l), v.col(0)) > 1 - 1e-12);
        CHECK(w.eigvals(l) == doctest::Approx(u.squaredNorm()).epsilon(1e-10));
        CHECK((w.w.col(l) - phase_fixed(v.col(0))).norm() < 1e-10);
    }
    CHECK(w.prov.origin == Origin::simulated);
}

TEST_CASE("channel_to_csi is invariant to positive scaling")
{
    const SystemConfig cfg;
    const auto h = simulate_ue(cfg, SimScenario::desk_default(), RngStream(2, 2), 1, 0)[0];
    const CsiEigen base = channel_to_csi(cfg, h);
    for (double c : {0.5, 2.0, 10.0})
    {
        TimeChannel hc = h;
        for (auto &t : hc.taps)
            t *= c;
        const CsiEigen w = channel_to_csi(cfg, hc);
        CHECK((w.w - base.w).norm() < 1e-12);
        for (Eigen::Index l = 0; l < w.eigvals.size(); ++l)
            CHECK(w.eigvals(l) == doctest::Approx(c * c * base.eigvals(l)).epsilon(1e-10));
    }
}

TEST_CASE("CSI matches the reference dominant eigenvectors")
{
    const SystemConfig cfg;
    std::mt19937_64 gen(10);
    for (int trial = 0; trial < 20; ++trial)
    {
        TimeChannel h;
        for (std::size_t d = 0; d < cfg.n_d; ++d)
            h.taps.push_back(oracle::random_complex(gen, static_cast<int>(cfg.n_r), static_cast<int>(cfg.n_t)));
        const CsiEigen w = channel_to_csi(cfg, h);
        const auto grams = subband_grams(cfg, h);
        for (std::size_t l = 0; l < cfg.n_sb; ++l)
        {
            const oracle::Eig ref = oracle::eigen_solver(grams[l]);
            CHECK((w.w.col(static_cast<Eigen::Index>(l)) - phase_fixed(ref.vectors.col(0))).norm() < 1e-8);
            CHECK(w.eigvals(static_cast<Eigen::Index>(l)) == doctest::Approx(ref.values(0)).epsilon(1e-10));
            // Subband Gram matrices are Hermitian PSD.
            CHECK(ref.values.minCoeff() >= -1e-10 * ref.values(0));
            CHECK((grams[l] - grams[l].adjoint()).norm() < 1e-12 * grams[l].norm());
        }
    }
}

TEST_CASE("simulated CSI columns are unit norm")
{
    const SystemConfig cfg;
    const SimScenario scen = SimScenario::desk_default();
    double worst = 0.0;
    for (std::uint32_t u = 0; u < 50; ++u)
        for (const auto &h : simulate_ue(cfg, scen, RngStream(4, u), 5, u))
        {
            const CsiEigen w = channel_to_csi(cfg, h);
            for (Eigen::Index l = 0; l < w.w.cols(); ++l)
                worst = std::max(worst, std::abs(w.w.col(l).norm() - 1.0));
            CHECK(w.eigvals.minCoeff() >= 0.0);
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("config validation names the offending field")
{
    SystemConfig c;
    c.n_t = 6;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Validation);
    c = SystemConfig{};
    c.n_sc = 15;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Validation);
    c = SystemConfig{};
    c.n_d = 17;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Validation);
    CHECK_NOTHROW(SystemConfig::full_scale().validate());

    SimScenario s = SimScenario::desk_default();
    s.clusters[0].tap = 8;
    try
    {
        s.validate(SystemConfig{});
        FAIL("expected Validation");
    }
    catch (const Error &e)
    {
        CHECK(std::string(e.what()).find("clusters[0].tap") != std::string::npos);
    }
    s = SimScenario::desk_default();
    s.clusters[1].power += 0.1;
    CHECK(kind_of([&] { s.validate(SystemConfig{}); }) == ErrorKind::Validation);
}

TEST_CASE("shape and degeneracy errors")
{
    const SystemConfig cfg;
    TimeChannel h;
    h.taps.assign(cfg.n_d - 1, ComplexMatrix::Zero(2, 8));
    CHECK(kind_of([&] { (void)channel_to_csi(cfg, h); }) == ErrorKind::ShapeMismatch);

    ComplexMatrix w = ComplexMatrix::Ones(3, 2);
    w.col(1).setZero();
    CHECK(kind_of([&] { normalize_columns(w); }) == ErrorKind::DegenerateColumn);
}
