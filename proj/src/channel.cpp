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

#include "csimeta/channel.hpp"

#include "csimeta/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace csimeta
{

namespace
{

constexpr double pi = 3.14159265358979323846;
constexpr double deg = pi / 180.0;

[[noreturn]] void invalid(const std::string &msg)
{
    throw Error(ErrorKind::Validation, msg);
}

ComplexVector ula(std::size_t n, double phase_step)
{
    ComplexVector a(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
        a(static_cast<Eigen::Index>(k)) = std::polar(1.0, pi * static_cast<double>(k) * phase_step);
    return a;
}

} // namespace

void SystemConfig::validate() const
{
    if (n_h == 0 || n_v == 0 || n_t == 0 || n_r == 0 || n_d == 0 || n_sc == 0 || n_gran == 0 || n_sb == 0)
        invalid("system: all dimensions must be >= 1");
    if (n_t != n_h * n_v)
        invalid("system.n_t (" + std::to_string(n_t) + ") must equal n_h * n_v (" + std::to_string(n_h * n_v) + ")");
    if (n_sc != n_gran * n_sb)
        invalid("system.n_sc (" + std::to_string(n_sc) + ") must equal n_gran * n_sb (" +
                std::to_string(n_gran * n_sb) + ")");
    if (n_d > n_sc)
        invalid("system.n_d (" + std::to_string(n_d) + ") must not exceed n_sc (" + std::to_string(n_sc) + ")");
}

SystemConfig SystemConfig::desk()
{
    return SystemConfig{};
}

SystemConfig SystemConfig::full_scale()
{
    SystemConfig c;
    c.n_h = 8;
    c.n_v = 2;
    c.n_t = 16;
    c.n_r = 4;
    c.n_d = 32;
    c.n_sc = 624;
    c.n_gran = 48;
    c.n_sb = 13;
    return c;
}

const char *to_string(Origin origin) noexcept
{
    switch (origin)
    {
    case Origin::simulated:
        return "simulated";
    case Origin::meta_synth:
        return "meta-synth";
    case Origin::augmented:
        return "augmented";
    case Origin::baseline_augmented:
        return "baseline-augmented";
    }
    return "unknown";
}

void SimScenario::validate(const SystemConfig &cfg) const
{
    if (clusters.empty())
        invalid("scenario.clusters must not be empty");
    double total = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c)
    {
        if (clusters[c].tap >= cfg.n_d)
            invalid("scenario.clusters[" + std::to_string(c) + "].tap (" + std::to_string(clusters[c].tap) +
                    ") must be < system.n_d (" + std::to_string(cfg.n_d) + ")");
        if (!(clusters[c].power >= 0.0))
            invalid("scenario.clusters[" + std::to_string(c) + "].power must be >= 0");
        total += clusters[c].power;
    }
    if (std::abs(total - 1.0) > 1e-9)
        invalid("scenario.clusters powers must sum to 1 (got " + std::to_string(total) + ")");
    if (rays_per_cluster == 0)
        invalid("scenario.rays_per_cluster must be >= 1");
    if (asd_deg < 0 || zsd_deg < 0 || asa_deg < 0 || ue_azimuth_offset_deg < 0 || ue_zenith_offset_deg < 0)
        invalid("scenario: angle spreads must be >= 0");
    if (doppler_max < 0 || slot_spacing <= 0)
        invalid("scenario: doppler_max must be >= 0 and slot_spacing > 0");
}

std::vector<double> SimScenario::tap_power_profile(std::size_t n_d) const
{
    std::vector<double> p(n_d, 0.0);
    for (const auto &c : clusters)
        if (c.tap < n_d)
            p[c.tap] += c.power;
    return p;
}

SimScenario SimScenario::exponential(std::vector<Cluster> clusters, double delay_spread)
{
    if (!(delay_spread > 0.0))
        invalid("scenario.delay_spread must be > 0");
    double total = 0.0;
    for (auto &c : clusters)
    {
        c.power = std::exp(-static_cast<double>(c.tap) / delay_spread);
        total += c.power;
    }
    for (auto &c : clusters)
        c.power /= total;
    SimScenario s;
    s.clusters = std::move(clusters);
    return s;
}

SimScenario SimScenario::desk_default()
{
    std::vector<Cluster> clusters = {
        {0, 0.0, 0.0, 95.0, 180.0},  {1, 0.0, 25.0, 90.0, 140.0}, {2, 0.0, -30.0, 100.0, 220.0},
        {4, 0.0, 45.0, 85.0, 110.0}, {6, 0.0, -55.0, 92.0, 250.0},
    };
    return exponential(std::move(clusters), 2.0);
}

std::vector<TimeChannel> simulate_ue(const SystemConfig &cfg, const SimScenario &scen, const RngStream &rng,
                                     std::size_t n_slots, std::uint32_t ue_id, std::size_t first_slot)
{
    if (n_slots == 0)
        invalid("simulate_ue: n_slots must be >= 1");

    struct Ray
    {
        std::size_t tap;
        double amplitude;
        double phase;
        double doppler;
        ComplexMatrix outer; // a_rx a_tx^H
    };

    RngStream geo = rng;
    const double ue_az = (2.0 * geo.uniform() - 1.0) * scen.ue_azimuth_offset_deg;
    const double ue_zen = (2.0 * geo.uniform() - 1.0) * scen.ue_zenith_offset_deg;

    std::vector<Ray> rays;
    rays.reserve(scen.clusters.size() * scen.rays_per_cluster);
    const double per_ray = 1.0 / static_cast<double>(scen.rays_per_cluster);
    for (const auto &c : scen.clusters)
    {
        for (std::size_t r = 0; r < scen.rays_per_cluster; ++r)
        {
            const double aod = (c.aod_deg + ue_az + scen.asd_deg * geo.normal()) * deg;
            const double zod = (c.zod_deg + ue_zen + scen.zsd_deg * geo.normal()) * deg;
            const double aoa = (c.aoa_deg + scen.asa_deg * geo.normal()) * deg;
            const double phase = 2.0 * pi * geo.uniform();
            const double doppler = scen.doppler_max * std::cos(2.0 * pi * geo.uniform());

            const ComplexVector a_h = ula(cfg.n_h, std::sin(zod) * std::sin(aod));
            const ComplexVector a_v = ula(cfg.n_v, std::cos(zod));
            ComplexVector a_tx(static_cast<Eigen::Index>(cfg.n_t));
            for (std::size_t h = 0; h < cfg.n_h; ++h)
                for (std::size_t v = 0; v < cfg.n_v; ++v)
                    a_tx(static_cast<Eigen::Index>(h * cfg.n_v + v)) =
                        a_h(static_cast<Eigen::Index>(h)) * a_v(static_cast<Eigen::Index>(v));
            const ComplexVector a_rx = ula(cfg.n_r, std::sin(aoa));

            rays.push_back(Ray{c.tap, std::sqrt(c.power * per_ray), phase, doppler, a_rx * a_tx.adjoint()});
        }
    }

    std::vector<TimeChannel> slots;
    slots.reserve(n_slots);
    for (std::size_t s = 0; s < n_slots; ++s)
    {
        const double t = static_cast<double>(first_slot + s) * scen.slot_spacing;
        TimeChannel h;
        h.slot = static_cast<std::uint32_t>(first_slot + s);
        h.ue_id = ue_id;
        h.taps.assign(cfg.n_d, ComplexMatrix::Zero(static_cast<Eigen::Index>(cfg.n_r),
                                                  static_cast<Eigen::Index>(cfg.n_t)));
        for (const auto &ray : rays)
        {
            const cplx coeff = std::polar(ray.amplitude, ray.phase + 2.0 * pi * ray.doppler * t);
            h.taps[ray.tap] += coeff * ray.outer;
        }
        slots.push_back(std::move(h));
    }
    return slots;
}

std::vector<ComplexMatrix> subband_grams(const SystemConfig &cfg, const TimeChannel &h)
{
    if (h.taps.size() != cfg.n_d)
        throw Error(ErrorKind::ShapeMismatch, "channel has " + std::to_string(h.taps.size()) + " taps, expected " +
                                                  std::to_string(cfg.n_d));
    for (const auto &tap : h.taps)
        if (tap.rows() != static_cast<Eigen::Index>(cfg.n_r) || tap.cols() != static_cast<Eigen::Index>(cfg.n_t))
            throw Error(ErrorKind::ShapeMismatch, "channel tap shape does not match n_r x n_t");

    const std::vector<ComplexMatrix> freq = dft_delay_to_freq(h.taps, cfg.n_sc);
    std::vector<ComplexMatrix> grams;
    grams.reserve(cfg.n_sb);
    const auto nt = static_cast<Eigen::Index>(cfg.n_t);
    for (std::size_t l = 0; l < cfg.n_sb; ++l)
    {
        ComplexMatrix g = ComplexMatrix::Zero(nt, nt);
        for (std::size_t k = l * cfg.n_gran; k < (l + 1) * cfg.n_gran; ++k)
            g.noalias() += freq[k].adjoint() * freq[k];
        g /= static_cast<double>(cfg.n_gran);
        grams.push_back(std::move(g));
    }
    return grams;
}

CsiEigen channel_to_csi(const SystemConfig &cfg, const TimeChannel &h)
{
    const std::vector<ComplexMatrix> grams = subband_grams(cfg, h);
    CsiEigen out;
    out.w.resize(static_cast<Eigen::Index>(cfg.n_t), static_cast<Eigen::Index>(cfg.n_sb));
    out.eigvals.resize(static_cast<Eigen::Index>(cfg.n_sb));
    for (std::size_t l = 0; l < cfg.n_sb; ++l)
    {
        const EigenPair top = top_eigvec(grams[l]);
        out.w.col(static_cast<Eigen::Index>(l)) = top.vector;
        out.eigvals(static_cast<Eigen::Index>(l)) = top.value;
    }
    out.prov.ue_id = h.ue_id;
    out.prov.slot = h.slot;
    out.prov.origin = Origin::simulated;
    return out;
}

void normalize_columns(ComplexMatrix &w, double min_norm)
{
    for (Eigen::Index l = 0; l < w.cols(); ++l)
    {
        const double n = w.col(l).norm();
        if (n <= min_norm || n == 0.0)
            throw Error(ErrorKind::DegenerateColumn, "column " + std::to_string(l) + " has norm " + std::to_string(n));
        w.col(l) /= n;
    }
}

} // namespace csimeta
