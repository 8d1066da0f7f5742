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

#pragma once

#include "csimeta/linalg.hpp"
#include "csimeta/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace csimeta
{

// Array and OFDM dimensions. Port index of the tx array is h * n_v + v.
struct SystemConfig
{
    std::size_t n_h = 4;
    std::size_t n_v = 2;
    std::size_t n_t = 8;
    std::size_t n_r = 2;
    std::size_t n_d = 8;
    std::size_t n_sc = 16;
    std::size_t n_gran = 4;
    std::size_t n_sb = 4;

    void validate() const; // throws Validation
    static SystemConfig desk();
    static SystemConfig full_scale();
};

// One slot's time-domain channel: n_d taps of shape n_r x n_t.
struct TimeChannel
{
    std::vector<ComplexMatrix> taps;
    std::uint32_t slot = 0;
    std::uint32_t ue_id = 0;
};

enum class Origin : std::uint8_t
{
    simulated = 0,
    meta_synth = 1,
    augmented = 2,
    baseline_augmented = 3,
};

const char *to_string(Origin origin) noexcept;

inline constexpr std::uint32_t no_task = std::numeric_limits<std::uint32_t>::max();

struct Provenance
{
    std::uint32_t ue_id = 0;
    std::uint32_t slot = 0;
    Origin origin = Origin::simulated;
    std::uint32_t task_id = no_task;
};

// Per-subband dominant eigenvectors W (n_t x n_sb, unit-norm columns) with
// their eigenvalues. Meta-synthesized samples carry all-zero eigenvalues.
struct CsiEigen
{
    ComplexMatrix w;
    RealVector eigvals;
    Provenance prov;
};

struct Cluster
{
    std::size_t tap = 0;  // delay tap, 0-based
    double power = 0.0;   // fraction of total power
    double aod_deg = 0.0; // departure azimuth
    double zod_deg = 90.0;
    double aoa_deg = 0.0; // arrival azimuth
};

// Clustered tapped-delay-line scenario. Each UE draws its ray geometry once
// (cluster means plus a UE-specific angular offset and per-ray spreads);
// slots of a UE differ only by per-ray Doppler rotation.
struct SimScenario
{
    std::vector<Cluster> clusters;
    std::size_t rays_per_cluster = 10;
    double asd_deg = 5.0;  // per-ray departure azimuth spread
    double zsd_deg = 3.0;  // per-ray departure zenith spread
    double asa_deg = 15.0; // per-ray arrival azimuth spread
    double ue_azimuth_offset_deg = 60.0; // UE offset ~ U[-x, x]
    double ue_zenith_offset_deg = 10.0;
    double doppler_max = 0.05; // cycles per slot
    double slot_spacing = 1.0;

    void validate(const SystemConfig &cfg) const; // throws Validation

    // Expected per-tap power, normalized to sum 1.
    std::vector<double> tap_power_profile(std::size_t n_d) const;

    // Powers p_c proportional to exp(-tap_c / delay_spread), normalized.
    static SimScenario exponential(std::vector<Cluster> clusters, double delay_spread);
    static SimScenario desk_default();
};

// Simulates n_slots consecutive slots of one UE, starting at slot index first_slot.
std::vector<TimeChannel> simulate_ue(const SystemConfig &cfg, const SimScenario &scen, const RngStream &rng,
                                     std::size_t n_slots, std::uint32_t ue_id, std::size_t first_slot = 0);

// (1/n_gran) sum_{k in subband l} H~_k^H H~_k for every subband.
std::vector<ComplexMatrix> subband_grams(const SystemConfig &cfg, const TimeChannel &h);

CsiEigen channel_to_csi(const SystemConfig &cfg, const TimeChannel &h);

// Scales every column to unit l2 norm. Throws DegenerateColumn below min_norm.
void normalize_columns(ComplexMatrix &w, double min_norm = 0.0);

} // namespace csimeta
