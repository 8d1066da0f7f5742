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

#include "csimeta/channel.hpp"
#include "csimeta/linalg.hpp"
#include "csimeta/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csimeta
{

enum class AugmentScheme
{
    none,
    noise_injection,
    flipping,
    cyclic_shift,
    random_shift,
    rotation,
    proposed,
};

const char *to_string(AugmentScheme scheme) noexcept;
AugmentScheme parse_scheme(std::string_view name); // throws UnknownScheme

struct AugmentConfig
{
    AugmentScheme scheme = AugmentScheme::proposed;
    std::size_t n_aug = 50;     // augmented samples per UE
    double noise_snr_db = 10.0; // noise-injection baseline
    bool include_seeds = true;  // prepend the seed CSI to augmented datasets

    void validate() const; // throws Validation
};

// Second-order statistics of one UE's seed channels, per delay tap.
// Delays without power keep zero correlation matrices and p_hat = 0.
struct ChannelStats
{
    std::vector<double> p_hat;
    std::vector<ComplexMatrix> r_tx; // n_t x n_t, trace n_t
    std::vector<ComplexMatrix> r_rx; // n_r x n_r, trace n_r
    std::vector<ComplexMatrix> r;    // r_rx (x) r_tx
    std::size_t n_slot = 0;
    std::uint32_t ue_id = 0;
    std::size_t n_r = 0;
    std::size_t n_t = 0;
};

ChannelStats estimate_stats(const SystemConfig &cfg, std::span<const TimeChannel> seeds);

// Per-delay coloring matrices sqrt(p_d) U_d D_d^{1/2}, factored once per UE.
struct AugmentPlan
{
    std::vector<double> p_hat;
    std::vector<ComplexMatrix> coloring;
    std::size_t n_r = 0;
    std::size_t n_t = 0;
    std::uint32_t ue_id = 0;
};

AugmentPlan prepare_augmentation(const ChannelStats &stats);

// One colored draw h_d = sqrt(p_d) U_d D_d^{1/2} n with n ~ CN(0, I).
ComplexVector draw_delay_vector(const AugmentPlan &plan, std::size_t d, RngStream &rng);

// Maps a delay vector to its n_r x n_t channel matrix. Element r * n_t + t
// (rx-major, matching r_rx (x) r_tx) is the complex conjugate of entry (r, t),
// so that H^H H of the result carries r_tx and H H^H carries conj(r_rx).
ComplexMatrix reshape_delay_vector(const ComplexVector &h, std::size_t n_r, std::size_t n_t);
ComplexVector vectorize_delay_matrix(const ComplexMatrix &m);

TimeChannel augment_channel(const AugmentPlan &plan, RngStream &rng);
TimeChannel augment_channel(const ChannelStats &stats, RngStream &rng);

// Statistics-matched augmentation: n_aug CSI samples per UE, UE-major order.
// Draw i of UE u uses the stream (seed, augment, u, i).
std::vector<CsiEigen> augment_dataset(const SystemConfig &cfg, const AugmentConfig &aug,
                                      const std::vector<std::vector<TimeChannel>> &per_ue_seeds,
                                      std::uint64_t seed, unsigned threads = 1);

// Baseline augmenters operating directly on CSI samples. Output k is derived
// from samples[k % samples.size()]; flipping yields exactly one output per
// sample regardless of n_out.
std::vector<CsiEigen> augment_baseline(AugmentScheme scheme, std::span<const CsiEigen> samples,
                                       const RngStream &rng, const AugmentConfig &params, std::size_t n_out);

// Monte Carlo check of the colored draws against p_hat_d R_d, over delays
// with nonzero power. Errors are relative (Frobenius for the covariance).
struct CovarianceCheck
{
    double max_cov_error = 0.0;
    double max_power_error = 0.0;
    std::size_t delays = 0;
};

CovarianceCheck covariance_match(const ChannelStats &stats, std::size_t draws, RngStream &rng);

} // namespace csimeta
