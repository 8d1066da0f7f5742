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
#include <functional>
#include <string>
#include <vector>

namespace csimeta
{

// Sizing of the synthetic meta-task environment. Index sets are 0-based.
struct MetaEnvConfig
{
    std::size_t tasks = 200;  // T
    std::size_t groups = 8;   // P
    std::size_t max_ue = 4;   // upper bound of N_ue,j
    std::size_t max_slot = 8; // upper bound of N_slot,j
    std::size_t l_task = 4;   // spatial diversity degree
    std::size_t m_task = 3;   // frequency diversity degree
    double alpha = 0.75;      // slot-level spatial scale
    double beta = 0.75;       // slot-level frequency scale
    std::uint64_t seed = 1;

    void validate(const SystemConfig &sys) const; // throws Validation
};

struct BasisSet
{
    std::vector<ComplexMatrix> spatial;    // S_p = U^h_p (x) U^v_p, n_t x n_t
    std::vector<ComplexMatrix> horizontal; // U^h_p, n_h x n_h
    std::vector<ComplexMatrix> vertical;   // U^v_p, n_v x n_v
    ComplexMatrix freq;                    // F, n_sb x n_sb
};

struct UeStructure
{
    std::vector<std::size_t> spatial; // S~_m, subset of the task set
    std::vector<std::size_t> freq;    // F~_m
    std::size_t l_m = 0;
    std::size_t m_m = 0;
};

// Basis columns actually used by one slot sample.
struct SlotSelection
{
    std::size_t ue = 0;
    std::size_t slot = 0;
    std::vector<std::size_t> spatial; // S_{m,n}
    std::vector<std::size_t> freq;    // F_{m,n}
    ComplexMatrix coeffs;             // E-hat, kept only when requested
};

struct MetaTask
{
    std::size_t id = 0;
    std::size_t group = 0;            // p_j
    std::vector<std::size_t> spatial; // S-hat_j
    std::vector<std::size_t> freq;    // F-hat_j
    std::size_t n_ue = 0;
    std::size_t n_slot = 0;
    std::vector<UeStructure> ues;
    std::vector<SlotSelection> selections; // parallel to samples
    std::vector<CsiEigen> samples;         // grouped by UE, then slot
};

struct MetaEnv
{
    SystemConfig sys;
    MetaEnvConfig cfg;
    BasisSet basis;
    std::vector<MetaTask> tasks;
};

// Draws the P spatial groups and the frequency basis. Each factor is
// orthonormalized from a CN(0,1) draw; rank-deficient draws are redrawn
// up to 16 times before RetryExhausted.
BasisSet build_bases(const SystemConfig &sys, const MetaEnvConfig &cfg, RngStream &rng);

// Task-level and UE-level structure for task j (no samples yet).
MetaTask sample_task_structure(const SystemConfig &sys, const MetaEnvConfig &cfg, std::size_t j, RngStream &rng);

struct SynthSample
{
    CsiEigen sample;
    SlotSelection selection;
};

// W = S_p(:, S_mn) E F(:, F_mn)^H, then per-subband normalization.
SynthSample synth_sample(const SystemConfig &sys, const MetaEnvConfig &cfg, const BasisSet &basis,
                         const MetaTask &task, std::size_t m, std::size_t n, RngStream &rng,
                         bool retain_coeffs = false);

// Generates tasks independently from (seed, task index); usable for
// streaming environments that do not fit in memory.
class MetaEnvGenerator
{
public:
    MetaEnvGenerator(const SystemConfig &sys, const MetaEnvConfig &cfg, bool retain_coeffs = false);

    const BasisSet &basis() const noexcept { return basis_; }
    const SystemConfig &system() const noexcept { return sys_; }
    const MetaEnvConfig &config() const noexcept { return cfg_; }

    MetaTask task(std::size_t j) const;

private:
    SystemConfig sys_;
    MetaEnvConfig cfg_;
    BasisSet basis_;
    bool retain_;
};

MetaEnv build_meta_env(const SystemConfig &sys, const MetaEnvConfig &cfg, unsigned threads = 1,
                       bool retain_coeffs = false);

struct NestingAudit
{
    std::size_t samples = 0;
    std::size_t violations = 0;
    std::vector<std::string> messages; // first few violations
};

// Checks S_mn in S~_m in S-hat_j in [0, n_t) (and the frequency chain) and
// the slot cardinalities ceil(alpha L_m), ceil(beta M_m) for every sample.
NestingAudit audit_nesting(const MetaEnv &env);
void audit_task(const SystemConfig &sys, const MetaEnvConfig &cfg, const MetaTask &task, NestingAudit &audit);

std::size_t slot_spatial_count(const MetaEnvConfig &cfg, std::size_t l_m);
std::size_t slot_freq_count(const MetaEnvConfig &cfg, std::size_t m_m);

} // namespace csimeta
