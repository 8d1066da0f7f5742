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

#include "csimeta/augment.hpp"
#include "csimeta/channel.hpp"
#include "csimeta/metaenv.hpp"
#include "csimeta/model.hpp"
#include "csimeta/train.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace csimeta
{

// Size of the simulated target scenario (seed set and evaluation set).
struct TargetConfig
{
    std::size_t n_ue = 20;   // seeded UEs
    std::size_t n_slot = 5;  // seeded slots per UE
    std::size_t n_eval_ue = 20;
    std::size_t n_eval_slot = 5;
};

// Everything one experiment needs. The top-level seed is the single source
// of randomness; each stage derives its own streams from it.
struct ExperimentConfig
{
    std::uint64_t seed = 1;
    SystemConfig system;
    SimScenario scenario = SimScenario::desk_default();
    MetaEnvConfig meta_env;
    TargetConfig target;
    AugmentConfig augment;
    ModelConfig model;
    TrainConfig train;

    // Per-section checks plus cross-field consistency. Throws Validation
    // naming the offending field.
    void validate() const;

    // Pushes the top-level seed into the sections that carry one.
    void apply_seed(std::uint64_t s);
};

// JSON text. Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path &path); // Io if unreadable
std::string to_json(const ExperimentConfig &cfg, int indent = -1);

} // namespace csimeta
