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

#include "csimeta/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace csimeta
{

// Pipeline stages behind the CLI subcommands. Each stage reads and writes
// files and prints a short report; errors surface as csimeta::Error.
// Configs are taken as given (validation happens when they are loaded).

struct GenTargetPaths
{
    std::filesystem::path channels;             // seed TimeChannel records
    std::filesystem::path csi;                  // their CsiEigen records
    std::optional<std::filesystem::path> eval;  // fresh-UE CsiEigen evaluation set
};

void cmd_gen_meta(const ExperimentConfig &cfg, const std::filesystem::path &out, std::ostream &report);
void cmd_gen_target(const ExperimentConfig &cfg, const GenTargetPaths &paths, std::ostream &report);
void cmd_augment(const ExperimentConfig &cfg, const std::filesystem::path &seeds, const std::filesystem::path &out,
                 std::ostream &report);
void cmd_meta_train(const ExperimentConfig &cfg, const std::filesystem::path &env,
                    const std::filesystem::path &checkpoint, const std::optional<std::filesystem::path> &log,
                    std::ostream &report);

// init is a checkpoint path or "random" (fresh parameters from the config seed).
// Returns the final best eval SGCS.
double cmd_retrain_eval(const ExperimentConfig &cfg, const std::string &init, const std::filesystem::path &train,
                        const std::optional<std::filesystem::path> &eval,
                        const std::optional<std::filesystem::path> &checkpoint,
                        const std::optional<std::filesystem::path> &log, std::ostream &report);

// Parameters that "random" initialization and meta-training start from.
ModelParams fresh_params(const ExperimentConfig &cfg);

// Full command line. Exit code 0 on success, 1 on validation errors, 2 on I/O errors.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace csimeta
