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

#include "csimeta/metaenv.hpp"
#include "csimeta/model.hpp"
#include "csimeta/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csimeta
{

enum class OptimizerKind
{
    sgd,
    adam,
};

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string &name); // throws Validation

struct TrainConfig
{
    OptimizerKind optimizer = OptimizerKind::adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 16;
    std::size_t inner_steps = 32;     // g
    double meta_step = 0.25;          // epsilon
    std::size_t meta_iterations = 1;  // passes over the task set
    std::size_t retrain_steps = 300;  // g'
    std::size_t eval_interval = 10;
    double eval_fraction = 0.1;       // used when no eval set is given
    bool record_wall_time = false;    // wall_ms column is 0 otherwise
    unsigned threads = 1;             // evaluation workers
    std::uint64_t seed = 1;

    void validate() const; // throws Validation
};

// Optimizer with its own state. Adam state is created lazily on the first step.
class Optimizer
{
public:
    explicit Optimizer(const TrainConfig &cfg) : cfg_(cfg) {}
    void step(ModelParams &params, const ModelParams &grad);
    std::size_t steps() const noexcept { return t_; }

private:
    TrainConfig cfg_;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    std::size_t t_ = 0;
};

// Seeded epoch-wise reshuffling over n indices. The final batch of an epoch
// may be shorter than batch_size.
class MiniBatcher
{
public:
    MiniBatcher(std::size_t n, std::size_t batch_size, RngStream rng);
    std::vector<std::size_t> next();

private:
    void reshuffle();

    std::size_t batch_;
    RngStream rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

struct LogRow
{
    std::size_t step = 0;
    double loss = 0.0;
    double eval_sgcs = 0.0;
    double best_sgcs = 0.0;
    double wall_ms = 0.0;
};

class ConvergenceLog
{
public:
    // Steps must be strictly increasing; best_sgcs is maintained here.
    void add(std::size_t step, double loss, double eval_sgcs, double wall_ms);

    const std::vector<LogRow> &rows() const noexcept { return rows_; }
    bool empty() const noexcept { return rows_.empty(); }
    double best() const; // throws Validation when empty
    double final_eval() const;

    void write_csv(std::ostream &os) const;
    void write_csv(const std::filesystem::path &path) const;
    std::string csv() const;

private:
    std::vector<LogRow> rows_;
};

// First logged step whose best-so-far reaches the threshold.
std::optional<std::size_t> steps_to_threshold(const ConvergenceLog &log, double threshold);

// Mean SGCS with the quantizer active. Per-sample values are sorted before
// summation, so the result does not depend on the dataset order.
double evaluate(const ModelParams &params, const ModelConfig &cfg, std::span<const CsiEigen> dataset,
                unsigned threads = 1);

// g optimizer steps on mini-batches from one task with fresh optimizer state.
ModelParams inner_update(const ModelParams &params, const ModelConfig &mcfg, std::span<const CsiEigen> task,
                         const TrainConfig &cfg, RngStream rng);

// theta + eps (updated - theta), exact at eps = 0 and eps = 1.
ModelParams reptile_step(const ModelParams &theta, const ModelParams &updated, double eps);

struct TrainResult
{
    ModelParams params;
    ConvergenceLog log;
};

// Sequential first-order meta-training over seeded-shuffled tasks. One log row
// every eval_interval tasks: loss is the mean pre-adaptation loss of those
// tasks, eval_sgcs is the holdout SGCS (or minus that loss without holdout).
TrainResult meta_train(const ModelParams &init, const ModelConfig &mcfg,
                       std::span<const std::vector<CsiEigen>> tasks, const TrainConfig &cfg,
                       std::span<const CsiEigen> holdout = {});
TrainResult meta_train(const ModelParams &init, const ModelConfig &mcfg, const MetaEnv &env,
                       const TrainConfig &cfg, std::span<const CsiEigen> holdout = {});

// g' steps on the target set. Without an explicit eval set, a seeded
// shuffle splits off eval_fraction of the data. Logged at step 0 and every
// eval_interval steps (and at g').
TrainResult target_retrain(const ModelParams &init, const ModelConfig &mcfg, std::span<const CsiEigen> train,
                           const TrainConfig &cfg, std::span<const CsiEigen> eval = {});

} // namespace csimeta
