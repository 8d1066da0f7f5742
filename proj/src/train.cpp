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

#include "csimeta/train.hpp"

#include "csimeta/error.hpp"
#include "csimeta/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace csimeta
{

namespace
{

using clock_type = std::chrono::steady_clock;

double elapsed_ms(clock_type::time_point start, bool record)
{
    if (!record)
        return 0.0;
    return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

std::vector<const CsiEigen *> gather(std::span<const CsiEigen> data, const std::vector<std::size_t> &idx)
{
    std::vector<const CsiEigen *> out;
    out.reserve(idx.size());
    for (std::size_t i : idx)
        out.push_back(&data[i]);
    return out;
}

double full_loss(const ModelParams &p, const ModelConfig &mcfg, std::span<const CsiEigen> data, unsigned threads)
{
    return -evaluate(p, mcfg, data, threads);
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

std::string to_string(OptimizerKind k)
{
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(const std::string &name)
{
    if (name == "sgd")
        return OptimizerKind::sgd;
    if (name == "adam")
        return OptimizerKind::adam;
    throw Error(ErrorKind::Validation, "train.optimizer: unknown optimizer '" + name + "' (expected sgd or adam)");
}

void TrainConfig::validate() const
{
    auto invalid = [](const std::string &m) { throw Error(ErrorKind::Validation, m); };
    if (!(lr >= 0.0) || !std::isfinite(lr))
        invalid("train.lr must be finite and >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        invalid("train.beta1 and train.beta2 must be in [0, 1)");
    if (!(adam_eps > 0.0))
        invalid("train.adam_eps must be > 0");
    if (batch_size == 0)
        invalid("train.batch_size must be >= 1");
    if (inner_steps == 0)
        invalid("train.inner_steps (g) must be >= 1");
    if (!(meta_step > 0.0 && meta_step <= 1.0))
        invalid("train.meta_step (epsilon) must be in (0, 1]");
    if (meta_iterations == 0)
        invalid("train.meta_iterations must be >= 1");
    if (retrain_steps == 0)
        invalid("train.retrain_steps (g') must be >= 1");
    if (eval_interval == 0)
        invalid("train.eval_interval must be >= 1");
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
        invalid("train.eval_fraction must be in (0, 1)");
}

void Optimizer::step(ModelParams &params, const ModelParams &grad)
{
    if (!params.same_layout(grad))
        throw Error(ErrorKind::ShapeMismatch, "optimizer: gradient layout differs from parameters");
    ++t_;
    if (cfg_.optimizer == OptimizerKind::sgd)
    {
        params.values() = params.values() - cfg_.lr * grad.values();
        return;
    }
    if (m_.size() != grad.values().size())
    {
        m_ = Eigen::VectorXd::Zero(grad.values().size());
        v_ = Eigen::VectorXd::Zero(grad.values().size());
    }
    const Eigen::VectorXd &g = grad.values();
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * g;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    params.values().array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.adam_eps);
}

MiniBatcher::MiniBatcher(std::size_t n, std::size_t batch_size, RngStream rng)
    : batch_(batch_size), rng_(rng), order_(index_range(n))
{
    if (n == 0 || batch_size == 0)
        throw Error(ErrorKind::Validation, "mini-batcher needs a nonempty set and batch size >= 1");
    reshuffle();
}

void MiniBatcher::reshuffle()
{
    for (std::size_t i = order_.size(); i > 1; --i)
        std::swap(order_[i - 1], order_[rng_.uniform_index(i)]);
    cursor_ = 0;
}

std::vector<std::size_t> MiniBatcher::next()
{
    if (cursor_ >= order_.size())
        reshuffle();
    const std::size_t end = std::min(order_.size(), cursor_ + batch_);
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(end));
    cursor_ = end;
    return out;
}

void ConvergenceLog::add(std::size_t step, double loss, double eval_sgcs, double wall_ms)
{
    if (!rows_.empty() && step <= rows_.back().step)
        throw Error(ErrorKind::Validation, "convergence log steps must be strictly increasing");
    LogRow r{step, loss, eval_sgcs, eval_sgcs, wall_ms};
    if (!rows_.empty())
        r.best_sgcs = std::max(rows_.back().best_sgcs, eval_sgcs);
    rows_.push_back(r);
}

double ConvergenceLog::best() const
{
    if (rows_.empty())
        throw Error(ErrorKind::Validation, "empty convergence log");
    return rows_.back().best_sgcs;
}

double ConvergenceLog::final_eval() const
{
    if (rows_.empty())
        throw Error(ErrorKind::Validation, "empty convergence log");
    return rows_.back().eval_sgcs;
}

void ConvergenceLog::write_csv(std::ostream &os) const
{
    os << "step,loss,eval_sgcs,best_sgcs,wall_ms\n";
    for (const auto &r : rows_)
        os << r.step << ',' << fmt(r.loss) << ',' << fmt(r.eval_sgcs) << ',' << fmt(r.best_sgcs) << ','
           << fmt(r.wall_ms) << '\n';
}

void ConvergenceLog::write_csv(const std::filesystem::path &path) const
{
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw Error(ErrorKind::Io, "cannot open log for writing: " + path.string());
    write_csv(os);
    if (!os)
        throw Error(ErrorKind::Io, "failed writing log: " + path.string());
}

std::string ConvergenceLog::csv() const
{
    std::ostringstream os;
    write_csv(os);
    return os.str();
}

std::optional<std::size_t> steps_to_threshold(const ConvergenceLog &log, double threshold)
{
    for (const auto &r : log.rows())
        if (r.best_sgcs >= threshold)
            return r.step;
    return std::nullopt;
}

double evaluate(const ModelParams &params, const ModelConfig &cfg, std::span<const CsiEigen> dataset,
                unsigned threads)
{
    if (dataset.empty())
        throw Error(ErrorKind::Validation, "evaluate: empty dataset");
    std::vector<double> scores(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        scores[i] = sgcs(dataset[i].w, reconstruct(params, cfg, dataset[i].w, QuantizerMode::straight_through));
    });
    std::sort(scores.begin(), scores.end());
    double total = 0.0;
    for (double s : scores)
        total += s;
    return total / static_cast<double>(scores.size());
}

ModelParams inner_update(const ModelParams &params, const ModelConfig &mcfg, std::span<const CsiEigen> task,
                         const TrainConfig &cfg, RngStream rng)
{
    if (task.empty())
        throw Error(ErrorKind::Validation, "inner_update: empty task");
    ModelParams p = params;
    Optimizer opt(cfg);
    MiniBatcher batches(task.size(), cfg.batch_size, rng);
    for (std::size_t s = 0; s < cfg.inner_steps; ++s)
    {
        const auto batch = gather(task, batches.next());
        const LossGrad lg = loss_and_grad(p, mcfg, std::span<const CsiEigen *const>(batch));
        opt.step(p, lg.grad);
    }
    return p;
}

ModelParams reptile_step(const ModelParams &theta, const ModelParams &updated, double eps)
{
    if (!theta.same_layout(updated))
        throw Error(ErrorKind::ShapeMismatch, "reptile_step: parameter layouts differ");
    if (eps == 0.0)
        return theta;
    if (eps == 1.0)
        return updated;
    ModelParams out = theta;
    out.values() = theta.values() + eps * (updated.values() - theta.values());
    return out;
}

TrainResult meta_train(const ModelParams &init, const ModelConfig &mcfg,
                       std::span<const std::vector<CsiEigen>> tasks, const TrainConfig &cfg,
                       std::span<const CsiEigen> holdout)
{
    if (tasks.empty())
        throw Error(ErrorKind::Validation, "meta_train: empty task set");
    for (const auto &t : tasks)
        if (t.empty())
            throw Error(ErrorKind::Validation, "meta_train: task without samples");

    const auto start = clock_type::now();
    TrainResult result{init, {}};
    std::size_t processed = 0;
    double loss_acc = 0.0;
    std::size_t loss_n = 0;
    for (std::size_t it = 0; it < cfg.meta_iterations; ++it)
    {
        RngStream order_rng(cfg.seed, stream_key({purpose::shuffle, it}));
        std::vector<std::size_t> order = index_range(tasks.size());
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[order_rng.uniform_index(i)]);

        for (std::size_t j : order)
        {
            loss_acc += full_loss(result.params, mcfg, tasks[j], cfg.threads);
            ++loss_n;
            const RngStream rng(cfg.seed, stream_key({purpose::train, it, j}));
            const ModelParams adapted = inner_update(result.params, mcfg, tasks[j], cfg, rng);
            result.params = reptile_step(result.params, adapted, cfg.meta_step);
            ++processed;

            const bool last = it + 1 == cfg.meta_iterations && j == order.back();
            if (processed % cfg.eval_interval == 0 || last)
            {
                const double loss = loss_acc / static_cast<double>(loss_n);
                const double score = holdout.empty() ? -loss : evaluate(result.params, mcfg, holdout, cfg.threads);
                result.log.add(processed, loss, score, elapsed_ms(start, cfg.record_wall_time));
                loss_acc = 0.0;
                loss_n = 0;
            }
        }
    }
    return result;
}

TrainResult meta_train(const ModelParams &init, const ModelConfig &mcfg, const MetaEnv &env,
                       const TrainConfig &cfg, std::span<const CsiEigen> holdout)
{
    std::vector<std::vector<CsiEigen>> tasks;
    tasks.reserve(env.tasks.size());
    for (const auto &t : env.tasks)
        tasks.push_back(t.samples);
    return meta_train(init, mcfg, std::span<const std::vector<CsiEigen>>(tasks), cfg, holdout);
}

TrainResult target_retrain(const ModelParams &init, const ModelConfig &mcfg, std::span<const CsiEigen> train,
                           const TrainConfig &cfg, std::span<const CsiEigen> eval)
{
    if (train.empty())
        throw Error(ErrorKind::Validation, "target_retrain: empty dataset");

    std::vector<CsiEigen> train_split;
    std::vector<CsiEigen> eval_split;
    if (eval.empty())
    {
        if (train.size() < 2)
            throw Error(ErrorKind::Validation, "target_retrain: need >= 2 samples to split off an eval set");
        RngStream rng(cfg.seed, stream_key({purpose::shuffle, purpose::evaluation}));
        std::vector<std::size_t> order = index_range(train.size());
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        std::size_t n_eval = static_cast<std::size_t>(std::llround(cfg.eval_fraction * static_cast<double>(train.size())));
        n_eval = std::clamp<std::size_t>(n_eval, 1, train.size() - 1);
        for (std::size_t k = 0; k < order.size(); ++k)
            (k < n_eval ? eval_split : train_split).push_back(train[order[k]]);
        train = train_split;
        eval = eval_split;
    }

    const auto start = clock_type::now();
    TrainResult result{init, {}};
    Optimizer opt(cfg);
    MiniBatcher batches(train.size(), cfg.batch_size, RngStream(cfg.seed, stream_key({purpose::train, purpose::target})));
    auto log = [&](std::size_t step) {
        const double loss = full_loss(result.params, mcfg, train, cfg.threads);
        const double score = evaluate(result.params, mcfg, eval, cfg.threads);
        result.log.add(step, loss, score, elapsed_ms(start, cfg.record_wall_time));
    };
    log(0);
    for (std::size_t s = 1; s <= cfg.retrain_steps; ++s)
    {
        const auto batch = gather(train, batches.next());
        const LossGrad lg = loss_and_grad(result.params, mcfg, std::span<const CsiEigen *const>(batch));
        opt.step(result.params, lg.grad);
        if (s % cfg.eval_interval == 0 || s == cfg.retrain_steps)
            log(s);
    }
    return result;
}

} // namespace csimeta
