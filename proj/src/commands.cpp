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

#include "csimeta/commands.hpp"

#include "csimeta/dataset.hpp"
#include "csimeta/error.hpp"
#include "csimeta/parallel.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace csimeta
{

namespace
{

unsigned threads_of(const ExperimentConfig &cfg)
{
    return cfg.train.threads;
}

std::vector<CsiEigen> to_csi(const SystemConfig &sys, std::span<const TimeChannel> channels)
{
    std::vector<CsiEigen> out;
    out.reserve(channels.size());
    for (const auto &h : channels)
        out.push_back(channel_to_csi(sys, h));
    return out;
}

std::vector<TimeChannel> simulate_population(const ExperimentConfig &cfg, std::uint64_t tag, std::size_t n_ue,
                                             std::size_t n_slot, std::uint32_t first_id)
{
    std::vector<std::vector<TimeChannel>> per_ue(n_ue);
    parallel_for(n_ue, threads_of(cfg), [&](std::size_t u) {
        const RngStream rng(cfg.seed, stream_key({tag, u}));
        per_ue[u] = simulate_ue(cfg.system, cfg.scenario, rng, n_slot, first_id + static_cast<std::uint32_t>(u));
    });
    std::vector<TimeChannel> all;
    for (auto &v : per_ue)
        for (auto &h : v)
            all.push_back(std::move(h));
    return all;
}

void check_csi_dims(const DatasetHeader &h, const ExperimentConfig &cfg, const std::filesystem::path &path)
{
    if (h.kind != RecordKind::csi_eigen)
        throw Error(ErrorKind::Io, path.string() + ": expected CSI records");
    if (h.dims[0] != cfg.system.n_t || h.dims[1] != cfg.system.n_sb)
        throw Error(ErrorKind::Validation, path.string() + ": dataset dims (" + std::to_string(h.dims[0]) + ", " +
                                               std::to_string(h.dims[1]) + ") differ from system.n_t/n_sb");
}

} // namespace

ModelParams fresh_params(const ExperimentConfig &cfg)
{
    RngStream rng(cfg.seed, stream_key({purpose::init}));
    return init_params(cfg.model, rng);
}

void cmd_gen_meta(const ExperimentConfig &cfg, const std::filesystem::path &out, std::ostream &report)
{
    const MetaEnvGenerator gen(cfg.system, cfg.meta_env);
    DatasetHeader header;
    header.kind = RecordKind::csi_eigen;
    header.dims = {static_cast<std::uint32_t>(cfg.system.n_t), static_cast<std::uint32_t>(cfg.system.n_sb), 0};
    header.seed = cfg.seed;
    header.config = to_json(cfg);
    DatasetWriter writer(out, header);

    // Generate in small parallel chunks and write in task order, so memory
    // stays bounded by one chunk.
    NestingAudit audit;
    const std::size_t chunk = std::max<std::size_t>(1, 4 * resolve_threads(threads_of(cfg)));
    for (std::size_t first = 0; first < cfg.meta_env.tasks; first += chunk)
    {
        const std::size_t n = std::min(chunk, cfg.meta_env.tasks - first);
        std::vector<MetaTask> tasks(n);
        parallel_for(n, threads_of(cfg), [&](std::size_t k) { tasks[k] = gen.task(first + k); });
        for (const auto &t : tasks)
        {
            audit_task(cfg.system, cfg.meta_env, t, audit);
            for (const auto &s : t.samples)
                writer.write(s);
        }
    }
    writer.close();
    report << "tasks " << cfg.meta_env.tasks << ", samples " << writer.written() << ", nesting violations "
           << audit.violations << '\n';
    for (const auto &m : audit.messages)
        report << "  " << m << '\n';
}

void cmd_gen_target(const ExperimentConfig &cfg, const GenTargetPaths &paths, std::ostream &report)
{
    const auto seeds = simulate_population(cfg, purpose::target, cfg.target.n_ue, cfg.target.n_slot, 0);
    const std::string echo = to_json(cfg);
    write_channels(paths.channels, seeds, cfg.system, cfg.seed, echo);
    const auto csi = to_csi(cfg.system, seeds);
    write_csi(paths.csi, csi, cfg.seed, echo);
    report << "channels " << seeds.size() << ", csi " << csi.size();
    if (paths.eval && cfg.target.n_eval_ue > 0)
    {
        // Fresh UEs of the same scenario, ids following the seeded ones.
        const auto eval = simulate_population(cfg, purpose::evaluation, cfg.target.n_eval_ue, cfg.target.n_eval_slot,
                                              static_cast<std::uint32_t>(cfg.target.n_ue));
        write_csi(*paths.eval, to_csi(cfg.system, eval), cfg.seed, echo);
        report << ", eval " << eval.size();
    }
    report << '\n';
}

void cmd_augment(const ExperimentConfig &cfg, const std::filesystem::path &seeds_path,
                 const std::filesystem::path &out, std::ostream &report)
{
    DatasetHeader in_header;
    const auto seeds = read_channels(seeds_path, &in_header);
    if (in_header.dims[0] != cfg.system.n_r || in_header.dims[1] != cfg.system.n_t ||
        in_header.dims[2] != cfg.system.n_d)
        throw Error(ErrorKind::Validation, seeds_path.string() + ": channel dims differ from system.n_r/n_t/n_d");
    if (seeds.empty())
        throw Error(ErrorKind::Validation, seeds_path.string() + ": no seed channels");

    const auto per_ue = group_by_ue(seeds);
    const auto seed_csi = to_csi(cfg.system, seeds);
    std::vector<CsiEigen> data;
    if (cfg.augment.include_seeds || cfg.augment.scheme == AugmentScheme::none)
        data = seed_csi;

    const AugmentScheme scheme = cfg.augment.scheme;
    if (scheme == AugmentScheme::proposed)
    {
        auto aug = augment_dataset(cfg.system, cfg.augment, per_ue, cfg.seed, threads_of(cfg));
        std::move(aug.begin(), aug.end(), std::back_inserter(data));

        CovarianceCheck worst;
        const std::size_t probe = std::min<std::size_t>(per_ue.size(), 3);
        for (std::size_t q = 0; q < probe; ++q)
        {
            RngStream rng(cfg.seed, stream_key({purpose::augment, purpose::evaluation, q}));
            const auto c = covariance_match(estimate_stats(cfg.system, per_ue[q]), 50000, rng);
            worst.max_cov_error = std::max(worst.max_cov_error, c.max_cov_error);
            worst.max_power_error = std::max(worst.max_power_error, c.max_power_error);
            worst.delays += c.delays;
        }
        report << "covariance match over " << probe << " UEs: max relative error " << worst.max_cov_error
               << ", max power error " << worst.max_power_error << '\n';
    }
    else if (scheme != AugmentScheme::none)
    {
        const RngStream rng(cfg.seed, stream_key({purpose::baseline, static_cast<std::uint64_t>(scheme)}));
        auto aug = augment_baseline(scheme, seed_csi, rng, cfg.augment, per_ue.size() * cfg.augment.n_aug);
        std::move(aug.begin(), aug.end(), std::back_inserter(data));
    }
    write_csi(out, data, cfg.seed, to_json(cfg));
    report << "scheme " << to_string(scheme) << ", seeds " << seed_csi.size() << ", written " << data.size() << '\n';
}

void cmd_meta_train(const ExperimentConfig &cfg, const std::filesystem::path &env,
                    const std::filesystem::path &checkpoint, const std::optional<std::filesystem::path> &log,
                    std::ostream &report)
{
    DatasetHeader header;
    auto samples = read_csi(env, &header);
    check_csi_dims(header, cfg, env);
    const auto tasks = group_by_task(std::move(samples));

    const ModelParams init = fresh_params(cfg);
    const TrainResult r = meta_train(init, cfg.model, std::span<const std::vector<CsiEigen>>(tasks), cfg.train);
    save_checkpoint(checkpoint, cfg.model, r.params);
    if (log)
        r.log.write_csv(*log);
    report << "meta-trained on " << tasks.size() << " tasks, final pre-adaptation loss "
           << (r.log.empty() ? 0.0 : r.log.rows().back().loss) << '\n';
}

double cmd_retrain_eval(const ExperimentConfig &cfg, const std::string &init, const std::filesystem::path &train,
                        const std::optional<std::filesystem::path> &eval,
                        const std::optional<std::filesystem::path> &checkpoint,
                        const std::optional<std::filesystem::path> &log, std::ostream &report)
{
    ModelParams start;
    if (init == "random")
        start = fresh_params(cfg);
    else
    {
        auto [mcfg, params] = load_checkpoint(init);
        if (mcfg.n_t != cfg.model.n_t || mcfg.n_sb != cfg.model.n_sb || mcfg.bits != cfg.model.bits ||
            mcfg.latent != cfg.model.latent || mcfg.encoder_hidden != cfg.model.encoder_hidden ||
            mcfg.decoder_hidden != cfg.model.decoder_hidden)
            throw Error(ErrorKind::Validation, init + ": checkpoint model shape differs from config model");
        start = std::move(params);
    }

    DatasetHeader th;
    const auto train_set = read_csi(train, &th);
    check_csi_dims(th, cfg, train);
    std::vector<CsiEigen> eval_set;
    if (eval)
    {
        DatasetHeader eh;
        eval_set = read_csi(*eval, &eh);
        check_csi_dims(eh, cfg, *eval);
    }

    const TrainResult r = target_retrain(start, cfg.model, train_set, cfg.train, eval_set);
    if (checkpoint)
        save_checkpoint(*checkpoint, cfg.model, r.params);
    if (log)
        r.log.write_csv(*log);
    report << "retrained " << cfg.train.retrain_steps << " steps on " << train_set.size()
           << " samples, best eval SGCS " << std::setprecision(6) << r.log.best() << '\n';
    return r.log.best();
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"csimeta: meta-learned CSI feedback experiments"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    app.add_option("--config", config_path, "experiment config (JSON); desk defaults when omitted");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--threads", threads, "worker cap, 0 = all cores");

    std::string out_path, csi_out, eval_out, in_path, scheme, env_path, log_path, init = "random", train_path,
        eval_path;

    auto *gen_meta = app.add_subcommand("gen-meta", "synthesize the meta-task environment");
    gen_meta->add_option("--out", out_path, "output CSI dataset")->required();

    auto *gen_target = app.add_subcommand("gen-target", "simulate the seeded target set");
    gen_target->add_option("--out", out_path, "output channel dataset")->required();
    gen_target->add_option("--csi-out", csi_out, "output CSI dataset")->required();
    gen_target->add_option("--eval-out", eval_out, "output CSI dataset of fresh evaluation UEs");

    auto *augment = app.add_subcommand("augment", "augment seed channels");
    augment->add_option("--in", in_path, "seed channel dataset")->required();
    augment->add_option("--out", out_path, "output CSI dataset")->required();
    augment->add_option("--scheme", scheme, "augmentation scheme (overrides config)");

    auto *mtrain = app.add_subcommand("meta-train", "meta-train the autoencoder");
    mtrain->add_option("--env", env_path, "meta-environment dataset")->required();
    mtrain->add_option("--out", out_path, "output checkpoint")->required();
    mtrain->add_option("--log", log_path, "CSV log");

    auto *retrain = app.add_subcommand("retrain-eval", "retrain on target data and log convergence");
    retrain->add_option("--init", init, "checkpoint path or 'random'");
    retrain->add_option("--train", train_path, "training CSI dataset")->required();
    retrain->add_option("--eval", eval_path, "evaluation CSI dataset (else a seeded 90/10 split)");
    retrain->add_option("--out", out_path, "final checkpoint");
    retrain->add_option("--log", log_path, "CSV convergence log");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    auto opt_path = [](const std::string &s) -> std::optional<std::filesystem::path> {
        if (s.empty())
            return std::nullopt;
        return std::filesystem::path(s);
    };

    try
    {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (seed)
            cfg.apply_seed(*seed);
        cfg.train.threads = threads;
        if (!scheme.empty())
            cfg.augment.scheme = parse_scheme(scheme);
        cfg.validate();

        if (*gen_meta)
            cmd_gen_meta(cfg, out_path, out);
        else if (*gen_target)
            cmd_gen_target(cfg, GenTargetPaths{out_path, csi_out, opt_path(eval_out)}, out);
        else if (*augment)
            cmd_augment(cfg, in_path, out_path, out);
        else if (*mtrain)
            cmd_meta_train(cfg, env_path, out_path, opt_path(log_path), out);
        else if (*retrain)
            cmd_retrain_eval(cfg, init, train_path, opt_path(eval_path), opt_path(out_path), opt_path(log_path), out);
        return 0;
    }
    catch (const Error &e)
    {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::Io ? 2 : 1;
    }
    catch (const std::filesystem::filesystem_error &e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace csimeta
