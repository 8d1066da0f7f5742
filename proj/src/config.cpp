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

#include "csimeta/config.hpp"

#include "csimeta/error.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace csimeta
{

namespace
{

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string &m)
{
    throw Error(ErrorKind::Validation, m);
}

// Reads one JSON object, remembering which keys were consumed so that
// typos surface as errors instead of silently keeping defaults.
class Section
{
public:
    Section(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            invalid(path_ + " must be an object");
    }

    void get(const char *key, std::size_t &out) { read(key, out, [](const json &v) { return v.is_number_unsigned(); }, "a non-negative integer"); }
    void get(const char *key, double &out) { read(key, out, [](const json &v) { return v.is_number(); }, "a number"); }
    void get(const char *key, bool &out) { read(key, out, [](const json &v) { return v.is_boolean(); }, "a boolean"); }
    void get(const char *key, std::string &out) { read(key, out, [](const json &v) { return v.is_string(); }, "a string"); }
    void get(const char *key, std::vector<std::size_t> &out)
    {
        const json *v = find(key);
        if (!v)
            return;
        if (!v->is_array())
            invalid(field(key) + " must be an array of non-negative integers");
        out.clear();
        for (const auto &x : *v)
        {
            if (!x.is_number_unsigned())
                invalid(field(key) + " must be an array of non-negative integers");
            out.push_back(x.get<std::size_t>());
        }
    }

    const json *find(const char *key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string field(const char *key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                invalid("unknown config field '" + (path_.empty() ? it.key() : path_ + "." + it.key()) + "'");
    }

private:
    template <typename T, typename Pred>
    void read(const char *key, T &out, Pred ok, const char *what)
    {
        const json *v = find(key);
        if (!v)
            return;
        if (!ok(*v))
            invalid(field(key) + " must be " + what);
        out = v->get<T>();
    }

    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_system(Section s, SystemConfig &c)
{
    s.get("n_h", c.n_h);
    s.get("n_v", c.n_v);
    s.get("n_t", c.n_t);
    s.get("n_r", c.n_r);
    s.get("n_d", c.n_d);
    s.get("n_sc", c.n_sc);
    s.get("n_gran", c.n_gran);
    s.get("n_sb", c.n_sb);
    s.finish();
}

void read_scenario(Section s, SimScenario &c)
{
    if (const json *cl = s.find("clusters"))
    {
        if (!cl->is_array())
            invalid("scenario.clusters must be an array");
        c.clusters.clear();
        for (std::size_t i = 0; i < cl->size(); ++i)
        {
            Section e((*cl)[i], "scenario.clusters[" + std::to_string(i) + "]");
            Cluster k;
            e.get("tap", k.tap);
            e.get("power", k.power);
            e.get("aod_deg", k.aod_deg);
            e.get("zod_deg", k.zod_deg);
            e.get("aoa_deg", k.aoa_deg);
            e.finish();
            c.clusters.push_back(k);
        }
    }
    s.get("rays_per_cluster", c.rays_per_cluster);
    s.get("asd_deg", c.asd_deg);
    s.get("zsd_deg", c.zsd_deg);
    s.get("asa_deg", c.asa_deg);
    s.get("ue_azimuth_offset_deg", c.ue_azimuth_offset_deg);
    s.get("ue_zenith_offset_deg", c.ue_zenith_offset_deg);
    s.get("doppler_max", c.doppler_max);
    s.get("slot_spacing", c.slot_spacing);
    s.finish();
}

void read_meta_env(Section s, MetaEnvConfig &c)
{
    s.get("tasks", c.tasks);
    s.get("groups", c.groups);
    s.get("max_ue", c.max_ue);
    s.get("max_slot", c.max_slot);
    s.get("l_task", c.l_task);
    s.get("m_task", c.m_task);
    s.get("alpha", c.alpha);
    s.get("beta", c.beta);
    s.finish();
}

void read_target(Section s, TargetConfig &c)
{
    s.get("n_ue", c.n_ue);
    s.get("n_slot", c.n_slot);
    s.get("n_eval_ue", c.n_eval_ue);
    s.get("n_eval_slot", c.n_eval_slot);
    s.finish();
}

void read_augment(Section s, AugmentConfig &c)
{
    std::string scheme = to_string(c.scheme);
    s.get("scheme", scheme);
    try
    {
        c.scheme = parse_scheme(scheme);
    }
    catch (const Error &e)
    {
        invalid(std::string("augment.scheme: ") + e.what());
    }
    s.get("n_aug", c.n_aug);
    s.get("noise_snr_db", c.noise_snr_db);
    s.get("include_seeds", c.include_seeds);
    s.finish();
}

void read_model(Section s, ModelConfig &c)
{
    s.get("bits", c.bits);
    s.get("latent", c.latent);
    s.get("bits_per_latent", c.bits_per_latent);
    s.get("encoder_hidden", c.encoder_hidden);
    s.get("decoder_hidden", c.decoder_hidden);
    s.get("init_scale", c.init_scale);
    s.finish();
}

void read_train(Section s, TrainConfig &c)
{
    std::string opt = to_string(c.optimizer);
    s.get("optimizer", opt);
    c.optimizer = parse_optimizer(opt);
    s.get("lr", c.lr);
    s.get("beta1", c.beta1);
    s.get("beta2", c.beta2);
    s.get("adam_eps", c.adam_eps);
    s.get("batch_size", c.batch_size);
    s.get("inner_steps", c.inner_steps);
    s.get("meta_step", c.meta_step);
    s.get("meta_iterations", c.meta_iterations);
    s.get("retrain_steps", c.retrain_steps);
    s.get("eval_interval", c.eval_interval);
    s.get("eval_fraction", c.eval_fraction);
    s.get("record_wall_time", c.record_wall_time);
    s.finish();
}

} // namespace

void ExperimentConfig::validate() const
{
    system.validate();
    scenario.validate(system);
    meta_env.validate(system);
    augment.validate();
    model.validate();
    train.validate();
    if (model.n_t != system.n_t)
        invalid("model.n_t (" + std::to_string(model.n_t) + ") must equal system.n_t (" + std::to_string(system.n_t) + ")");
    if (model.n_sb != system.n_sb)
        invalid("model.n_sb (" + std::to_string(model.n_sb) + ") must equal system.n_sb (" +
                std::to_string(system.n_sb) + ")");
    if (target.n_ue == 0)
        invalid("target.n_ue must be >= 1");
    if (target.n_slot == 0)
        invalid("target.n_slot must be >= 1");
    if (target.n_eval_slot == 0 && target.n_eval_ue != 0)
        invalid("target.n_eval_slot must be >= 1 when target.n_eval_ue > 0");
}

void ExperimentConfig::apply_seed(std::uint64_t s)
{
    seed = s;
    meta_env.seed = s;
    train.seed = s;
}

ExperimentConfig parse_config(std::string_view text)
{
    json j;
    try
    {
        j = json::parse(text.begin(), text.end());
    }
    catch (const json::parse_error &e)
    {
        invalid(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig c;
    Section root(j, "");
    std::uint64_t seed = c.seed;
    if (const json *v = root.find("seed"))
    {
        if (!v->is_number_unsigned())
            invalid("seed must be a non-negative integer");
        seed = v->get<std::uint64_t>();
    }
    if (const json *v = root.find("system"))
        read_system(Section(*v, "system"), c.system);
    if (const json *v = root.find("scenario"))
        read_scenario(Section(*v, "scenario"), c.scenario);
    if (const json *v = root.find("meta_env"))
        read_meta_env(Section(*v, "meta_env"), c.meta_env);
    if (const json *v = root.find("target"))
        read_target(Section(*v, "target"), c.target);
    if (const json *v = root.find("augment"))
        read_augment(Section(*v, "augment"), c.augment);
    if (const json *v = root.find("model"))
        read_model(Section(*v, "model"), c.model);
    if (const json *v = root.find("train"))
        read_train(Section(*v, "train"), c.train);
    root.finish();

    // The model always follows the system dimensions.
    c.model.n_t = c.system.n_t;
    c.model.n_sb = c.system.n_sb;
    c.apply_seed(seed);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorKind::Io, "cannot open config: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig &c, int indent)
{
    json clusters = json::array();
    for (const auto &k : c.scenario.clusters)
        clusters.push_back(
            {{"tap", k.tap}, {"power", k.power}, {"aod_deg", k.aod_deg}, {"zod_deg", k.zod_deg}, {"aoa_deg", k.aoa_deg}});
    json j = {
        {"seed", c.seed},
        {"system",
         {{"n_h", c.system.n_h},
          {"n_v", c.system.n_v},
          {"n_t", c.system.n_t},
          {"n_r", c.system.n_r},
          {"n_d", c.system.n_d},
          {"n_sc", c.system.n_sc},
          {"n_gran", c.system.n_gran},
          {"n_sb", c.system.n_sb}}},
        {"scenario",
         {{"clusters", clusters},
          {"rays_per_cluster", c.scenario.rays_per_cluster},
          {"asd_deg", c.scenario.asd_deg},
          {"zsd_deg", c.scenario.zsd_deg},
          {"asa_deg", c.scenario.asa_deg},
          {"ue_azimuth_offset_deg", c.scenario.ue_azimuth_offset_deg},
          {"ue_zenith_offset_deg", c.scenario.ue_zenith_offset_deg},
          {"doppler_max", c.scenario.doppler_max},
          {"slot_spacing", c.scenario.slot_spacing}}},
        {"meta_env",
         {{"tasks", c.meta_env.tasks},
          {"groups", c.meta_env.groups},
          {"max_ue", c.meta_env.max_ue},
          {"max_slot", c.meta_env.max_slot},
          {"l_task", c.meta_env.l_task},
          {"m_task", c.meta_env.m_task},
          {"alpha", c.meta_env.alpha},
          {"beta", c.meta_env.beta}}},
        {"target",
         {{"n_ue", c.target.n_ue},
          {"n_slot", c.target.n_slot},
          {"n_eval_ue", c.target.n_eval_ue},
          {"n_eval_slot", c.target.n_eval_slot}}},
        {"augment",
         {{"scheme", to_string(c.augment.scheme)},
          {"n_aug", c.augment.n_aug},
          {"noise_snr_db", c.augment.noise_snr_db},
          {"include_seeds", c.augment.include_seeds}}},
        {"model",
         {{"bits", c.model.bits},
          {"latent", c.model.latent},
          {"bits_per_latent", c.model.bits_per_latent},
          {"encoder_hidden", c.model.encoder_hidden},
          {"decoder_hidden", c.model.decoder_hidden},
          {"init_scale", c.model.init_scale}}},
        {"train",
         {{"optimizer", to_string(c.train.optimizer)},
          {"lr", c.train.lr},
          {"beta1", c.train.beta1},
          {"beta2", c.train.beta2},
          {"adam_eps", c.train.adam_eps},
          {"batch_size", c.train.batch_size},
          {"inner_steps", c.train.inner_steps},
          {"meta_step", c.train.meta_step},
          {"meta_iterations", c.train.meta_iterations},
          {"retrain_steps", c.train.retrain_steps},
          {"eval_interval", c.train.eval_interval},
          {"eval_fraction", c.train.eval_fraction},
          {"record_wall_time", c.train.record_wall_time}}},
    };
    return j.dump(indent);
}

} // namespace csimeta
