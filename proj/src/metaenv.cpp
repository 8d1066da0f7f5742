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

#include "csimeta/metaenv.hpp"

#include "csimeta/error.hpp"
#include "csimeta/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace csimeta
{

namespace
{

constexpr int max_redraws = 16;
constexpr double degenerate_norm = 1e-15;

[[noreturn]] void invalid(const std::string &msg)
{
    throw Error(ErrorKind::Validation, msg);
}

ComplexMatrix random_unitary(RngStream &rng, std::size_t n, const char *what)
{
    const auto dim = static_cast<Eigen::Index>(n);
    for (int attempt = 0; attempt <= max_redraws; ++attempt)
    {
        try
        {
            return gram_schmidt(complex_gaussian(rng, dim, dim));
        }
        catch (const Error &e)
        {
            if (e.kind() != ErrorKind::RankDeficient)
                throw;
        }
    }
    throw Error(ErrorKind::RetryExhausted, std::string("build_bases: ") + what + " stayed rank deficient after " +
                                               std::to_string(max_redraws) + " redraws");
}

// ceil() with slack for products such as 0.7 * 10 = 7.000000000000001.
std::size_t ceil_count(double scale, std::size_t n)
{
    const double x = scale * static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

bool is_subset(const std::vector<std::size_t> &inner, const std::vector<std::size_t> &outer)
{
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

bool in_range(const std::vector<std::size_t> &set, std::size_t n)
{
    return std::all_of(set.begin(), set.end(), [n](std::size_t i) { return i < n; });
}

} // namespace

void MetaEnvConfig::validate(const SystemConfig &sys) const
{
    if (tasks == 0)
        invalid("meta_env.tasks must be >= 1");
    if (groups == 0)
        invalid("meta_env.groups must be >= 1");
    if (max_ue == 0)
        invalid("meta_env.max_ue must be >= 1");
    if (max_slot == 0)
        invalid("meta_env.max_slot must be >= 1");
    if (l_task == 0 || l_task > sys.n_t)
        invalid("meta_env.l_task (" + std::to_string(l_task) + ") must be in [1, system.n_t = " +
                std::to_string(sys.n_t) + "]");
    if (m_task == 0 || m_task > sys.n_sb)
        invalid("meta_env.m_task (" + std::to_string(m_task) + ") must be in [1, system.n_sb = " +
                std::to_string(sys.n_sb) + "]");
    if (!(alpha > 0.0 && alpha <= 1.0))
        invalid("meta_env.alpha must be in (0, 1]");
    if (!(beta > 0.0 && beta <= 1.0))
        invalid("meta_env.beta must be in (0, 1]");
}

std::size_t slot_spatial_count(const MetaEnvConfig &cfg, std::size_t l_m)
{
    return ceil_count(cfg.alpha, l_m);
}

std::size_t slot_freq_count(const MetaEnvConfig &cfg, std::size_t m_m)
{
    return ceil_count(cfg.beta, m_m);
}

BasisSet build_bases(const SystemConfig &sys, const MetaEnvConfig &cfg, RngStream &rng)
{
    BasisSet basis;
    basis.spatial.reserve(cfg.groups);
    basis.horizontal.reserve(cfg.groups);
    basis.vertical.reserve(cfg.groups);
    for (std::size_t p = 0; p < cfg.groups; ++p)
    {
        ComplexMatrix uh = random_unitary(rng, sys.n_h, "horizontal factor");
        ComplexMatrix uv = random_unitary(rng, sys.n_v, "vertical factor");
        basis.spatial.push_back(kron(uh, uv));
        basis.horizontal.push_back(std::move(uh));
        basis.vertical.push_back(std::move(uv));
    }
    basis.freq = random_unitary(rng, sys.n_sb, "frequency basis");
    return basis;
}

MetaTask sample_task_structure(const SystemConfig &sys, const MetaEnvConfig &cfg, std::size_t j, RngStream &rng)
{
    MetaTask task;
    task.id = j;
    task.n_ue = 1 + rng.uniform_index(cfg.max_ue);
    task.n_slot = 1 + rng.uniform_index(cfg.max_slot);
    task.group = rng.uniform_index(cfg.groups);
    task.spatial = sample_without_replacement(rng, index_range(sys.n_t), cfg.l_task);
    task.freq = sample_without_replacement(rng, index_range(sys.n_sb), cfg.m_task);

    task.ues.reserve(task.n_ue);
    for (std::size_t m = 0; m < task.n_ue; ++m)
    {
        UeStructure ue;
        ue.l_m = 1 + rng.uniform_index(cfg.l_task);
        ue.m_m = 1 + rng.uniform_index(cfg.m_task);
        ue.spatial = sample_without_replacement(rng, task.spatial, ue.l_m);
        ue.freq = sample_without_replacement(rng, task.freq, ue.m_m);
        task.ues.push_back(std::move(ue));
    }
    return task;
}

SynthSample synth_sample(const SystemConfig &sys, const MetaEnvConfig &cfg, const BasisSet &basis,
                         const MetaTask &task, std::size_t m, std::size_t n, RngStream &rng, bool retain_coeffs)
{
    if (m >= task.ues.size() || n >= task.n_slot)
        throw Error(ErrorKind::ShapeMismatch, "synth_sample: UE/slot index out of range");
    const UeStructure &ue = task.ues[m];

    SynthSample out;
    out.selection.ue = m;
    out.selection.slot = n;
    out.selection.spatial = sample_without_replacement(rng, ue.spatial, slot_spatial_count(cfg, ue.l_m));
    out.selection.freq = sample_without_replacement(rng, ue.freq, slot_freq_count(cfg, ue.m_m));

    const ComplexMatrix &s_full = basis.spatial.at(task.group);
    const auto ns = static_cast<Eigen::Index>(out.selection.spatial.size());
    const auto nf = static_cast<Eigen::Index>(out.selection.freq.size());
    ComplexMatrix s_sel(s_full.rows(), ns);
    for (Eigen::Index i = 0; i < ns; ++i)
        s_sel.col(i) = s_full.col(static_cast<Eigen::Index>(out.selection.spatial[static_cast<std::size_t>(i)]));
    ComplexMatrix f_sel(basis.freq.rows(), nf);
    for (Eigen::Index i = 0; i < nf; ++i)
        f_sel.col(i) = basis.freq.col(static_cast<Eigen::Index>(out.selection.freq[static_cast<std::size_t>(i)]));

    for (int attempt = 0; attempt <= max_redraws; ++attempt)
    {
        ComplexMatrix coeffs = complex_gaussian(rng, ns, nf);
        ComplexMatrix w = s_sel * coeffs * f_sel.adjoint();
        try
        {
            normalize_columns(w, degenerate_norm);
        }
        catch (const Error &e)
        {
            if (e.kind() != ErrorKind::DegenerateColumn)
                throw;
            continue;
        }
        out.sample.w = std::move(w);
        out.sample.eigvals = RealVector::Zero(static_cast<Eigen::Index>(sys.n_sb));
        out.sample.prov.ue_id = static_cast<std::uint32_t>(m);
        out.sample.prov.slot = static_cast<std::uint32_t>(n);
        out.sample.prov.origin = Origin::meta_synth;
        out.sample.prov.task_id = static_cast<std::uint32_t>(task.id);
        if (retain_coeffs)
            out.selection.coeffs = std::move(coeffs);
        return out;
    }
    throw Error(ErrorKind::RetryExhausted, "synth_sample: degenerate column persisted after redraws");
}

MetaEnvGenerator::MetaEnvGenerator(const SystemConfig &sys, const MetaEnvConfig &cfg, bool retain_coeffs)
    : sys_(sys), cfg_(cfg), retain_(retain_coeffs)
{
    sys_.validate();
    cfg_.validate(sys_);
    RngStream rng(cfg_.seed, stream_key({purpose::bases}));
    basis_ = build_bases(sys_, cfg_, rng);
}

MetaTask MetaEnvGenerator::task(std::size_t j) const
{
    RngStream rng(cfg_.seed, stream_key({purpose::task, j}));
    MetaTask task = sample_task_structure(sys_, cfg_, j, rng);
    task.samples.reserve(task.n_ue * task.n_slot);
    task.selections.reserve(task.n_ue * task.n_slot);
    for (std::size_t m = 0; m < task.n_ue; ++m)
    {
        for (std::size_t n = 0; n < task.n_slot; ++n)
        {
            RngStream slot_rng(cfg_.seed, stream_key({purpose::slot, j, m, n}));
            SynthSample s = synth_sample(sys_, cfg_, basis_, task, m, n, slot_rng, retain_);
            task.samples.push_back(std::move(s.sample));
            task.selections.push_back(std::move(s.selection));
        }
    }
    return task;
}

MetaEnv build_meta_env(const SystemConfig &sys, const MetaEnvConfig &cfg, unsigned threads, bool retain_coeffs)
{
    MetaEnvGenerator gen(sys, cfg, retain_coeffs);
    MetaEnv env;
    env.sys = sys;
    env.cfg = cfg;
    env.basis = gen.basis();
    env.tasks.resize(cfg.tasks);
    parallel_for(cfg.tasks, threads, [&](std::size_t j) { env.tasks[j] = gen.task(j); });
    return env;
}

void audit_task(const SystemConfig &sys, const MetaEnvConfig &cfg, const MetaTask &task, NestingAudit &audit)
{
    auto fail = [&](const std::string &msg) {
        ++audit.violations;
        if (audit.messages.size() < 16)
        {
            std::ostringstream os;
            os << "task " << task.id << ": " << msg;
            audit.messages.push_back(os.str());
        }
    };

    if (task.spatial.size() != cfg.l_task || !in_range(task.spatial, sys.n_t))
        fail("task spatial set has wrong size or out-of-range index");
    if (task.freq.size() != cfg.m_task || !in_range(task.freq, sys.n_sb))
        fail("task frequency set has wrong size or out-of-range index");
    if (task.group >= cfg.groups)
        fail("basis group index out of range");
    if (task.ues.size() != task.n_ue)
        fail("UE record count differs from n_ue");
    if (task.samples.size() != task.n_ue * task.n_slot || task.selections.size() != task.samples.size())
        fail("sample count differs from n_ue * n_slot");

    for (const auto &ue : task.ues)
    {
        if (ue.l_m < 1 || ue.l_m > cfg.l_task || ue.spatial.size() != ue.l_m || !is_subset(ue.spatial, task.spatial))
            fail("UE spatial set violates S~_m in S-hat_j with |S~_m| = L_m <= L_task");
        if (ue.m_m < 1 || ue.m_m > cfg.m_task || ue.freq.size() != ue.m_m || !is_subset(ue.freq, task.freq))
            fail("UE frequency set violates F~_m in F-hat_j with |F~_m| = M_m <= M_task");
    }

    for (std::size_t i = 0; i < task.selections.size() && i < task.samples.size(); ++i)
    {
        ++audit.samples;
        const SlotSelection &sel = task.selections[i];
        if (sel.ue >= task.ues.size())
        {
            fail("selection refers to missing UE");
            continue;
        }
        const UeStructure &ue = task.ues[sel.ue];
        if (!is_subset(sel.spatial, ue.spatial))
            fail("slot spatial set not contained in UE set");
        if (!is_subset(sel.freq, ue.freq))
            fail("slot frequency set not contained in UE set");
        if (sel.spatial.size() != slot_spatial_count(cfg, ue.l_m))
            fail("slot spatial cardinality differs from ceil(alpha L_m)");
        if (sel.freq.size() != slot_freq_count(cfg, ue.m_m))
            fail("slot frequency cardinality differs from ceil(beta M_m)");
        const CsiEigen &s = task.samples[i];
        if (s.prov.ue_id != sel.ue || s.prov.slot != sel.slot)
            fail("sample provenance differs from its selection record");
        for (Eigen::Index l = 0; l < s.w.cols(); ++l)
            if (std::abs(s.w.col(l).norm() - 1.0) >= 1e-12)
                fail("sample column not unit norm");
    }
}

NestingAudit audit_nesting(const MetaEnv &env)
{
    NestingAudit audit;
    if (env.tasks.size() != env.cfg.tasks)
    {
        ++audit.violations;
        audit.messages.push_back("task count differs from T");
    }
    for (const auto &task : env.tasks)
        audit_task(env.sys, env.cfg, task, audit);
    return audit;
}

} // namespace csimeta
