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

#include "doctest.h"
#include "oracles.hpp"

#include "csimeta/error.hpp"
#include "csimeta/metaenv.hpp"

#include <algorithm>
#include <set>

using namespace csimeta;

namespace
{

bool subset(const std::vector<std::size_t> &a, const std::vector<std::size_t> &b)
{
    const std::set<std::size_t> sb(b.begin(), b.end());
    return std::all_of(a.begin(), a.end(), [&](std::size_t x) { return sb.count(x) > 0; });
}

ComplexMatrix columns(const ComplexMatrix &m, const std::vector<std::size_t> &idx)
{
    ComplexMatrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

} // namespace

TEST_CASE("basis groups are unitary Kronecker products")
{
    const SystemConfig sys;
    MetaEnvConfig cfg;
    cfg.groups = 4;
    RngStream rng(3, 0);
    const BasisSet b = build_bases(sys, cfg, rng);
    REQUIRE(b.spatial.size() == 4);
    CHECK(oracle::unitarity_error(b.freq) < 1e-10);
    for (std::size_t p = 0; p < 4; ++p)
    {
        const ComplexMatrix &s = b.spatial[p];
        CHECK(oracle::unitarity_error(s) < 1e-10);
        CHECK((s - oracle::naive_kron(b.horizontal[p], b.vertical[p])).norm() < 1e-14);

        // Rearrangement oracle: rows vec(block(i, j)) of an A (x) B matrix form a rank-1 matrix.
        const Eigen::Index nh = static_cast<Eigen::Index>(sys.n_h), nv = static_cast<Eigen::Index>(sys.n_v);
        Eigen::MatrixXcd r(nh * nh, nv * nv);
        for (Eigen::Index i = 0; i < nh; ++i)
            for (Eigen::Index j = 0; j < nh; ++j)
                for (Eigen::Index k = 0; k < nv; ++k)
                    for (Eigen::Index l = 0; l < nv; ++l)
                        r(i * nh + j, k * nv + l) = s(i * nv + k, j * nv + l);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r);
        const auto sv = svd.singularValues();
        CHECK(sv(1) < 1e-10 * sv(0));
    }
}

TEST_CASE("degenerate single-port arrays")
{
    SystemConfig sys;
    sys.n_h = sys.n_v = sys.n_t = 1;
    MetaEnvConfig cfg;
    cfg.l_task = 1;
    RngStream rng(1, 1);
    const BasisSet b = build_bases(sys, cfg, rng);
    for (const auto &s : b.spatial)
    {
        REQUIRE(s.rows() == 1);
        CHECK(std::abs(std::abs(s(0, 0)) - 1.0) < 1e-14);
    }
}

TEST_CASE("one UE and one slot per task gives one sample")
{
    MetaEnvConfig cfg;
    cfg.tasks = 20;
    cfg.max_ue = cfg.max_slot = 1;
    const MetaEnv env = build_meta_env(SystemConfig{}, cfg);
    for (const auto &t : env.tasks)
        CHECK(t.samples.size() == 1);
}

TEST_CASE("full diversity degrees select the whole index set")
{
    const SystemConfig sys;
    MetaEnvConfig cfg;
    cfg.l_task = sys.n_t;
    cfg.m_task = sys.n_sb;
    int seen = 0;
    for (std::size_t j = 0; j < 400; ++j)
    {
        RngStream rng(4, j);
        const MetaTask t = sample_task_structure(sys, cfg, j, rng);
        CHECK(t.spatial == index_range(sys.n_t));
        CHECK(t.freq == index_range(sys.n_sb));
        for (const auto &ue : t.ues)
            if (ue.l_m == cfg.l_task)
            {
                CHECK(ue.spatial == index_range(sys.n_t));
                ++seen;
            }
    }
    CHECK(seen > 0);
}

TEST_CASE("UE and slot counts per task are uniform")
{
    const SystemConfig sys;
    MetaEnvConfig cfg;
    cfg.max_ue = 5;
    cfg.max_slot = 7;
    std::vector<double> ue(cfg.max_ue, 0.0), slot(cfg.max_slot, 0.0), group(cfg.groups, 0.0);
    const int n = 10000;
    for (int j = 0; j < n; ++j)
    {
        RngStream rng(6, stream_key({purpose::task, static_cast<std::uint64_t>(j)}));
        const MetaTask t = sample_task_structure(sys, cfg, static_cast<std::size_t>(j), rng);
        REQUIRE(t.n_ue >= 1);
        REQUIRE(t.n_ue <= cfg.max_ue);
        ue[t.n_ue - 1] += 1;
        slot[t.n_slot - 1] += 1;
        group[t.group] += 1;
    }
    auto p_value = [n](const std::vector<double> &c) {
        const double e = static_cast<double>(n) / static_cast<double>(c.size());
        double chi2 = 0.0;
        for (double x : c)
            chi2 += (x - e) * (x - e) / e;
        return oracle::chi2_sf(chi2, static_cast<double>(c.size() - 1));
    };
    CHECK(p_value(ue) > 0.01);
    CHECK(p_value(slot) > 0.01);
    CHECK(p_value(group) > 0.01);
}

TEST_CASE("single-term slots are rank one")
{
    const SystemConfig sys;
    MetaEnvConfig cfg;
    cfg.alpha = cfg.beta = 0.01;
    const MetaEnv env = build_meta_env(sys, cfg);
    for (const auto &t : env.tasks)
        for (const auto &s : t.samples)
            for (Eigen::Index l = 1; l < s.w.cols(); ++l)
                CHECK(oracle::cos2(s.w.col(0), s.w.col(l)) > 1 - 1e-12);
}

TEST_CASE("samples live in their selected basis columns")
{
    const SystemConfig sys;
    MetaEnvConfig cfg;
    cfg.tasks = 30;
    const MetaEnv env = build_meta_env(sys, cfg, 1, true);
    for (const auto &t : env.tasks)
    {
        const ComplexMatrix &s = env.basis.spatial[t.group];
        for (std::size_t i = 0; i < t.samples.size(); ++i)
        {
            const SlotSelection &sel = t.selections[i];
            const ComplexMatrix &w = t.samples[i].w;

            // Row sparsity of S^H W survives the column normalization.
            const ComplexMatrix proj = s.adjoint() * w;
            double outside = 0.0;
            for (Eigen::Index r = 0; r < proj.rows(); ++r)
                if (!std::count(sel.spatial.begin(), sel.spatial.end(), static_cast<std::size_t>(r)))
                    outside += proj.row(r).squaredNorm();
            CHECK(outside < 1e-10 * proj.squaredNorm());

            // Before normalization the frequency projection is sparse as well.
            REQUIRE(sel.coeffs.rows() == static_cast<Eigen::Index>(sel.spatial.size()));
            const ComplexMatrix raw = columns(s, sel.spatial) * sel.coeffs * columns(env.basis.freq, sel.freq).adjoint();
            const ComplexMatrix both = s.adjoint() * raw * env.basis.freq;
            double off = 0.0;
            for (Eigen::Index r = 0; r < both.rows(); ++r)
                for (Eigen::Index c = 0; c < both.cols(); ++c)
                {
                    const bool in_r = std::count(sel.spatial.begin(), sel.spatial.end(), static_cast<std::size_t>(r));
                    const bool in_c = std::count(sel.freq.begin(), sel.freq.end(), static_cast<std::size_t>(c));
                    if (!(in_r && in_c))
                        off += std::norm(both(r, c));
                }
            CHECK(off < 1e-10 * both.squaredNorm());

            // And W is exactly that product, column-normalized.
            ComplexMatrix expect = raw;
            for (Eigen::Index l = 0; l < expect.cols(); ++l)
                expect.col(l) /= expect.col(l).norm();
            CHECK((w - expect).norm() < 1e-12);
            for (Eigen::Index l = 0; l < w.cols(); ++l)
                CHECK(std::abs(w.col(l).norm() - 1.0) < 1e-12);
            CHECK(t.samples[i].eigvals.isZero(0.0));
            CHECK(t.samples[i].prov.origin == Origin::meta_synth);
        }
    }
}

TEST_CASE("small environment structure and nesting")
{
    const SystemConfig sys;
    MetaEnvConfig cfg;
    cfg.tasks = 2;
    cfg.max_ue = 2;
    cfg.max_slot = 3;
    const MetaEnv env = build_meta_env(sys, cfg);
    REQUIRE(env.tasks.size() == 2);
    for (const auto &t : env.tasks)
    {
        CHECK(t.samples.size() <= 6);
        CHECK(t.samples.size() == t.n_ue * t.n_slot);
        // Grouped by UE then slot.
        for (std::size_t i = 0; i < t.samples.size(); ++i)
        {
            CHECK(t.samples[i].prov.ue_id == i / t.n_slot);
            CHECK(t.samples[i].prov.slot == i % t.n_slot);
            CHECK(t.samples[i].prov.task_id == t.id);
        }
    }
    CHECK(audit_nesting(env).violations == 0);
}

TEST_CASE("nesting chain and ceiling cardinalities over a desk environment")
{
    const SystemConfig sys;
    const MetaEnvConfig cfg;
    const MetaEnv env = build_meta_env(sys, cfg, 2);
    std::size_t checked = 0;
    for (const auto &t : env.tasks)
        for (const auto &sel : t.selections)
        {
            const UeStructure &ue = t.ues[sel.ue];
            CHECK(subset(sel.spatial, ue.spatial));
            CHECK(subset(ue.spatial, t.spatial));
            CHECK(subset(sel.freq, ue.freq));
            CHECK(subset(ue.freq, t.freq));
            // ceil computed with integer arithmetic: alpha = beta = 3/4.
            CHECK(sel.spatial.size() == (3 * ue.l_m + 3) / 4);
            CHECK(sel.freq.size() == (3 * ue.m_m + 3) / 4);
            ++checked;
        }
    CHECK(checked > 0);
    CHECK(audit_nesting(env).violations == 0);

    // The audit notices a broken chain.
    MetaEnv broken = env;
    auto &sel = broken.tasks[0].selections[0];
    const auto &task_set = broken.tasks[0].spatial;
    for (std::size_t k = 0; k < sys.n_t; ++k)
        if (!std::count(task_set.begin(), task_set.end(), k))
        {
            sel.spatial[0] = k;
            break;
        }
    CHECK(audit_nesting(broken).violations > 0);
}

TEST_CASE("environments are deterministic and thread-count independent")
{
    const SystemConfig sys;
    MetaEnvConfig cfg;
    cfg.tasks = 40;
    const MetaEnv a = build_meta_env(sys, cfg, 1);
    const MetaEnv b = build_meta_env(sys, cfg, 4);
    for (std::size_t j = 0; j < cfg.tasks; ++j)
    {
        REQUIRE(a.tasks[j].samples.size() == b.tasks[j].samples.size());
        for (std::size_t i = 0; i < a.tasks[j].samples.size(); ++i)
            CHECK((a.tasks[j].samples[i].w - b.tasks[j].samples[i].w).norm() == 0.0);
    }
    cfg.seed = 2;
    const MetaEnv c = build_meta_env(sys, cfg, 1);
    CHECK((c.basis.freq - a.basis.freq).norm() > 0.0);
}

TEST_CASE("meta-environment config validation")
{
    const SystemConfig sys;
    auto rejects = [&](auto mutate) {
        MetaEnvConfig cfg;
        mutate(cfg);
        try
        {
            cfg.validate(sys);
        }
        catch (const Error &e)
        {
            return e.kind() == ErrorKind::Validation;
        }
        return false;
    };
    CHECK(rejects([](MetaEnvConfig &c) { c.l_task = 9; }));
    CHECK(rejects([](MetaEnvConfig &c) { c.m_task = 5; }));
    CHECK(rejects([](MetaEnvConfig &c) { c.alpha = 0.0; }));
    CHECK(rejects([](MetaEnvConfig &c) { c.beta = 1.5; }));
    CHECK(rejects([](MetaEnvConfig &c) { c.tasks = 0; }));
    CHECK(rejects([](MetaEnvConfig &c) { c.groups = 0; }));
    CHECK(rejects([](MetaEnvConfig &c) { c.max_ue = 0; }));
    CHECK(rejects([](MetaEnvConfig &c) { c.max_slot = 0; }));
    CHECK_FALSE(rejects([](MetaEnvConfig &) {}));
}
