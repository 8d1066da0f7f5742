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
#include "csimeta/model.hpp"
#include "csimeta/train.hpp"

#include <filesystem>
#include <fstream>
#include <cstring>
#include <iterator>

using namespace csimeta;

namespace
{

ModelConfig tiny()
{
    ModelConfig c;
    c.n_t = 2;
    c.n_sb = 2;
    c.latent = 2;
    c.bits_per_latent = 2;
    c.bits = 4;
    c.encoder_hidden = {6};
    c.decoder_hidden = {6};
    return c;
}

std::vector<CsiEigen> random_csi(std::mt19937_64 &gen, std::size_t n, std::size_t n_t, std::size_t n_sb)
{
    std::vector<CsiEigen> out;
    for (std::size_t i = 0; i < n; ++i)
    {
        CsiEigen s;
        s.w = oracle::random_complex(gen, static_cast<int>(n_t), static_cast<int>(n_sb));
        for (Eigen::Index l = 0; l < s.w.cols(); ++l)
            s.w.col(l).normalize();
        s.eigvals = RealVector::Zero(static_cast<Eigen::Index>(n_sb));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CsiEigen> desk_csi(std::uint64_t seed, std::uint32_t n_ue, std::size_t n_slot)
{
    const SystemConfig cfg;
    std::vector<CsiEigen> out;
    for (std::uint32_t u = 0; u < n_ue; ++u)
        for (const auto &h : simulate_ue(cfg, SimScenario::desk_default(), RngStream(seed, u), n_slot, u))
            out.push_back(channel_to_csi(cfg, h));
    return out;
}

std::filesystem::path temp_path(const std::string &name)
{
    return std::filesystem::temp_directory_path() / ("csimeta_model_" + name);
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("midrise quantizer levels")
{
    for (std::size_t b = 1; b <= 8; ++b)
    {
        const std::uint32_t top = (1u << b) - 1u;
        CHECK(quantize_level(0.0, b) == (1u << (b - 1)));
        CHECK(quantize_level(1.0, b) == top);
        CHECK(quantize_level(5.0, b) == top);
        CHECK(quantize_level(-1.0, b) == 0);
        CHECK(quantize_level(-7.0, b) == 0);
        // Every cell: the midpoint maps back to its own level and the error bound holds.
        for (std::uint32_t k = 0; k <= top; ++k)
            CHECK(quantize_level(dequantize_level(k, b), b) == k);
        for (int i = 0; i <= 2000; ++i)
        {
            const double x = -1.0 + 2.0 * i / 2000.0;
            CHECK(std::abs(dequantize_level(quantize_level(x, b), b) - x) <= 1.0 / (1u << b) + 1e-15);
        }
    }
}

TEST_CASE("bit packing is big-endian and invertible")
{
    const std::vector<std::uint32_t> levels{2, 1, 3, 0};
    const Bitstream bits = pack_levels(levels, 2);
    CHECK(bits == Bitstream{1, 0, 0, 1, 1, 1, 0, 0});
    CHECK(unpack_levels(bits, 2) == levels);
    CHECK_THROWS_AS(unpack_levels(Bitstream{1, 0, 1}, 2), Error);
}

TEST_CASE("flattening layout")
{
    ComplexMatrix w(2, 2);
    w << cplx(1, 5), cplx(3, 7), cplx(2, 6), cplx(4, 8);
    const Eigen::VectorXd x = flatten_csi(w);
    Eigen::VectorXd want(8);
    want << 1, 2, 3, 4, 5, 6, 7, 8;
    CHECK((x - want).norm() == 0.0);
    CHECK((unflatten_csi(x, 2, 2) - w).norm() == 0.0);
}

TEST_CASE("zero encoder gives the midpoint level everywhere")
{
    const ModelConfig cfg;
    const ModelParams p(cfg);
    std::mt19937_64 gen(1);
    const auto data = random_csi(gen, 1, cfg.n_t, cfg.n_sb);
    const Encoded e = encode(p, cfg, data[0]);
    CHECK(e.bits.size() == cfg.bits);
    for (auto lv : unpack_levels(e.bits, cfg.bits_per_latent))
        CHECK(lv == 2u);
}

TEST_CASE("decoder output is column-normalized")
{
    const ModelConfig cfg;
    RngStream rng(2, 0);
    const ModelParams p = init_params(cfg, rng);
    for (int trial = 0; trial < 50; ++trial)
    {
        Bitstream bits(cfg.bits);
        for (auto &b : bits)
            b = static_cast<std::uint8_t>(rng.uniform_index(2));
        const CsiEigen w = decode(p, cfg, bits);
        for (Eigen::Index l = 0; l < w.w.cols(); ++l)
            CHECK(std::abs(w.w.col(l).norm() - 1.0) < 1e-12);
    }
    try
    {
        (void)decode(p, cfg, Bitstream(cfg.bits - 1, 0));
        FAIL("expected BadBitstreamLength");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::BadBitstreamLength);
    }
}

TEST_CASE("bias-only decoder reproduces the normalized bias")
{
    const ModelConfig cfg;
    RngStream rng(3, 0);
    ModelParams p = init_params(cfg, rng);
    const std::size_t last = p.layers(Part::decoder) - 1;
    p.weight(Part::decoder, last).setZero();
    std::mt19937_64 gen(3);
    const ComplexMatrix pattern = oracle::random_complex(gen, 8, 4);
    p.bias(Part::decoder, last) = flatten_csi(pattern);
    const CsiEigen w = decode(p, cfg, Bitstream(cfg.bits, 1));
    for (Eigen::Index l = 0; l < 4; ++l)
        CHECK((w.w.col(l) - pattern.col(l) / pattern.col(l).norm()).norm() < 1e-12);
}

TEST_CASE("sgcs identities")
{
    std::mt19937_64 gen(4);
    const ComplexMatrix w = oracle::random_complex(gen, 8, 4);
    CHECK(sgcs(w, w) == doctest::Approx(1.0).epsilon(1e-12));
    ComplexMatrix v = w;
    for (Eigen::Index l = 0; l < 4; ++l)
        v.col(l) *= std::polar(0.3 + l, 1.1 * l);
    CHECK(sgcs(w, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sgcs(w, w * std::polar(1.0, 2.0)) == doctest::Approx(1.0).epsilon(1e-12));

    ComplexMatrix orth(2, 2), base(2, 2);
    base << 1.0, cplx(0, 1), 0.0, 1.0;
    orth << 0.0, 1.0, 1.0, cplx(0, 1);
    CHECK(sgcs(base, orth) == doctest::Approx(0.0));

    for (int t = 0; t < 100; ++t)
    {
        const ComplexMatrix a = oracle::random_complex(gen, 8, 4);
        const ComplexMatrix b = oracle::random_complex(gen, 8, 4);
        const double s = sgcs(a, b);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s == doctest::Approx(oracle::naive_sgcs(a, b)).epsilon(1e-12));
    }

    ComplexMatrix z = w;
    z.col(2).setZero();
    try
    {
        (void)sgcs(w, z);
        FAIL("expected ZeroColumn");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::ZeroColumn);
    }
}

TEST_CASE("analytic gradients match central differences")
{
    const ModelConfig cfg = tiny();
    REQUIRE(ModelParams(cfg).size() <= 200);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        RngStream rng(seed, stream_key({purpose::init}));
        ModelParams p = init_params(cfg, rng);
        p.values() *= 1.5;
        std::mt19937_64 gen(seed);
        const auto batch = random_csi(gen, 3, cfg.n_t, cfg.n_sb);
        const LossGrad lg = loss_and_grad(p, cfg, std::span<const CsiEigen>(batch), QuantizerMode::bypass);
        const double h = 1e-5;
        for (std::size_t k = 0; k < p.size(); ++k)
        {
            ModelParams plus = p, minus = p;
            plus.values()(static_cast<Eigen::Index>(k)) += h;
            minus.values()(static_cast<Eigen::Index>(k)) -= h;
            const double fp = loss_and_grad(plus, cfg, std::span<const CsiEigen>(batch), QuantizerMode::bypass).loss;
            const double fm = loss_and_grad(minus, cfg, std::span<const CsiEigen>(batch), QuantizerMode::bypass).loss;
            const double fd = (fp - fm) / (2 * h);
            const double an = lg.grad.values()(static_cast<Eigen::Index>(k));
            worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
        }
    }
    MESSAGE("max relative gradient error: " << worst);
    CHECK(worst < 1e-4);
}

TEST_CASE("loss equals minus the mean SGCS of full reconstructions")
{
    const ModelConfig cfg;
    RngStream rng(5, 0);
    const ModelParams p = init_params(cfg, rng);
    const auto data = desk_csi(5, 3, 2);
    const LossGrad lg = loss_and_grad(p, cfg, std::span<const CsiEigen>(data));
    double mean = 0.0;
    for (const auto &s : data)
        mean += sgcs(s.w, reconstruct(p, cfg, s.w));
    mean /= static_cast<double>(data.size());
    CHECK(lg.loss == doctest::Approx(-mean).epsilon(1e-12));
    CHECK(lg.grad.same_layout(p));
    CHECK(lg.grad.all_finite());

    // decode(encode(W)) is the same full pass.
    const Encoded e = encode(p, cfg, data[0]);
    CHECK((decode(p, cfg, e.bits).w - reconstruct(p, cfg, data[0].w)).norm() < 1e-14);
}

TEST_CASE("gradient vanishes at a perfect reconstruction")
{
    const ModelConfig cfg;
    RngStream rng(6, 0);
    ModelParams p = init_params(cfg, rng);
    const auto data = desk_csi(6, 1, 1);
    const std::size_t last = p.layers(Part::decoder) - 1;
    p.weight(Part::decoder, last).setZero();
    p.bias(Part::decoder, last) = flatten_csi(data[0].w);
    const LossGrad lg = loss_and_grad(p, cfg, std::span<const CsiEigen>(data));
    CHECK(lg.loss == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(lg.grad.values().norm() < 1e-8);
}

TEST_CASE("bitstream is locally constant in the parameters")
{
    const ModelConfig cfg;
    RngStream rng(7, 0);
    const ModelParams p = init_params(cfg, rng);
    const auto data = desk_csi(7, 4, 2);
    for (std::size_t k = 0; k < p.size(); k += 97)
    {
        ModelParams q = p;
        q.values()(static_cast<Eigen::Index>(k)) += 1e-9;
        for (const auto &s : data)
            CHECK(encode(q, cfg, s).bits == encode(p, cfg, s).bits);
    }
    for (const auto &s : data)
    {
        const Encoded a = encode(p, cfg, s), b = encode(p, cfg, s);
        CHECK(a.bits == b.bits);
        CHECK(a.bits.size() == cfg.bits);
        CHECK((a.latent - b.latent).norm() == 0.0);
    }
}

TEST_CASE("encoder ignores per-column phase of its input")
{
    const ModelConfig cfg;
    RngStream rng(8, 0);
    const ModelParams p = init_params(cfg, rng);
    CsiEigen s = desk_csi(8, 1, 1)[0];
    const Encoded a = encode(p, cfg, s);
    for (Eigen::Index l = 0; l < s.w.cols(); ++l)
        s.w.col(l) *= std::polar(1.0, 0.4 + l);
    const Encoded b = encode(p, cfg, s);
    CHECK((a.latent - b.latent).norm() < 1e-12);
}

TEST_CASE("initialization scale")
{
    ModelConfig cfg;
    cfg.init_scale = 1.0;
    RngStream rng(9, 0);
    const ModelParams p = init_params(cfg, rng);
    for (Part part : {Part::encoder, Part::decoder})
        for (std::size_t i = 0; i < p.layers(part); ++i)
        {
            const auto w = p.weight(part, i);
            CHECK(w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(static_cast<double>(w.cols())));
            CHECK(p.bias(part, i).isZero(0.0));
        }
    CHECK(p.layers(Part::encoder) == 3);
    CHECK(p.weight(Part::encoder, 0).rows() == 256);
    CHECK(p.weight(Part::encoder, 0).cols() == 64);
    CHECK(p.weight(Part::decoder, 2).rows() == 64);
}

TEST_CASE("high-rate shallow autoencoder can fit the data")
{
    ModelConfig cfg;
    cfg.latent = 64;
    cfg.bits_per_latent = 8;
    cfg.bits = 512;
    cfg.encoder_hidden = {};
    cfg.decoder_hidden = {};
    RngStream rng(10, 0);
    const ModelParams p0 = init_params(cfg, rng);
    const auto data = desk_csi(10, 10, 5);
    TrainConfig tc;
    tc.lr = 3e-3;
    tc.batch_size = 25;
    tc.retrain_steps = 1500;
    tc.eval_interval = 500;
    const TrainResult r = target_retrain(p0, cfg, data, tc, data);
    MESSAGE("fitted SGCS: " << r.log.final_eval());
    CHECK(r.log.final_eval() > 0.95);
}

TEST_CASE("checkpoints round-trip bit-exactly")
{
    const ModelConfig cfg;
    RngStream rng(11, 0);
    const ModelParams p = init_params(cfg, rng);
    const auto a = temp_path("a.ckpt"), b = temp_path("b.ckpt");
    save_checkpoint(a, cfg, p);
    save_checkpoint(b, cfg, p);
    CHECK(slurp(a) == slurp(b));
    const auto [cfg2, p2] = load_checkpoint(a);
    CHECK(cfg2.bits == cfg.bits);
    CHECK(cfg2.encoder_hidden == cfg.encoder_hidden);
    CHECK(cfg2.decoder_hidden == cfg.decoder_hidden);
    CHECK(cfg2.init_scale == cfg.init_scale);
    REQUIRE(p2.same_layout(p));
    CHECK(std::memcmp(p2.values().data(), p.values().data(), p.size() * sizeof(double)) == 0);

    {
        std::ofstream os(b, std::ios::binary | std::ios::trunc);
        os << "garbage";
    }
    try
    {
        (void)load_checkpoint(b);
        FAIL("expected Io");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::Io);
    }
    // Truncated file.
    const std::string full = slurp(a);
    {
        std::ofstream os(b, std::ios::binary | std::ios::trunc);
        os.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
    }
    CHECK_THROWS_AS(load_checkpoint(b), Error);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("model config validation")
{
    ModelConfig c;
    c.bits = 15;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ModelConfig{};
    c.bits_per_latent = 9;
    c.bits = 72;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ModelConfig{};
    c.encoder_hidden = {0};
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_NOTHROW(ModelConfig{}.validate());
}
