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

#include "csimeta/model.hpp"

#include "csimeta/binio.hpp"
#include "csimeta/error.hpp"

#include <cmath>
#include <fstream>

namespace csimeta
{

namespace
{

constexpr char checkpoint_magic[5] = {'C', 'S', 'I', 'M', 'P'};
constexpr std::uint16_t checkpoint_version = 1;

struct Forward
{
    std::vector<Eigen::MatrixXd> enc; // enc[0] = input, enc[i + 1] = tanh(layer i)
    Eigen::MatrixXd decoder_in;       // quantized (or bypassed) latent
    std::vector<Eigen::MatrixXd> dec; // dec[0] = decoder_in, then hidden activations
    Eigen::MatrixXd out;              // linear output, 2 n_t n_sb x batch
};

Eigen::MatrixXd dequantized(const Eigen::MatrixXd &latent, std::size_t b)
{
    Eigen::MatrixXd q(latent.rows(), latent.cols());
    for (Eigen::Index i = 0; i < latent.size(); ++i)
        q.data()[i] = dequantize_level(quantize_level(latent.data()[i], b), b);
    return q;
}

Eigen::MatrixXd run_encoder(const ModelParams &p, const Eigen::MatrixXd &x, std::vector<Eigen::MatrixXd> *trace)
{
    Eigen::MatrixXd a = x;
    for (std::size_t i = 0; i < p.layers(Part::encoder); ++i)
    {
        if (trace)
            trace->push_back(a);
        Eigen::MatrixXd z = p.weight(Part::encoder, i) * a;
        z.colwise() += p.bias(Part::encoder, i);
        a = z.array().tanh().matrix();
    }
    if (trace)
        trace->push_back(a);
    return a;
}

Eigen::MatrixXd run_decoder(const ModelParams &p, const Eigen::MatrixXd &q, std::vector<Eigen::MatrixXd> *trace)
{
    Eigen::MatrixXd a = q;
    const std::size_t n = p.layers(Part::decoder);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (trace)
            trace->push_back(a);
        Eigen::MatrixXd z = p.weight(Part::decoder, i) * a;
        z.colwise() += p.bias(Part::decoder, i);
        a = (i + 1 < n) ? Eigen::MatrixXd(z.array().tanh().matrix()) : z;
    }
    return a;
}

Forward forward(const ModelParams &p, const ModelConfig &cfg, const Eigen::MatrixXd &x, QuantizerMode mode)
{
    Forward f;
    const Eigen::MatrixXd latent = run_encoder(p, x, &f.enc);
    f.decoder_in = mode == QuantizerMode::bypass ? latent : dequantized(latent, cfg.bits_per_latent);
    f.out = run_decoder(p, f.decoder_in, &f.dec);
    return f;
}

// Per-subband normalization of one decoder output column. A zero column maps
// to the uniform vector (no gradient flows through it).
ComplexMatrix normalize_output(const Eigen::Ref<const Eigen::VectorXd> &y, std::size_t n_t, std::size_t n_sb,
                               std::vector<double> *norms)
{
    ComplexMatrix u = unflatten_csi(y, n_t, n_sb);
    for (Eigen::Index l = 0; l < u.cols(); ++l)
    {
        const double n = u.col(l).norm();
        if (norms)
            norms->push_back(n);
        if (n > 0.0)
            u.col(l) /= n;
        else
            u.col(l).setConstant(cplx(1.0 / std::sqrt(static_cast<double>(n_t)), 0.0));
    }
    return u;
}

// SGCS ignores per-column phase, so the encoder sees every column rotated to
// the eigenvector phase convention. Meta-synthesized and simulated samples
// then share one input representation.
ComplexMatrix canonical_phase(const ComplexMatrix &w)
{
    ComplexMatrix out = w;
    for (Eigen::Index l = 0; l < out.cols(); ++l)
    {
        ComplexVector c = out.col(l);
        apply_phase_convention(c);
        out.col(l) = c;
    }
    return out;
}

Eigen::MatrixXd stack_inputs(std::span<const CsiEigen *const> batch, const ModelConfig &cfg)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(cfg.input_dim()), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i)
    {
        const ComplexMatrix &w = batch[i]->w;
        if (w.rows() != static_cast<Eigen::Index>(cfg.n_t) || w.cols() != static_cast<Eigen::Index>(cfg.n_sb))
            throw Error(ErrorKind::ShapeMismatch, "model input shape differs from n_t x n_sb");
        x.col(static_cast<Eigen::Index>(i)) = flatten_csi(canonical_phase(w));
    }
    return x;
}

void write_sizes(std::ostream &os, const std::vector<std::size_t> &v)
{
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(v.size()));
    for (std::size_t x : v)
        binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(x));
}

std::vector<std::size_t> read_sizes(std::istream &is)
{
    const auto n = binio::get<std::uint32_t>(is);
    if (n > 64)
        throw Error(ErrorKind::Io, "checkpoint: implausible layer count");
    std::vector<std::size_t> v(n);
    for (auto &x : v)
        x = binio::get<std::uint32_t>(is);
    return v;
}

} // namespace

void ModelConfig::validate() const
{
    auto invalid = [](const std::string &m) { throw Error(ErrorKind::Validation, m); };
    if (n_t == 0 || n_sb == 0)
        invalid("model.n_t and model.n_sb must be >= 1");
    if (latent == 0)
        invalid("model.latent must be >= 1");
    if (bits_per_latent < 1 || bits_per_latent > 8)
        invalid("model.bits_per_latent (" + std::to_string(bits_per_latent) + ") must be in [1, 8]");
    if (bits != latent * bits_per_latent)
        invalid("model.bits (" + std::to_string(bits) + ") must equal latent * bits_per_latent (" +
                std::to_string(latent * bits_per_latent) + ")");
    for (std::size_t w : encoder_hidden)
        if (w == 0)
            invalid("model.encoder_hidden widths must be >= 1");
    for (std::size_t w : decoder_hidden)
        if (w == 0)
            invalid("model.decoder_hidden widths must be >= 1");
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale))
        invalid("model.init_scale must be finite and >= 0");
}

ModelParams::ModelParams(const ModelConfig &cfg)
{
    std::size_t offset = 0;
    auto build = [&offset](std::vector<Slice> &out, std::vector<std::size_t> dims) {
        for (std::size_t i = 0; i + 1 < dims.size(); ++i)
        {
            out.push_back(Slice{dims[i + 1], dims[i], offset});
            offset += dims[i + 1] * dims[i] + dims[i + 1];
        }
    };
    std::vector<std::size_t> enc{cfg.input_dim()};
    enc.insert(enc.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
    enc.push_back(cfg.latent);
    std::vector<std::size_t> dec{cfg.latent};
    dec.insert(dec.end(), cfg.decoder_hidden.begin(), cfg.decoder_hidden.end());
    dec.push_back(cfg.input_dim());
    build(enc_, enc);
    build(dec_, dec);
    values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

Eigen::Map<Eigen::MatrixXd> ModelParams::weight(Part part, std::size_t layer)
{
    const Slice &s = slices(part).at(layer);
    return {values_.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols)};
}

Eigen::Map<const Eigen::MatrixXd> ModelParams::weight(Part part, std::size_t layer) const
{
    const Slice &s = slices(part).at(layer);
    return {values_.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols)};
}

Eigen::Map<Eigen::VectorXd> ModelParams::bias(Part part, std::size_t layer)
{
    const Slice &s = slices(part).at(layer);
    return {values_.data() + s.offset + s.rows * s.cols, static_cast<Eigen::Index>(s.rows)};
}

Eigen::Map<const Eigen::VectorXd> ModelParams::bias(Part part, std::size_t layer) const
{
    const Slice &s = slices(part).at(layer);
    return {values_.data() + s.offset + s.rows * s.cols, static_cast<Eigen::Index>(s.rows)};
}

bool ModelParams::same_layout(const ModelParams &other) const noexcept
{
    auto eq = [](const std::vector<Slice> &a, const std::vector<Slice> &b) {
        if (a.size() != b.size())
            return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].rows != b[i].rows || a[i].cols != b[i].cols || a[i].offset != b[i].offset)
                return false;
        return true;
    };
    return values_.size() == other.values_.size() && eq(enc_, other.enc_) && eq(dec_, other.dec_);
}

bool ModelParams::all_finite() const noexcept
{
    return values_.allFinite();
}

ModelParams init_params(const ModelConfig &cfg, RngStream &rng)
{
    cfg.validate();
    ModelParams p(cfg);
    for (Part part : {Part::encoder, Part::decoder})
    {
        for (std::size_t i = 0; i < p.layers(part); ++i)
        {
            auto w = p.weight(part, i);
            const double s = cfg.init_scale / std::sqrt(static_cast<double>(w.cols()));
            for (Eigen::Index k = 0; k < w.size(); ++k)
                w.data()[k] = s * (2.0 * rng.uniform() - 1.0);
        }
    }
    return p;
}

std::uint32_t quantize_level(double x, std::size_t bits_per_latent) noexcept
{
    const double levels = static_cast<double>(1u << bits_per_latent);
    const double v = std::floor((x + 1.0) / 2.0 * levels);
    if (!(v > 0.0))
        return 0;
    if (v >= levels - 1.0)
        return (1u << bits_per_latent) - 1u;
    return static_cast<std::uint32_t>(v);
}

double dequantize_level(std::uint32_t level, std::size_t bits_per_latent) noexcept
{
    const double levels = static_cast<double>(1u << bits_per_latent);
    return -1.0 + (static_cast<double>(level) + 0.5) * 2.0 / levels;
}

Bitstream pack_levels(const std::vector<std::uint32_t> &levels, std::size_t b)
{
    Bitstream bits;
    bits.reserve(levels.size() * b);
    for (std::uint32_t v : levels)
        for (std::size_t i = 0; i < b; ++i)
            bits.push_back(static_cast<std::uint8_t>((v >> (b - 1 - i)) & 1u));
    return bits;
}

std::vector<std::uint32_t> unpack_levels(const Bitstream &bits, std::size_t b)
{
    if (b == 0 || bits.size() % b != 0)
        throw Error(ErrorKind::BadBitstreamLength, "bitstream length is not a multiple of bits per latent");
    std::vector<std::uint32_t> levels(bits.size() / b, 0);
    for (std::size_t k = 0; k < levels.size(); ++k)
        for (std::size_t i = 0; i < b; ++i)
            levels[k] = (levels[k] << 1) | (bits[k * b + i] & 1u);
    return levels;
}

Eigen::VectorXd flatten_csi(const ComplexMatrix &w)
{
    const Eigen::Index nt = w.rows();
    const Eigen::Index nsb = w.cols();
    Eigen::VectorXd x(2 * nt * nsb);
    for (Eigen::Index l = 0; l < nsb; ++l)
        for (Eigen::Index t = 0; t < nt; ++t)
        {
            x(l * nt + t) = w(t, l).real();
            x(nt * nsb + l * nt + t) = w(t, l).imag();
        }
    return x;
}

ComplexMatrix unflatten_csi(const Eigen::VectorXd &x, std::size_t n_t, std::size_t n_sb)
{
    const auto nt = static_cast<Eigen::Index>(n_t);
    const auto nsb = static_cast<Eigen::Index>(n_sb);
    if (x.size() != 2 * nt * nsb)
        throw Error(ErrorKind::ShapeMismatch, "unflatten_csi: length differs from 2 n_t n_sb");
    ComplexMatrix w(nt, nsb);
    for (Eigen::Index l = 0; l < nsb; ++l)
        for (Eigen::Index t = 0; t < nt; ++t)
            w(t, l) = cplx(x(l * nt + t), x(nt * nsb + l * nt + t));
    return w;
}

Encoded encode(const ModelParams &params, const ModelConfig &cfg, const CsiEigen &w)
{
    const CsiEigen *one[] = {&w};
    const Eigen::MatrixXd x = stack_inputs(one, cfg);
    Encoded e;
    e.latent = run_encoder(params, x, nullptr).col(0);
    std::vector<std::uint32_t> levels(static_cast<std::size_t>(e.latent.size()));
    for (std::size_t k = 0; k < levels.size(); ++k)
        levels[k] = quantize_level(e.latent(static_cast<Eigen::Index>(k)), cfg.bits_per_latent);
    e.bits = pack_levels(levels, cfg.bits_per_latent);
    return e;
}

CsiEigen decode(const ModelParams &params, const ModelConfig &cfg, const Bitstream &bits)
{
    if (bits.size() != cfg.bits)
        throw Error(ErrorKind::BadBitstreamLength,
                    "bitstream has " + std::to_string(bits.size()) + " bits, expected " + std::to_string(cfg.bits));
    const std::vector<std::uint32_t> levels = unpack_levels(bits, cfg.bits_per_latent);
    Eigen::MatrixXd q(static_cast<Eigen::Index>(levels.size()), 1);
    for (std::size_t k = 0; k < levels.size(); ++k)
        q(static_cast<Eigen::Index>(k), 0) = dequantize_level(levels[k], cfg.bits_per_latent);
    const Eigen::MatrixXd y = run_decoder(params, q, nullptr);
    CsiEigen out;
    out.w = normalize_output(y.col(0), cfg.n_t, cfg.n_sb, nullptr);
    out.eigvals = RealVector::Zero(static_cast<Eigen::Index>(cfg.n_sb));
    return out;
}

ComplexMatrix reconstruct(const ModelParams &params, const ModelConfig &cfg, const ComplexMatrix &w,
                          QuantizerMode mode)
{
    CsiEigen tmp;
    tmp.w = w;
    const CsiEigen *one[] = {&tmp};
    const Forward f = forward(params, cfg, stack_inputs(one, cfg), mode);
    return normalize_output(f.out.col(0), cfg.n_t, cfg.n_sb, nullptr);
}

double sgcs(const ComplexMatrix &w, const ComplexMatrix &w_hat)
{
    if (w.rows() != w_hat.rows() || w.cols() != w_hat.cols() || w.cols() == 0)
        throw Error(ErrorKind::ShapeMismatch, "sgcs: shape mismatch");
    double total = 0.0;
    for (Eigen::Index l = 0; l < w.cols(); ++l)
    {
        const double a = w.col(l).squaredNorm();
        const double b = w_hat.col(l).squaredNorm();
        if (a == 0.0 || b == 0.0)
            throw Error(ErrorKind::ZeroColumn, "sgcs: zero column " + std::to_string(l));
        const double c = std::norm(w.col(l).dot(w_hat.col(l)));
        total += std::min(1.0, c / (a * b));
    }
    return total / static_cast<double>(w.cols());
}

LossGrad loss_and_grad(const ModelParams &params, const ModelConfig &cfg, std::span<const CsiEigen *const> batch,
                       QuantizerMode mode)
{
    if (batch.empty())
        throw Error(ErrorKind::ShapeMismatch, "loss_and_grad: empty batch");

    const Eigen::MatrixXd x = stack_inputs(batch, cfg);
    const Forward f = forward(params, cfg, x, mode);
    const auto nt = static_cast<Eigen::Index>(cfg.n_t);
    const auto nsb = static_cast<Eigen::Index>(cfg.n_sb);
    const double scale = -1.0 / (static_cast<double>(batch.size()) * static_cast<double>(cfg.n_sb));

    LossGrad out;
    out.grad = ModelParams(cfg);
    Eigen::MatrixXd d_out(f.out.rows(), f.out.cols());
    double total = 0.0;

    for (std::size_t i = 0; i < batch.size(); ++i)
    {
        const ComplexMatrix &w = batch[i]->w;
        std::vector<double> norms;
        const ComplexMatrix w_hat = normalize_output(f.out.col(static_cast<Eigen::Index>(i)), cfg.n_t, cfg.n_sb, &norms);
        ComplexMatrix g_u(nt, nsb);
        double rho = 0.0;
        for (Eigen::Index l = 0; l < nsb; ++l)
        {
            const double wn2 = w.col(l).squaredNorm();
            const cplx a = w.col(l).dot(w_hat.col(l)); // w^H w'
            rho += std::norm(a) / wn2;
            const double un = norms[static_cast<std::size_t>(l)];
            if (un == 0.0)
            {
                g_u.col(l).setZero();
                continue;
            }
            // d|w^H w'|^2 / d w' (real gradient packed as complex) ...
            const ComplexVector g = (2.0 / wn2) * a * w.col(l);
            // ... pulled back through w' = u / ||u||.
            const double radial = w_hat.col(l).dot(g).real();
            g_u.col(l) = (g - radial * w_hat.col(l)) / un;
        }
        total += rho / static_cast<double>(cfg.n_sb);
        d_out.col(static_cast<Eigen::Index>(i)) = scale * flatten_csi(g_u);
    }
    out.loss = -total / static_cast<double>(batch.size());

    // Decoder backward.
    Eigen::MatrixXd delta = d_out;
    for (std::size_t li = params.layers(Part::decoder); li-- > 0;)
    {
        const Eigen::MatrixXd &input = f.dec[li];
        out.grad.weight(Part::decoder, li).noalias() = delta * input.transpose();
        out.grad.bias(Part::decoder, li) = delta.rowwise().sum();
        Eigen::MatrixXd d_in = params.weight(Part::decoder, li).transpose() * delta;
        if (li > 0)
            delta = (d_in.array() * (1.0 - input.array().square())).matrix();
        else
            delta = std::move(d_in);
    }

    // Straight-through: the quantizer passes the gradient unchanged inside [-1, 1].
    const Eigen::MatrixXd &latent = f.enc.back();
    if (mode == QuantizerMode::straight_through)
        delta = (latent.array().abs() <= 1.0).select(delta, 0.0);

    for (std::size_t li = params.layers(Part::encoder); li-- > 0;)
    {
        const Eigen::MatrixXd &output = f.enc[li + 1];
        const Eigen::MatrixXd &input = f.enc[li];
        const Eigen::MatrixXd dz = (delta.array() * (1.0 - output.array().square())).matrix();
        out.grad.weight(Part::encoder, li).noalias() = dz * input.transpose();
        out.grad.bias(Part::encoder, li) = dz.rowwise().sum();
        if (li > 0)
            delta = params.weight(Part::encoder, li).transpose() * dz;
    }
    return out;
}

LossGrad loss_and_grad(const ModelParams &params, const ModelConfig &cfg, std::span<const CsiEigen> batch,
                       QuantizerMode mode)
{
    std::vector<const CsiEigen *> ptrs;
    ptrs.reserve(batch.size());
    for (const auto &s : batch)
        ptrs.push_back(&s);
    return loss_and_grad(params, cfg, std::span<const CsiEigen *const>(ptrs), mode);
}

void save_checkpoint(const std::filesystem::path &path, const ModelConfig &cfg, const ModelParams &params)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error(ErrorKind::Io, "cannot open checkpoint for writing: " + path.string());
    os.write(checkpoint_magic, sizeof(checkpoint_magic));
    binio::put<std::uint16_t>(os, checkpoint_version);
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.n_t));
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.n_sb));
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.bits));
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.latent));
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.bits_per_latent));
    binio::put<double>(os, cfg.init_scale);
    write_sizes(os, cfg.encoder_hidden);
    write_sizes(os, cfg.decoder_hidden);
    binio::put<std::uint64_t>(os, params.size());
    for (Eigen::Index i = 0; i < params.values().size(); ++i)
        binio::put<double>(os, params.values()(i));
    if (!os)
        throw Error(ErrorKind::Io, "failed writing checkpoint: " + path.string());
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorKind::Io, "cannot open checkpoint: " + path.string());
    char magic[5];
    is.read(magic, sizeof(magic));
    if (!is || std::string(magic, 5) != std::string(checkpoint_magic, 5))
        throw Error(ErrorKind::Io, "not a checkpoint file: " + path.string());
    if (binio::get<std::uint16_t>(is) != checkpoint_version)
        throw Error(ErrorKind::Io, "unsupported checkpoint version: " + path.string());
    ModelConfig cfg;
    cfg.n_t = binio::get<std::uint32_t>(is);
    cfg.n_sb = binio::get<std::uint32_t>(is);
    cfg.bits = binio::get<std::uint32_t>(is);
    cfg.latent = binio::get<std::uint32_t>(is);
    cfg.bits_per_latent = binio::get<std::uint32_t>(is);
    cfg.init_scale = binio::get<double>(is);
    cfg.encoder_hidden = read_sizes(is);
    cfg.decoder_hidden = read_sizes(is);
    try
    {
        cfg.validate();
    }
    catch (const Error &e)
    {
        throw Error(ErrorKind::Io, std::string("checkpoint header invalid: ") + e.what());
    }
    ModelParams params(cfg);
    if (binio::get<std::uint64_t>(is) != params.size())
        throw Error(ErrorKind::Io, "checkpoint parameter count does not match its header");
    for (Eigen::Index i = 0; i < params.values().size(); ++i)
        params.values()(i) = binio::get<double>(is);
    return {cfg, std::move(params)};
}

} // namespace csimeta
