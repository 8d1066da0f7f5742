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

#include "csimeta/channel.hpp"
#include "csimeta/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace csimeta
{

// Quantized MLP autoencoder for n_t x n_sb CSI eigenvectors.
//
// encoder: 2 n_t n_sb -> hidden... -> latent, tanh after every layer
// quantizer: each latent scalar to bits_per_latent bits (uniform midrise on [-1, 1])
// decoder: latent -> hidden... (tanh) -> 2 n_t n_sb (linear) -> per-subband l2 normalization
struct ModelConfig
{
    std::size_t n_t = 8;
    std::size_t n_sb = 4;
    std::size_t bits = 16;           // B
    std::size_t latent = 8;          // D_lat
    std::size_t bits_per_latent = 2; // b_q
    std::vector<std::size_t> encoder_hidden{256, 128};
    std::vector<std::size_t> decoder_hidden{128, 256};
    double init_scale = 1.0; // weights ~ U[-s, s], s = init_scale / sqrt(fan_in)

    std::size_t input_dim() const noexcept { return 2 * n_t * n_sb; }
    void validate() const; // throws Validation
};

enum class Part
{
    encoder,
    decoder,
};

// All trainable values in one contiguous vector; layers are views into it.
// Weights are stored column-major (out x in), followed by the bias.
class ModelParams
{
public:
    ModelParams() = default;
    explicit ModelParams(const ModelConfig &cfg); // zero-initialized

    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    std::size_t layers(Part part) const noexcept { return slices(part).size(); }

    Eigen::VectorXd &values() noexcept { return values_; }
    const Eigen::VectorXd &values() const noexcept { return values_; }

    Eigen::Map<Eigen::MatrixXd> weight(Part part, std::size_t layer);
    Eigen::Map<const Eigen::MatrixXd> weight(Part part, std::size_t layer) const;
    Eigen::Map<Eigen::VectorXd> bias(Part part, std::size_t layer);
    Eigen::Map<const Eigen::VectorXd> bias(Part part, std::size_t layer) const;

    bool same_layout(const ModelParams &other) const noexcept;
    bool all_finite() const noexcept;

private:
    struct Slice
    {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::size_t offset = 0; // weight first, then rows bias entries
    };
    const std::vector<Slice> &slices(Part part) const noexcept { return part == Part::encoder ? enc_ : dec_; }

    std::vector<Slice> enc_;
    std::vector<Slice> dec_;
    Eigen::VectorXd values_;
};

using Bitstream = std::vector<std::uint8_t>; // one 0/1 entry per bit

enum class QuantizerMode
{
    straight_through, // quantize forward, identity backward
    bypass,           // no quantization at all
};

ModelParams init_params(const ModelConfig &cfg, RngStream &rng);

// Midrise quantizer: level = floor((x + 1) / 2 * 2^b) clamped to [0, 2^b - 1].
std::uint32_t quantize_level(double x, std::size_t bits_per_latent) noexcept;
double dequantize_level(std::uint32_t level, std::size_t bits_per_latent) noexcept; // cell midpoint

// Concatenated big-endian level indices.
Bitstream pack_levels(const std::vector<std::uint32_t> &levels, std::size_t bits_per_latent);
std::vector<std::uint32_t> unpack_levels(const Bitstream &bits, std::size_t bits_per_latent);

// Real parts then imaginary parts, column-major over subbands.
Eigen::VectorXd flatten_csi(const ComplexMatrix &w);
ComplexMatrix unflatten_csi(const Eigen::VectorXd &x, std::size_t n_t, std::size_t n_sb);

struct Encoded
{
    Eigen::VectorXd latent;
    Bitstream bits;
};

Encoded encode(const ModelParams &params, const ModelConfig &cfg, const CsiEigen &w);
CsiEigen decode(const ModelParams &params, const ModelConfig &cfg, const Bitstream &bits);

// Full autoencoder pass W -> W'.
ComplexMatrix reconstruct(const ModelParams &params, const ModelConfig &cfg, const ComplexMatrix &w,
                          QuantizerMode mode = QuantizerMode::straight_through);

// Squared generalized cosine similarity averaged over subbands.
// Throws ZeroColumn if any column of either argument is zero.
double sgcs(const ComplexMatrix &w, const ComplexMatrix &w_hat);

struct LossGrad
{
    double loss = 0.0; // -mean SGCS over the batch
    ModelParams grad;
};

LossGrad loss_and_grad(const ModelParams &params, const ModelConfig &cfg, std::span<const CsiEigen *const> batch,
                       QuantizerMode mode = QuantizerMode::straight_through);
LossGrad loss_and_grad(const ModelParams &params, const ModelConfig &cfg, std::span<const CsiEigen> batch,
                       QuantizerMode mode = QuantizerMode::straight_through);

// Versioned binary checkpoint: ModelConfig header plus the flat parameter vector.
void save_checkpoint(const std::filesystem::path &path, const ModelConfig &cfg, const ModelParams &params);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path &path);

} // namespace csimeta
