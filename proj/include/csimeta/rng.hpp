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

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace csimeta
{

// Counter-based random stream. Value i of the stream is a keyed hash of
// (seed, stream_id, i), so streams can be created in any order on any worker
// and still reproduce the same sequence. Satisfies UniformRandomBitGenerator.
class RngStream
{
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept;

    double uniform() noexcept; // [0, 1)
    double normal();           // N(0, 1)
    std::size_t uniform_index(std::size_t n); // [0, n), n >= 1

    // Independent stream keyed by (seed, stream_id, tag).
    RngStream child(std::uint64_t tag) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t position() const noexcept { return position_; }
    void reset() noexcept { position_ = 0; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t position_ = 0;
    std::uint64_t key_lo_;
    std::uint64_t key_hi_;
};

// Hashes a tuple of identifiers (purpose, task, UE, slot, ...) into a stream id.
std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) noexcept;

// Purpose tags used as the first component of stream_key().
namespace purpose
{
inline constexpr std::uint64_t bases = 0x62617365;
inline constexpr std::uint64_t task = 0x7461736b;
inline constexpr std::uint64_t slot = 0x736c6f74;
inline constexpr std::uint64_t target = 0x74617267;
inline constexpr std::uint64_t evaluation = 0x6576616c;
inline constexpr std::uint64_t augment = 0x6175676d;
inline constexpr std::uint64_t baseline = 0x62617365 + 1;
inline constexpr std::uint64_t init = 0x696e6974;
inline constexpr std::uint64_t train = 0x7472616e;
inline constexpr std::uint64_t shuffle = 0x73687566;
} // namespace purpose

// Uniform sampling of k distinct elements of pool without replacement.
// Returned in ascending order.
std::vector<std::size_t> sample_without_replacement(RngStream &rng, const std::vector<std::size_t> &pool,
                                                    std::size_t k);

// Convenience: the pool {0, ..., n-1}.
std::vector<std::size_t> index_range(std::size_t n);

} // namespace csimeta
