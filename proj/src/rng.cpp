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

#include "csimeta/rng.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace csimeta
{

namespace
{

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id)
{
    key_lo_ = mix64(seed ^ mix64(stream_id + golden));
    key_hi_ = mix64(key_lo_ ^ (stream_id * 0xd1b54a32d192ed03ULL) ^ 0x5851f42d4c957f2dULL);
}

RngStream::result_type RngStream::operator()() noexcept
{
    // Two keyed rounds over the counter; no lattice overlap between streams.
    const std::uint64_t c = position_++;
    return mix64(mix64(c * golden + key_lo_) ^ key_hi_);
}

double RngStream::uniform() noexcept
{
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal()
{
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(*this);
}

std::size_t RngStream::uniform_index(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("uniform_index: empty range");
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(*this);
}

RngStream RngStream::child(std::uint64_t tag) const noexcept
{
    return RngStream(seed_, mix64(stream_id_ ^ mix64(tag ^ golden)));
}

std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (std::uint64_t p : parts)
        h = mix64(h ^ mix64(p + golden));
    return h;
}

std::vector<std::size_t> sample_without_replacement(RngStream &rng, const std::vector<std::size_t> &pool,
                                                    std::size_t k)
{
    if (k > pool.size())
        throw std::invalid_argument("sample_without_replacement: k exceeds pool size");
    std::vector<std::size_t> work(pool);
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i)
    {
        const std::size_t j = i + rng.uniform_index(work.size() - i);
        std::swap(work[i], work[j]);
    }
    work.resize(k);
    std::sort(work.begin(), work.end());
    return work;
}

std::vector<std::size_t> index_range(std::size_t n)
{
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = i;
    return r;
}

} // namespace csimeta
