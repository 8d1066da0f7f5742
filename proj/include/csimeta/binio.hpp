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

#include "csimeta/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

namespace csimeta::binio
{

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) noexcept
{
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big)
    {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <typename T>
void put(std::ostream &os, T v)
{
    v = to_little(v);
    os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T get(std::istream &is)
{
    T v{};
    is.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!is)
        throw Error(ErrorKind::Io, "unexpected end of file");
    return to_little(v);
}

inline void put_string(std::ostream &os, const std::string &s)
{
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream &is, std::uint32_t max_len = 1u << 26)
{
    const auto n = get<std::uint32_t>(is);
    if (n > max_len)
        throw Error(ErrorKind::Io, "string field too long");
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is)
        throw Error(ErrorKind::Io, "unexpected end of file");
    return s;
}

} // namespace csimeta::binio
