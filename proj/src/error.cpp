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

#include "csimeta/error.hpp"

namespace csimeta
{

const char *to_string(ErrorKind kind) noexcept
{
    switch (kind)
    {
    case ErrorKind::RankDeficient:
        return "RankDeficient";
    case ErrorKind::NotHermitian:
        return "NotHermitian";
    case ErrorKind::DelayOverflow:
        return "DelayOverflow";
    case ErrorKind::DegenerateColumn:
        return "DegenerateColumn";
    case ErrorKind::RetryExhausted:
        return "RetryExhausted";
    case ErrorKind::UnknownScheme:
        return "UnknownScheme";
    case ErrorKind::BadBitstreamLength:
        return "BadBitstreamLength";
    case ErrorKind::ZeroColumn:
        return "ZeroColumn";
    case ErrorKind::ShapeMismatch:
        return "ShapeMismatch";
    case ErrorKind::Validation:
        return "Validation";
    case ErrorKind::Io:
        return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &what)
    : std::runtime_error(what), kind_(kind)
{
}

} // namespace csimeta
