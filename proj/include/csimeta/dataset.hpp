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

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace csimeta
{

// Binary dataset container.
//
// header: "CSIDS", u16 version, u8 kind, u32 dims[3], u64 count, u64 seed,
//         u32-prefixed config echo
// record: u32 ue_id, u32 slot, u8 origin, u32 task_id,
//         [csi only] f64 eigvals[n_sb],
//         f64 re/im pairs (time: tap-major then row-major r x t; csi: row-major t x l)
// All values little-endian.
enum class RecordKind : std::uint8_t
{
    time_channel = 0,
    csi_eigen = 1,
};

struct DatasetHeader
{
    RecordKind kind = RecordKind::csi_eigen;
    std::array<std::uint32_t, 3> dims{}; // time: n_r, n_t, n_d; csi: n_t, n_sb, 0
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    std::string config; // full config echo
};

inline constexpr std::uint16_t dataset_version = 1;

// Streaming writer; the record count is patched into the header on close().
class DatasetWriter
{
public:
    DatasetWriter(const std::filesystem::path &path, DatasetHeader header);
    ~DatasetWriter();
    DatasetWriter(const DatasetWriter &) = delete;
    DatasetWriter &operator=(const DatasetWriter &) = delete;

    void write(const TimeChannel &h);
    void write(const CsiEigen &w);
    void close();
    std::uint64_t written() const noexcept { return count_; }

private:
    void begin_record(const Provenance &p);

    std::filesystem::path path_;
    DatasetHeader header_;
    std::ofstream os_;
    std::uint64_t count_ = 0;
    bool closed_ = false;
};

class DatasetReader
{
public:
    explicit DatasetReader(const std::filesystem::path &path);

    const DatasetHeader &header() const noexcept { return header_; }
    std::uint64_t remaining() const noexcept { return header_.count - read_; }

    // Both throw Io on kind mismatch, truncation or trailing bytes.
    bool next(TimeChannel &h);
    bool next(CsiEigen &w);

private:
    Provenance read_provenance();
    void check_end();

    std::filesystem::path path_;
    DatasetHeader header_;
    std::ifstream is_;
    std::uint64_t read_ = 0;
};

void write_channels(const std::filesystem::path &path, std::span<const TimeChannel> data, const SystemConfig &sys,
                    std::uint64_t seed, const std::string &config);
std::vector<TimeChannel> read_channels(const std::filesystem::path &path, DatasetHeader *header = nullptr);

void write_csi(const std::filesystem::path &path, std::span<const CsiEigen> data, std::uint64_t seed,
               const std::string &config);
std::vector<CsiEigen> read_csi(const std::filesystem::path &path, DatasetHeader *header = nullptr);

// Splits a meta-environment dataset back into tasks (contiguous task ids 0..T-1).
std::vector<std::vector<CsiEigen>> group_by_task(std::vector<CsiEigen> samples);

// Groups time channels by UE id, keeping slot order; UEs in ascending id.
std::vector<std::vector<TimeChannel>> group_by_ue(std::span<const TimeChannel> data);

} // namespace csimeta
