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

#include "csimeta/dataset.hpp"

#include "csimeta/binio.hpp"
#include "csimeta/error.hpp"

#include <map>

namespace csimeta
{

namespace
{

constexpr char magic[5] = {'C', 'S', 'I', 'D', 'S'};
constexpr std::streamoff count_offset = 5 + 2 + 1 + 12;

void put_cplx(std::ostream &os, cplx z)
{
    binio::put<double>(os, z.real());
    binio::put<double>(os, z.imag());
}

cplx get_cplx(std::istream &is)
{
    const double re = binio::get<double>(is);
    const double im = binio::get<double>(is);
    return {re, im};
}

Origin checked_origin(std::uint8_t v)
{
    if (v > static_cast<std::uint8_t>(Origin::baseline_augmented))
        throw Error(ErrorKind::Io, "dataset: unknown origin tag " + std::to_string(v));
    return static_cast<Origin>(v);
}

} // namespace

DatasetWriter::DatasetWriter(const std::filesystem::path &path, DatasetHeader header)
    : path_(path), header_(std::move(header)), os_(path, std::ios::binary | std::ios::trunc)
{
    if (!os_)
        throw Error(ErrorKind::Io, "cannot open dataset for writing: " + path.string());
    os_.write(magic, sizeof(magic));
    binio::put<std::uint16_t>(os_, dataset_version);
    binio::put<std::uint8_t>(os_, static_cast<std::uint8_t>(header_.kind));
    for (auto d : header_.dims)
        binio::put<std::uint32_t>(os_, d);
    binio::put<std::uint64_t>(os_, 0);
    binio::put<std::uint64_t>(os_, header_.seed);
    binio::put_string(os_, header_.config);
}

DatasetWriter::~DatasetWriter()
{
    if (!closed_)
    {
        try
        {
            close();
        }
        catch (...)
        {
        }
    }
}

void DatasetWriter::begin_record(const Provenance &p)
{
    if (closed_)
        throw Error(ErrorKind::Io, "dataset writer already closed");
    binio::put<std::uint32_t>(os_, p.ue_id);
    binio::put<std::uint32_t>(os_, p.slot);
    binio::put<std::uint8_t>(os_, static_cast<std::uint8_t>(p.origin));
    binio::put<std::uint32_t>(os_, p.task_id);
}

void DatasetWriter::write(const TimeChannel &h)
{
    if (header_.kind != RecordKind::time_channel)
        throw Error(ErrorKind::ShapeMismatch, "dataset: time-channel record written to a CSI file");
    const auto [n_r, n_t, n_d] = header_.dims;
    if (h.taps.size() != n_d)
        throw Error(ErrorKind::ShapeMismatch, "dataset: channel tap count differs from header");
    for (const auto &tap : h.taps)
        if (tap.rows() != static_cast<Eigen::Index>(n_r) || tap.cols() != static_cast<Eigen::Index>(n_t))
            throw Error(ErrorKind::ShapeMismatch, "dataset: channel tap shape differs from header");
    begin_record(Provenance{h.ue_id, h.slot, Origin::simulated, no_task});
    for (const auto &tap : h.taps)
        for (Eigen::Index r = 0; r < tap.rows(); ++r)
            for (Eigen::Index t = 0; t < tap.cols(); ++t)
                put_cplx(os_, tap(r, t));
    ++count_;
}

void DatasetWriter::write(const CsiEigen &w)
{
    if (header_.kind != RecordKind::csi_eigen)
        throw Error(ErrorKind::ShapeMismatch, "dataset: CSI record written to a time-channel file");
    const auto n_t = static_cast<Eigen::Index>(header_.dims[0]);
    const auto n_sb = static_cast<Eigen::Index>(header_.dims[1]);
    if (w.w.rows() != n_t || w.w.cols() != n_sb || w.eigvals.size() != n_sb)
        throw Error(ErrorKind::ShapeMismatch, "dataset: CSI shape differs from header");
    begin_record(w.prov);
    for (Eigen::Index l = 0; l < n_sb; ++l)
        binio::put<double>(os_, w.eigvals(l));
    for (Eigen::Index t = 0; t < n_t; ++t)
        for (Eigen::Index l = 0; l < n_sb; ++l)
            put_cplx(os_, w.w(t, l));
    ++count_;
}

void DatasetWriter::close()
{
    if (closed_)
        return;
    closed_ = true;
    os_.seekp(count_offset);
    binio::put<std::uint64_t>(os_, count_);
    os_.close();
    if (!os_)
        throw Error(ErrorKind::Io, "failed writing dataset: " + path_.string());
}

DatasetReader::DatasetReader(const std::filesystem::path &path) : path_(path), is_(path, std::ios::binary)
{
    if (!is_)
        throw Error(ErrorKind::Io, "cannot open dataset: " + path.string());
    try
    {
        char m[5];
        is_.read(m, sizeof(m));
        if (!is_ || std::string(m, 5) != std::string(magic, 5))
            throw Error(ErrorKind::Io, "bad magic");
        if (binio::get<std::uint16_t>(is_) != dataset_version)
            throw Error(ErrorKind::Io, "unsupported version");
        const auto kind = binio::get<std::uint8_t>(is_);
        if (kind > 1)
            throw Error(ErrorKind::Io, "unknown record kind");
        header_.kind = static_cast<RecordKind>(kind);
        for (auto &d : header_.dims)
            d = binio::get<std::uint32_t>(is_);
        header_.count = binio::get<std::uint64_t>(is_);
        header_.seed = binio::get<std::uint64_t>(is_);
        header_.config = binio::get_string(is_);
    }
    catch (const Error &e)
    {
        throw Error(ErrorKind::Io, "dataset " + path.string() + ": " + e.what());
    }
    if (header_.count == 0)
        check_end();
}

Provenance DatasetReader::read_provenance()
{
    Provenance p;
    p.ue_id = binio::get<std::uint32_t>(is_);
    p.slot = binio::get<std::uint32_t>(is_);
    p.origin = checked_origin(binio::get<std::uint8_t>(is_));
    p.task_id = binio::get<std::uint32_t>(is_);
    return p;
}

void DatasetReader::check_end()
{
    if (is_.peek() != std::char_traits<char>::eof())
        throw Error(ErrorKind::Io, "dataset " + path_.string() + ": body longer than declared record count");
}

bool DatasetReader::next(TimeChannel &h)
{
    if (header_.kind != RecordKind::time_channel)
        throw Error(ErrorKind::Io, "dataset " + path_.string() + " does not hold time-channel records");
    if (read_ == header_.count)
        return false;
    try
    {
        const auto [n_r, n_t, n_d] = header_.dims;
        const Provenance p = read_provenance();
        h.ue_id = p.ue_id;
        h.slot = p.slot;
        h.taps.assign(n_d, ComplexMatrix(n_r, n_t));
        for (auto &tap : h.taps)
            for (Eigen::Index r = 0; r < tap.rows(); ++r)
                for (Eigen::Index t = 0; t < tap.cols(); ++t)
                    tap(r, t) = get_cplx(is_);
    }
    catch (const Error &e)
    {
        throw Error(ErrorKind::Io, "dataset " + path_.string() + ": truncated body (" + e.what() + ")");
    }
    if (++read_ == header_.count)
        check_end();
    return true;
}

bool DatasetReader::next(CsiEigen &w)
{
    if (header_.kind != RecordKind::csi_eigen)
        throw Error(ErrorKind::Io, "dataset " + path_.string() + " does not hold CSI records");
    if (read_ == header_.count)
        return false;
    try
    {
        const auto n_t = static_cast<Eigen::Index>(header_.dims[0]);
        const auto n_sb = static_cast<Eigen::Index>(header_.dims[1]);
        w.prov = read_provenance();
        w.eigvals.resize(n_sb);
        for (Eigen::Index l = 0; l < n_sb; ++l)
            w.eigvals(l) = binio::get<double>(is_);
        w.w.resize(n_t, n_sb);
        for (Eigen::Index t = 0; t < n_t; ++t)
            for (Eigen::Index l = 0; l < n_sb; ++l)
                w.w(t, l) = get_cplx(is_);
    }
    catch (const Error &e)
    {
        throw Error(ErrorKind::Io, "dataset " + path_.string() + ": truncated body (" + e.what() + ")");
    }
    if (++read_ == header_.count)
        check_end();
    return true;
}

void write_channels(const std::filesystem::path &path, std::span<const TimeChannel> data, const SystemConfig &sys,
                    std::uint64_t seed, const std::string &config)
{
    DatasetHeader h;
    h.kind = RecordKind::time_channel;
    h.dims = {static_cast<std::uint32_t>(sys.n_r), static_cast<std::uint32_t>(sys.n_t),
              static_cast<std::uint32_t>(sys.n_d)};
    h.seed = seed;
    h.config = config;
    DatasetWriter w(path, h);
    for (const auto &x : data)
        w.write(x);
    w.close();
}

std::vector<TimeChannel> read_channels(const std::filesystem::path &path, DatasetHeader *header)
{
    DatasetReader r(path);
    if (header)
        *header = r.header();
    std::vector<TimeChannel> out;
    out.reserve(r.header().count);
    TimeChannel h;
    while (r.next(h))
        out.push_back(h);
    return out;
}

void write_csi(const std::filesystem::path &path, std::span<const CsiEigen> data, std::uint64_t seed,
               const std::string &config)
{
    if (data.empty())
        throw Error(ErrorKind::Validation, "refusing to write an empty CSI dataset");
    DatasetHeader h;
    h.kind = RecordKind::csi_eigen;
    h.dims = {static_cast<std::uint32_t>(data[0].w.rows()), static_cast<std::uint32_t>(data[0].w.cols()), 0};
    h.seed = seed;
    h.config = config;
    DatasetWriter w(path, h);
    for (const auto &x : data)
        w.write(x);
    w.close();
}

std::vector<CsiEigen> read_csi(const std::filesystem::path &path, DatasetHeader *header)
{
    DatasetReader r(path);
    if (header)
        *header = r.header();
    std::vector<CsiEigen> out;
    out.reserve(r.header().count);
    CsiEigen w;
    while (r.next(w))
        out.push_back(w);
    return out;
}

std::vector<std::vector<CsiEigen>> group_by_task(std::vector<CsiEigen> samples)
{
    std::vector<std::vector<CsiEigen>> tasks;
    for (auto &s : samples)
    {
        const std::uint32_t id = s.prov.task_id;
        if (id == no_task)
            throw Error(ErrorKind::Io, "meta-environment record without task id");
        if (id >= tasks.size())
        {
            if (id > samples.size())
                throw Error(ErrorKind::Io, "meta-environment task id out of range");
            tasks.resize(id + 1);
        }
        tasks[id].push_back(std::move(s));
    }
    for (std::size_t j = 0; j < tasks.size(); ++j)
        if (tasks[j].empty())
            throw Error(ErrorKind::Io, "meta-environment task " + std::to_string(j) + " has no samples");
    return tasks;
}

std::vector<std::vector<TimeChannel>> group_by_ue(std::span<const TimeChannel> data)
{
    std::map<std::uint32_t, std::vector<TimeChannel>> by_ue;
    for (const auto &h : data)
        by_ue[h.ue_id].push_back(h);
    std::vector<std::vector<TimeChannel>> out;
    out.reserve(by_ue.size());
    for (auto &[id, v] : by_ue)
        out.push_back(std::move(v));
    return out;
}

} // namespace csimeta
