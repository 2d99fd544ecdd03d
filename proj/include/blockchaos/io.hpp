// Copyright 2026 The blockchaos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats and small utilities shared by the runner and the CLI:
// little-endian binary spectra, atomic writes, RFC-4180 CSV, stable hashes.

#pragma once

#include <array>
#include <atomic>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "json.hpp"

#include "blockchaos/errors.hpp"

namespace blockchaos::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for a named sub-stream of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept {
    return splitmix64(master ^ splitmix64(fnv1a64(tag)));
}

inline std::string hex64(std::uint64_t v) {
    std::array<char, 17> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + 16, v, 16);
    std::string s(buf.data(), end);
    return std::string(16 - s.size(), '0') + s;
}

/// Shortest decimal that round-trips.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf.data(), end);
}

inline std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Writes to a sibling temporary and renames over the target, so readers
/// never see a partial file.
inline void atomic_write(const fs::path &path, std::string_view content) {
    static std::atomic<std::uint64_t> counter{0};
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += ".tmp." + hex64(splitmix64(tid ^ counter.fetch_add(1)));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

/// Array of 8-byte IEEE-754 doubles, little-endian, no header.
inline std::string encode_doubles_le(std::span<const double> values) {
    std::string out(values.size() * 8, '\0');
    for (std::size_t k = 0; k < values.size(); ++k) {
        auto bits = std::bit_cast<std::uint64_t>(values[k]);
        for (int b = 0; b < 8; ++b) out[k * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFU);
    }
    return out;
}

inline std::vector<double> decode_doubles_le(std::string_view bytes) {
    if (bytes.size() % 8 != 0) throw ValidationError("binary spectrum length is not a multiple of 8");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= std::uint64_t{static_cast<unsigned char>(bytes[k * 8 + b])} << (8 * b);
        out[k] = std::bit_cast<double>(bits);
    }
    return out;
}

inline void write_doubles(const fs::path &path, std::span<const double> values) {
    atomic_write(path, encode_doubles_le(values));
}

inline std::vector<double> read_doubles(const fs::path &path) { return decode_doubles_le(read_file(path)); }

inline json read_json(const fs::path &path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

/// Stable serialisation: sorted keys (nlohmann objects are ordered maps), two-space indent.
inline std::string dump_json(const json &j) { return j.dump(2) + "\n"; }

/// RFC-4180 CSV: CRLF records, fields quoted when they contain a comma,
/// quote, CR or LF, embedded quotes doubled.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

    void row(const std::vector<std::string> &fields) {
        if (fields.size() != columns_) throw ValidationError("CSV row has wrong number of fields");
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) out_ << ',';
            out_ << quote(fields[k]);
        }
        out_ << "\r\n";
    }

    std::string str() const { return out_.str(); }

    static std::string quote(std::string_view f) {
        if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
        std::string q = "\"";
        for (char c : f) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

  private:
    std::size_t columns_;
    std::ostringstream out_;
};

}  // namespace blockchaos::io
