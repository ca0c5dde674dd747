// Copyright 2026 The crossrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Output tables: CSV with locale-independent 9-significant-digit numbers,
// JSON documents, and the run manifest every data file points to.

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "crossrate/errors.hpp"

namespace crossrate {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

/// %.9g-style output, independent of the C locale.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  if (r.ec != std::errc()) throw ArgumentError("format_number: conversion failed");
  return std::string(buf, r.ptr);
}

/// Table with a fixed header; cells are stored already formatted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  class Row {
   public:
    Row& num(double v) {
      cells_.push_back(format_number(v));
      return *this;
    }
    Row& integer(long long v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& text(std::string v) {
      cells_.push_back(std::move(v));
      return *this;
    }

   private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  Row& row() { return rows_.emplace_back(); }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  /// First line is "# manifest=<name>", then the header, then the rows.
  std::string render(const std::string& manifest) const {
    std::string out = "# manifest=" + manifest + "\n";
    append_line(out, columns_);
    for (const Row& r : rows_) {
      if (r.cells_.size() != columns_.size()) {
        throw ArgumentError("CsvTable: row width does not match the header");
      }
      append_line(out, r.cells_);
    }
    return out;
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> columns_;
  std::vector<Row> rows_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to " + path.string() + " failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read from " + path.string() + " failed");
  return text;
}

inline std::string render_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

/// Record of one CLI invocation.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config;   // fully materialized
  nlohmann::ordered_json options;  // subcommand flags
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> outputs;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  double duration_s = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["version"] = kToolVersion;
    j["seed"] = seed;
    j["threads"] = threads;
    j["config"] = config;
    j["options"] = options;
    j["outputs"] = outputs;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    j["duration_s"] = duration_s;
    return j;
  }
};

}  // namespace crossrate
