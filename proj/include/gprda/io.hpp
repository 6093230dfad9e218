#pragma once

// File helpers: little-endian float blobs, CSV tables and JSON documents.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gprda/error.hpp"
#include "json.hpp"

namespace gprda::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace detail {

template <typename UInt>
UInt to_little(UInt v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    UInt r = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      r = (r << 8) | (v & 0xff);
      v >>= 8;
    }
    return r;
  }
}

}  // namespace detail

inline void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

/// Writes values as little-endian IEEE-754 binary32.
inline void write_f32(const fs::path& path, const std::vector<double>& values) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (double v : values) {
    const auto bits = detail::to_little(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<double> read_f32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing file " + path.string());
  std::vector<double> values;
  std::uint32_t bits;
  while (in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
    values.push_back(static_cast<double>(std::bit_cast<float>(detail::to_little(bits))));
  }
  return values;
}

/// Writes values as little-endian IEEE-754 binary64.
inline void write_f64(const fs::path& path, const std::vector<double>& values) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (double v : values) {
    const auto bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<double> read_f64(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing file " + path.string());
  std::vector<double> values;
  std::uint64_t bits;
  while (in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
    values.push_back(std::bit_cast<double>(detail::to_little(bits)));
  }
  return values;
}

/// Shortest round-trip decimal form, locale independent.
inline std::string format_double(double v) {
  char buf[40];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw IoError("CSV has no column '" + name + "'");
  }
};

inline void write_csv(const fs::path& path, const CsvTable& t) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  if (!out) throw IoError("write failed: " + path.string());
}

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("missing file " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline void write_json(const fs::path& path, const Json& j) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("missing file " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

/// 64-bit FNV-1a, used for config fingerprints.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace gprda::io
