#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dsb/ddp_core.hpp"
#include "dsb/errors.hpp"

namespace dsb {

// Shortest round-trip decimal representation; deterministic, '.' separator,
// exponent notation kicks in below 1e-4 as the CSV contract asks.
inline std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

inline std::string format_u64(std::uint64_t v) { return std::to_string(v); }

// RFC-style CSV field quoting.
inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ",";
    out += csv_quote(fields[i]);
  }
  out += "\n";
  return out;
}

// Artifacts land under a temp name and are renamed on completion, so a
// crashed run never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Path-dump table: one row per (location, atom) with the location index, the
// index-space coordinates, the atom coordinates, and the (renormalized)
// weight.
inline std::string measure_field_table(const MeasureField& field) {
  std::string out;
  const std::size_t p = field.locations->dim();
  const int d = field.measures.empty() ? 0 : field.measures.front().dim();
  std::vector<std::string> header{"loc_index"};
  for (std::size_t a = 0; a < p; ++a) header.push_back("x" + std::to_string(a));
  for (int j = 0; j < d; ++j) header.push_back("theta" + std::to_string(j));
  header.push_back("weight");
  out += csv_row(header);
  for (std::size_t l = 0; l < field.measures.size(); ++l) {
    const DiscreteMeasure& m = field.measures[l];
    const IndexPoint& x = field.locations->point(l);
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      std::vector<std::string> row{std::to_string(l)};
      for (std::size_t a = 0; a < p; ++a) row.push_back(format_double(x[a]));
      for (int j = 0; j < d; ++j) row.push_back(format_double(m.atoms[i](j)));
      row.push_back(format_double(m.weights(static_cast<Eigen::Index>(i))));
      out += csv_row(row);
    }
  }
  return out;
}

inline void write_measure_field(std::ostream& os, const MeasureField& field) {
  os << measure_field_table(field);
}

}  // namespace dsb
