#pragma once

// Numeric CSV with a header row: comma separated, decimal point, no quoting
// beyond optional double quotes around header names.

#include <Eigen/Dense>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sscca/errors.hpp"
#include "sscca/sampling.hpp"

namespace sscca::harness {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "N/A" || s == "null";
}

}  // namespace detail

/// Parses CSV text. `source` names the input in error messages. Line and
/// column numbers are 1-based; the header is line 1.
inline Dataset parse_csv_dataset(std::istream& in, Eigen::Index split_col, const std::string& source = "<input>") {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty()) throw DataError(source + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> names;
  for (auto f : detail::split_fields(line)) {
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    names.emplace_back(f);
  }
  const auto p = static_cast<Eigen::Index>(names.size());

  std::vector<double> values;
  std::vector<std::string> missing;
  Eigen::Index rows = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (static_cast<Eigen::Index>(fields.size()) != p) {
      throw DataError(source + ": line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(p));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view f = fields[c];
      if (detail::is_missing(f)) {
        missing.push_back("line " + std::to_string(lineno) + " column " + std::to_string(c + 1));
        values.push_back(0.0);
        continue;
      }
      double v = 0.0;
      const char* first = f.data();
      if (!f.empty() && f.front() == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw DataError(source + ": cannot parse '" + std::string(f) + "' as a number at line " +
                        std::to_string(lineno) + " column " + std::to_string(c + 1));
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (!missing.empty()) {
    std::string msg = source + ": missing values at ";
    for (std::size_t k = 0; k < missing.size() && k < 20; ++k) msg += (k ? "; " : "") + missing[k];
    if (missing.size() > 20) msg += "; ... (" + std::to_string(missing.size()) + " in total)";
    throw DataError(msg);
  }
  if (rows == 0) throw DataError(source + ": zero data rows after the header");

  Dataset ds;
  ds.data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), rows, p);
  ds.split_col = split_col;
  ds.source = DataSource::File;
  ds.path = source;
  ds.column_names = std::move(names);
  if (split_col <= 0 || split_col >= p) {
    throw SpecError("split column " + std::to_string(split_col) + " must lie strictly between 0 and " +
                    std::to_string(p) + " (the number of columns)");
  }
  return ds;
}

inline Dataset load_csv_dataset(const std::filesystem::path& path, Eigen::Index split_col) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv_dataset(in, split_col, path.string());
}

}  // namespace sscca::harness
