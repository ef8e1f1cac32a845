#pragma once

// Result tables (values x100, one decimal) and the lossless aggregates CSV.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sscca/errors.hpp"
#include "sscca/harness/experiment.hpp"

namespace sscca::harness {

enum class TableFormat { Csv, Markdown };

enum class TableKind { Error, Loss, Rates };

inline const char* to_string(TableKind k) {
  switch (k) {
    case TableKind::Error: return "error";
    case TableKind::Loss: return "loss";
    case TableKind::Rates: return "rates";
  }
  return "?";
}

inline std::string format_fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* distribution_label(DistributionKind d) {
  switch (d) {
    case DistributionKind::Normal: return "Normal";
    case DistributionKind::StudentT3Scaled: return "t3";
    case DistributionKind::MixtureNormalScaled: return "Mixture";
  }
  return "?";
}

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string markdown() const {
    std::ostringstream os;
    os << "| ";
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? " | " : "") << header[i];
    os << " |\n|";
    for (std::size_t i = 0; i < header.size(); ++i) os << " ---: |";
    os << '\n';
    for (const auto& r : rows) {
      os << "| ";
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " | " : "") << r[i];
      os << " |\n";
    }
    return os.str();
  }

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    return os.str();
  }
};

namespace detail {

inline std::vector<EstimatorKind> column_methods(const std::vector<CellAggregate>& cells) {
  std::vector<EstimatorKind> out;
  for (auto m : {EstimatorKind::SampleCov, EstimatorKind::KendallBridge, EstimatorKind::SpatialSign}) {
    for (const auto& c : cells) {
      if (c.method == m) {
        out.push_back(m);
        break;
      }
    }
  }
  return out;
}

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

/// One table for one model. Rows are (p, n); columns are distribution x
/// method (error/loss) or distribution x method x {FPR1, FNR1, FPR2, FNR2}.
inline Table build_table(const std::vector<CellAggregate>& all, ModelKind model, TableKind kind) {
  std::vector<CellAggregate> cells;
  for (const auto& c : all) {
    if (c.cell.model == model) cells.push_back(c);
  }
  Table t;
  t.title = std::string("Model ") + to_string(model) + " " + to_string(kind);
  if (cells.empty()) return t;

  std::vector<DistributionKind> dists;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pn;
  for (const auto& c : cells) {
    dists.push_back(c.cell.distribution);
    pn.emplace_back(c.cell.p, c.cell.n);
  }
  dists = detail::sorted_unique(dists);
  pn = detail::sorted_unique(pn);
  const auto methods = detail::column_methods(cells);

  std::map<std::tuple<int, int, Eigen::Index, Eigen::Index>, const CellAggregate*> lookup;
  for (const auto& c : cells) {
    lookup[std::tuple(static_cast<int>(c.cell.distribution), static_cast<int>(c.method), c.cell.p, c.cell.n)] = &c;
  }

  t.header = {"p", "n"};
  for (auto d : dists) {
    for (auto m : methods) {
      const std::string base = std::string(distribution_label(d)) + " " + method_name(m);
      switch (kind) {
        case TableKind::Error: t.header.push_back(base); break;
        case TableKind::Loss:
          t.header.push_back(base + " L1");
          t.header.push_back(base + " L2");
          break;
        case TableKind::Rates:
          for (const char* s : {" FPR1", " FNR1", " FPR2", " FNR2"}) t.header.push_back(base + s);
          break;
      }
    }
  }
  for (const auto& [p, n] : pn) {
    std::vector<std::string> row{std::to_string(p), std::to_string(n)};
    for (auto d : dists) {
      for (auto m : methods) {
        const auto it = lookup.find(std::tuple(static_cast<int>(d), static_cast<int>(m), p, n));
        const CellAggregate* a = it == lookup.end() ? nullptr : it->second;
        auto put = [&](double CellAggregate::*field) { row.push_back(a ? format_fixed1(a->*field) : "-"); };
        switch (kind) {
          case TableKind::Error: put(&CellAggregate::abs_gap_x100); break;
          case TableKind::Loss:
            put(&CellAggregate::loss1_x100);
            put(&CellAggregate::loss2_x100);
            break;
          case TableKind::Rates:
            put(&CellAggregate::fpr1_x100);
            put(&CellAggregate::fnr1_x100);
            put(&CellAggregate::fpr2_x100);
            put(&CellAggregate::fnr2_x100);
            break;
        }
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---- aggregates CSV (full precision, for round trips) ----

inline const std::vector<std::string>& aggregate_columns() {
  static const std::vector<std::string> cols{
      "model",      "distribution", "n",         "p",         "method",    "replications", "degenerate",
      "abs_gap_x100", "loss1_x100", "loss2_x100", "fpr1_x100", "fnr1_x100", "fpr2_x100",   "fnr2_x100",
      "support1",   "support2"};
  return cols;
}

inline std::string aggregates_csv(const std::vector<CellAggregate>& cells) {
  std::ostringstream os;
  const auto& cols = aggregate_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& c : cells) {
    os << to_string(c.cell.model) << ',' << to_string(c.cell.distribution) << ',' << c.cell.n << ',' << c.cell.p << ','
       << method_name(c.method) << ',' << c.replications << ',' << c.degenerate;
    for (double v : {c.abs_gap_x100, c.loss1_x100, c.loss2_x100, c.fpr1_x100, c.fnr1_x100, c.fpr2_x100, c.fnr2_x100,
                     c.support1, c.support2}) {
      os << ',' << format_exact(v);
    }
    os << '\n';
  }
  return os.str();
}

inline std::vector<CellAggregate> parse_aggregates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("aggregates file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  if (header != aggregate_columns()) throw DataError("aggregates file has an unexpected header");
  std::vector<CellAggregate> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string s;
    while (std::getline(ss, s, ',')) f.push_back(s);
    if (f.size() != header.size()) {
      throw DataError("aggregates line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(f.size()));
    }
    try {
      CellAggregate c;
      c.cell.model = parse_model_kind(f[0]);
      c.cell.distribution = parse_distribution_kind(f[1]);
      c.cell.n = std::stoll(f[2]);
      c.cell.p = std::stoll(f[3]);
      c.method = parse_estimator_kind(f[4]);
      c.replications = std::stoi(f[5]);
      c.degenerate = std::stoi(f[6]);
      double* fields[] = {&c.abs_gap_x100, &c.loss1_x100, &c.loss2_x100, &c.fpr1_x100, &c.fnr1_x100,
                          &c.fpr2_x100,    &c.fnr2_x100,  &c.support1,   &c.support2};
      for (std::size_t k = 0; k < 9; ++k) *fields[k] = std::stod(f[7 + k]);
      out.push_back(c);
    } catch (const std::logic_error& e) {
      throw DataError("aggregates line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SpecError("cannot write " + path.string());
  os << text;
}

/// Writes error/loss/rates tables per model present; returns the paths written.
inline std::vector<std::filesystem::path> emit_tables(const std::vector<CellAggregate>& cells,
                                                      const std::filesystem::path& dir, TableFormat format) {
  if (cells.empty()) throw SpecError("emit_tables: empty result");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (auto model : {ModelKind::I, ModelKind::II}) {
    bool present = false;
    for (const auto& c : cells) present = present || c.cell.model == model;
    if (!present) continue;
    for (auto kind : {TableKind::Error, TableKind::Loss, TableKind::Rates}) {
      const Table t = build_table(cells, model, kind);
      const std::string stem = std::string("model") + to_string(model) + "_" + to_string(kind);
      const auto path = dir / (stem + (format == TableFormat::Csv ? ".csv" : ".md"));
      write_text(path, format == TableFormat::Csv ? t.csv() : "## " + t.title + "\n\n" + t.markdown());
      written.push_back(path);
    }
  }
  return written;
}

/// The full set of simulate outputs. Everything here is a pure function of
/// the spec; wall time goes to timing.json so the rest stays byte-stable.
inline void write_experiment_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "spec.json", to_json(r.spec).dump(2) + "\n");
  {
    std::ostringstream os;
    for (const auto& rec : r.records) os << to_json(rec).dump() << '\n';
    write_text(dir / "raw.jsonl", os.str());
  }
  write_text(dir / "aggregates.csv", aggregates_csv(r.cells));
  emit_tables(r.cells, dir, TableFormat::Csv);
  emit_tables(r.cells, dir, TableFormat::Markdown);
  write_text(dir / "timing.json", json{{"wall_time_seconds", r.wall_time_seconds}}.dump(2) + "\n");
}

}  // namespace sscca::harness
