#pragma once

// File formats: configuration and moment CSV, JSON result envelopes and
// the --norms spec syntax.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "beltway/assemble.hpp"
#include "beltway/error.hpp"
#include "beltway/forward.hpp"
#include "beltway/model.hpp"
#include "beltway/oracle.hpp"

namespace beltway {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error(ErrorKind::InvalidInput, "not a number: '" + std::string(s) + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) throw Error(ErrorKind::Io, path.string() + ": row width differs from header");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw Error(ErrorKind::Io, path.string() + ": empty file");
  return t;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  auto out = open_output(path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << r[k];
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

// Configurations: one row per point, header x1..xn.

inline void write_config_csv(const std::filesystem::path& path, const PointConfig& cfg) {
  std::vector<std::string> header;
  for (int r = 0; r < cfg.n(); ++r) header.push_back("x" + std::to_string(r + 1));
  std::vector<std::vector<std::string>> rows;
  for (int j = 0; j < cfg.m(); ++j) {
    auto& row = rows.emplace_back();
    for (int r = 0; r < cfg.n(); ++r) row.push_back(format_double(cfg.coords()(r, j)));
  }
  write_csv(path, header, rows);
}

inline PointConfig read_config_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  for (std::size_t k = 0; k < t.header.size(); ++k)
    if (t.header[k] != "x" + std::to_string(k + 1)) throw Error(ErrorKind::Io, path.string() + ": expected header x1..xn");
  std::vector<std::vector<double>> pts;
  for (const auto& r : t.rows) {
    auto& p = pts.emplace_back();
    for (const auto& c : r) p.push_back(parse_double(c));
  }
  if (pts.empty()) throw Error(ErrorKind::Io, path.string() + ": no points");
  return PointConfig::from_points(pts);
}

// Moments: header d1,d2,ip, one triple per row in stored (shuffled) order.

inline void write_moment_csv(const std::filesystem::path& path, const SecondMoment& sm) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : sm.triples()) rows.push_back({format_double(t.d1), format_double(t.d2), format_double(t.ip)});
  write_csv(path, {"d1", "d2", "ip"}, rows);
}

inline SecondMoment read_moment_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"d1", "d2", "ip"}) throw Error(ErrorKind::Io, path.string() + ": expected header d1,d2,ip");
  std::vector<Triple> triples;
  for (const auto& r : t.rows) triples.push_back({parse_double(r[0]), parse_double(r[1]), parse_double(r[2])});
  return SecondMoment::from_triples(std::move(triples));
}

/// "1x5,2x1" -> five points of radius 1 then one of radius 2.
inline std::vector<NormSpec> parse_norm_spec(const std::string& text) {
  std::vector<NormSpec> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw Error(ErrorKind::InvalidInput, "norm spec item '" + item + "' is not RADIUSxCOUNT");
    NormSpec s;
    s.radius = parse_double(std::string_view(item).substr(0, x));
    const std::string cnt = item.substr(x + 1);
    const auto r = std::from_chars(cnt.data(), cnt.data() + cnt.size(), s.count);
    if (r.ec != std::errc() || r.ptr != cnt.data() + cnt.size() || s.count < 1 || !(s.radius > 0.0))
      throw Error(ErrorKind::InvalidInput, "bad norm spec item '" + item + "'");
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidInput, "empty norm spec");
  return out;
}

inline int norm_spec_total(const std::vector<NormSpec>& spec) {
  int m = 0;
  for (const auto& s : spec) m += s.count;
  return m;
}

// JSON

inline nlohmann::json sym_to_json(const SymMatrix& s) { return s.to_rows(); }

inline nlohmann::json matrix_to_json(const Matrix& x) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < x.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j.at(0).size()) : 0;
  Matrix x(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j.at(r).size()) != cols) throw Error(ErrorKind::Io, "ragged matrix in JSON");
    for (int c = 0; c < cols; ++c) x(r, c) = j.at(r).at(c).get<double>();
  }
  return x;
}

inline nlohmann::json result_to_json(const RecoveryResult& r, std::uint64_t seed) {
  nlohmann::json j;
  j["mode"] = to_string(r.mode);
  j["n"] = r.n;
  j["m"] = r.gram.m();
  j["seed"] = seed;
  j["gram"] = sym_to_json(r.gram.sym());
  j["config"] = r.config ? matrix_to_json(r.config->coords()) : nlohmann::json(nullptr);
  j["iterations"] = r.iterations;
  j["rank_checks"] = r.rank_checks;
  j["residual"] = r.residual;
  j["min_ambiguity"] = r.min_ambiguity;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"tuple", t.tuple}, {"count", t.count}, {"rank_checks", t.rank_checks}, {"new_entries", t.new_entries}, {"score", t.score}});
  j["trace"] = std::move(trace);
  return j;
}

inline RecoveryResult result_from_json(const nlohmann::json& j) {
  RecoveryResult r;
  try {
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.n = j.at("n").get<int>();
    r.gram = GramMatrix(SymMatrix::from_rows(j.at("gram").get<std::vector<std::vector<double>>>()), r.n);
    if (!j.at("config").is_null()) r.config = PointConfig(matrix_from_json(j.at("config")));
    r.iterations = j.at("iterations").get<int>();
    r.rank_checks = j.at("rank_checks").get<std::uint64_t>();
    r.residual = j.at("residual").get<double>();
    r.min_ambiguity = j.value("min_ambiguity", std::size_t{0});
    for (const auto& t : j.value("trace", nlohmann::json::array())) {
      IterationTrace tr;
      tr.tuple = t.at("tuple").get<IndexTuple>();
      tr.count = t.at("count").get<std::uint64_t>();
      tr.rank_checks = t.at("rank_checks").get<std::uint64_t>();
      tr.new_entries = t.at("new_entries").get<int>();
      tr.score = t.at("score").get<double>();
      r.trace.push_back(std::move(tr));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("malformed result JSON: ") + e.what());
  }
  return r;
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline nlohmann::json summary_to_json(const RearrangementSummary& s) {
  return {{"total", s.total},
          {"equivalent", s.equivalent},
          {"non_equivalent", s.non_equivalent},
          {"low_rank_non_equivalent", s.low_rank_non_equivalent},
          {"psd_non_equivalent", s.psd_non_equivalent},
          {"psd_classes", s.psd_classes}};
}

inline nlohmann::json certificate_to_json(const UniquenessCertificate& c) {
  return {{"m", c.m}, {"n", c.n}, {"unique", c.unique}, {"rearrangements", summary_to_json(c.summary)}};
}

inline void write_census_csv(const std::filesystem::path& path, const CensusStats& st) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < st.per_trial.size(); ++t) {
    const auto& s = st.per_trial[t].summary;
    rows.push_back({std::to_string(t), std::to_string(st.per_trial[t].seed), std::to_string(s.total), std::to_string(s.non_equivalent),
                    std::to_string(s.psd_non_equivalent), std::to_string(s.psd_classes)});
  }
  write_csv(path, {"trial", "seed", "rearrangements", "non_equivalent", "psd_non_equivalent", "psd_classes"}, rows);
}

inline void write_census_summary_csv(const std::filesystem::path& path, const CensusStats& st) {
  write_csv(path,
            {"trials", "trials_with_psd", "trial_fraction", "rearrangements", "non_equivalent", "psd_non_equivalent", "psd_classes",
             "share_raw", "share_classes"},
            {{std::to_string(st.trials), std::to_string(st.trials_with_psd), format_double(st.trial_fraction()),
              std::to_string(st.rearrangements), std::to_string(st.non_equivalent), std::to_string(st.psd_non_equivalent),
              std::to_string(st.psd_classes), format_double(st.share_raw()), format_double(st.share_classes())}});
}

}  // namespace beltway
