#pragma once

// Run reports: a JSON document with the configuration, every eigenpair, the
// transformation matrix and any separation scores, plus the matrix as a CSV
// side file next to it (<stem>_U.csv).

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "npsa/eigensearch.hpp"
#include "npsa/error.hpp"
#include "npsa/io.hpp"
#include "npsa/linalg.hpp"
#include "npsa/metrics.hpp"

namespace npsa {

struct SkewReport {
  nlohmann::json config = nlohmann::json::object();
  std::vector<EigenPair> pairs;
  Matrix U;
  // Skewness of each transformed component y_i = u_i^T r in the original
  // (undeflated) coskewness tensor.
  std::vector<double> component_skewness;
  std::optional<SeparationScore> separation;
  nlohmann::json extra = nlohmann::json::object();
};

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (rows[i].size() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "ragged matrix in report");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

inline nlohmann::json to_json(const SkewReport& r) {
  nlohmann::json j;
  j["config"] = r.config;
  j["eigenpairs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const EigenPair& p = r.pairs[i];
    nlohmann::json e{{"u", p.u},
                     {"lambda", p.lambda},
                     {"iterations", p.iterations},
                     {"converged", p.converged},
                     {"residual", p.residual}};
    if (i < r.component_skewness.size()) e["component_skewness"] = r.component_skewness[i];
    j["eigenpairs"].push_back(std::move(e));
  }
  j["U"] = matrix_to_json(r.U);
  if (r.separation) {
    const SeparationScore& s = *r.separation;
    j["metrics"] = {{"isi", s.isi},
                    {"tmse", s.tmse},
                    {"correlations", s.correlations},
                    {"per_source_mse", s.per_source_mse},
                    {"estimate_for_source", s.matching.estimate_for_source},
                    {"sign", s.matching.sign}};
  }
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

inline SkewReport report_from_json(const nlohmann::json& j) {
  SkewReport r;
  try {
    r.config = j.value("config", nlohmann::json::object());
    for (const auto& e : j.at("eigenpairs")) {
      r.pairs.push_back(EigenPair{e.at("u").get<Vector>(), e.at("lambda").get<double>(),
                                  e.at("iterations").get<int>(), e.at("converged").get<bool>(),
                                  e.at("residual").get<double>()});
      if (e.contains("component_skewness"))
        r.component_skewness.push_back(e["component_skewness"].get<double>());
    }
    r.U = matrix_from_json(j.at("U"));
    if (j.contains("metrics")) {
      const auto& m = j["metrics"];
      SeparationScore s;
      s.isi = m.at("isi").get<double>();
      s.tmse = m.at("tmse").get<double>();
      s.correlations = m.at("correlations").get<std::vector<double>>();
      s.per_source_mse = m.at("per_source_mse").get<std::vector<double>>();
      s.matching.estimate_for_source = m.at("estimate_for_source").get<std::vector<std::size_t>>();
      s.matching.sign = m.at("sign").get<std::vector<int>>();
      r.separation = std::move(s);
    }
    r.extra = j.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("malformed report: ") + e.what());
  }
  return r;
}

inline fs::path report_matrix_path(const fs::path& report_path) {
  return report_path.parent_path() / (report_path.stem().string() + "_U.csv");
}

/// Writes the JSON report and the U side file. Doubles are printed with
/// round-trip precision, so reading back reproduces every value exactly.
inline void write_report(const fs::path& path, const SkewReport& report) {
  detail::write_all(path, to_json(report).dump(2) + "\n");
  write_csv(report_matrix_path(path), report.U);
}

inline SkewReport read_report(const fs::path& path) {
  const std::vector<char> bytes = detail::read_all(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(j);
}

}  // namespace npsa
