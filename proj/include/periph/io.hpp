#pragma once

// JSON channel/matrix files and machine-readable reports.
//
// Channel file:
//   {"schema": "periph-channel/1", "dim": d, "kraus": [M, ...], "label": "...", "metadata": {}}
// where a matrix M is an array of rows and each entry is a [re, im] pair.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "periph/channel.hpp"
#include "periph/report.hpp"

namespace periph::io {

using json = nlohmann::json;

inline constexpr const char* kChannelSchema = "periph-channel/1";

// Malformed or inconsistent input file.
class InputError : public Error {
 public:
  using Error::Error;
};

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InputError("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw InputError("matrix rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError("matrix rows have inconsistent lengths");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& e = row[static_cast<std::size_t>(k)];
      if (e.is_number()) {
        m(i, k) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw InputError("matrix entries must be [re, im] pairs");
      }
    }
  }
  if (!all_finite(m)) throw InputError("matrix entries must be finite");
  return m;
}

inline json channel_to_json(const KrausChannel& c, const json& metadata = json::object()) {
  json j;
  j["schema"] = kChannelSchema;
  j["dim"] = c.dim();
  j["label"] = c.label();
  j["kraus"] = json::array();
  for (const auto& k : c.kraus()) j["kraus"].push_back(matrix_to_json(k));
  j["metadata"] = metadata;
  return j;
}

// Parses and validates (unitality at 1e-10); throws InputError otherwise.
inline KrausChannel channel_from_json(const json& j) {
  if (!j.is_object()) throw InputError("channel file must be a JSON object");
  if (j.value("schema", std::string{}) != kChannelSchema)
    throw InputError(std::string("channel file schema must be \"") + kChannelSchema + "\"");
  if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
    throw InputError("channel file needs a non-empty \"kraus\" array");
  std::vector<CMatrix> kraus;
  for (const auto& k : j["kraus"]) kraus.push_back(matrix_from_json(k));
  std::optional<KrausChannel> c;
  try {
    c.emplace(std::move(kraus), j.value("label", std::string{}));
  } catch (const ShapeError& e) {
    throw InputError(e.what());
  }
  if (j.contains("dim") && (!j["dim"].is_number_integer() || j["dim"].get<long long>() != c->dim()))
    throw InputError("\"dim\" does not match the Kraus matrices");
  const auto v = validate(*c);
  if (!v.pass)
    throw InputError("channel is not unital (defect " + std::to_string(v.unitality_defect) + ")");
  return std::move(*c);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline KrausChannel read_channel(const std::string& path) {
  return channel_from_json(read_json_file(path));
}

// Accepts either a bare matrix or an object with a "matrix" field.
inline CMatrix read_matrix(const std::string& path) {
  const json j = read_json_file(path);
  if (j.is_object()) {
    if (!j.contains("matrix")) throw InputError(path + ": object without \"matrix\" field");
    return matrix_from_json(j["matrix"]);
  }
  return matrix_from_json(j);
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json check_to_json(const Check& c) {
  json j;
  j["name"] = c.name;
  j["paper_anchor"] = c.anchor;
  j["value"] = number_or_null(c.value);
  j["threshold"] = number_or_null(c.threshold);
  j["comparison"] = c.comparison;
  j["pass"] = c.pass ? json(*c.pass) : json(nullptr);
  if (!c.reason.empty()) j["reason"] = c.reason;
  return j;
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

}  // namespace periph::io
