#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "statbeam/channel.hpp"
#include "statbeam/design.hpp"
#include "statbeam/error.hpp"

namespace statbeam {

using Json = nlohmann::json;

namespace detail {

inline double json_number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

inline std::vector<double> json_numbers(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(json_number(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

}  // namespace detail

/// {"dim": M, "re": [[...]], "im": [[...]]}; "im" may be omitted for a real
/// matrix. Validated Hermitian PSD on load.
inline CovarianceMatrix covariance_from_json(const Json& j, const std::string& field = "covariance") {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  if (!j.contains("dim") || !j.contains("re")) throw ConfigError(field, "needs \"dim\" and \"re\"");
  const double dim_value = detail::json_number(j["dim"], field + ".dim");
  if (dim_value < 1 || dim_value != std::floor(dim_value)) throw ConfigError(field + ".dim", "must be a positive integer");
  const auto m = static_cast<Index>(dim_value);
  Matrix s(m, m);
  auto read_part = [&](const char* key, bool imaginary) {
    const Json& rows = j[key];
    const std::string where = field + "." + key;
    if (!rows.is_array() || static_cast<Index>(rows.size()) != m) throw ConfigError(where, "expected dim rows");
    for (Index r = 0; r < m; ++r) {
      const auto row = detail::json_numbers(rows[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]");
      if (static_cast<Index>(row.size()) != m) throw ConfigError(where, "expected dim columns");
      for (Index c = 0; c < m; ++c) {
        if (imaginary) {
          s(r, c) += Complex(0.0, row[static_cast<std::size_t>(c)]);
        } else {
          s(r, c) = row[static_cast<std::size_t>(c)];
        }
      }
    }
  };
  read_part("re", false);
  if (j.contains("im")) read_part("im", true);
  try {
    return CovarianceMatrix(s);
  } catch (const PreconditionError& e) {
    throw ConfigError(field, e.what());
  }
}

inline Json covariance_to_json(const CovarianceMatrix& sigma) {
  Json re = Json::array(), im = Json::array();
  for (Index r = 0; r < sigma.dim(); ++r) {
    Json rr = Json::array(), ii = Json::array();
    for (Index c = 0; c < sigma.dim(); ++c) {
      rr.push_back(sigma.matrix()(r, c).real());
      ii.push_back(sigma.matrix()(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"dim", sigma.dim()}, {"re", re}, {"im", im}};
}

inline Json beamformer_to_json(const Beamformer& w) {
  Json re = Json::array(), im = Json::array();
  for (Index k = 0; k < w.size(); ++k) {
    re.push_back(w(k).real());
    im.push_back(w(k).imag());
  }
  return {{"re", re}, {"im", im}};
}

/// {"re": [...], "im": [...]}, normalized to unit norm on load.
inline Beamformer beamformer_from_json(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("re")) throw ConfigError(field, "expected {\"re\": [...], \"im\": [...]}");
  const auto re = detail::json_numbers(j["re"], field + ".re");
  const auto im = j.contains("im") ? detail::json_numbers(j["im"], field + ".im") : std::vector<double>(re.size(), 0.0);
  if (re.size() != im.size() || re.empty()) throw ConfigError(field, "re and im must have equal nonzero length");
  Beamformer w(static_cast<Index>(re.size()));
  for (std::size_t k = 0; k < re.size(); ++k) w(static_cast<Index>(k)) = Complex(re[k], im[k]);
  if (!(w.norm() > 0.0) || !std::isfinite(w.norm())) throw ConfigError(field, "beamformer must be nonzero and finite");
  return w.normalized();
}

inline Json design_to_json(const DesignResult& result) {
  Json ws = Json::array();
  for (const auto& w : result.ws.vectors()) ws.push_back(beamformer_to_json(w));
  Json diagnostics = Json::object();
  for (const auto& [key, value] : result.diagnostics) diagnostics[key] = value;
  diagnostics["converged"] = result.converged;
  return {{"method", to_string(result.method)},
          {"beamformers", ws},
          {"objective_nats", result.objective},
          {"diagnostics", diagnostics}};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("path", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("json", std::string("parse error in ") + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write " + path);
  out << text;
}

}  // namespace statbeam
