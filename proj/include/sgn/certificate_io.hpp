#pragma once

// JSON form of certificates. Doubles go through nlohmann's shortest
// round-trip printer, so a written certificate reloads bit-identically.

#include <string>
#include <vector>

#include "json.hpp"
#include "sgn/region_spec.hpp"
#include "sgn/small_gain.hpp"

namespace sgn {

namespace detail {

inline nlohmann::json vector_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto n = static_cast<Index>(j.size());
  if (n == 0) return Matrix(0, 0);
  Matrix m(n, static_cast<Index>(j.at(0).size()));
  for (Index i = 0; i < n; ++i) {
    const Vector r = vector_from_json(j.at(static_cast<std::size_t>(i)));
    if (r.size() != m.cols()) throw DimensionError("matrix rows have unequal length");
    m.row(i) = r.transpose();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const WeightedMetric& m) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : m.structure().blocks()) blocks.push_back(detail::matrix_json(b));
  return {{"dims", m.structure().dims()}, {"blocks", blocks}, {"weights", detail::vector_json(m.weights())}};
}

inline WeightedMetric metric_from_json(const nlohmann::json& j) {
  std::vector<Matrix> blocks;
  for (const auto& b : j.at("blocks")) blocks.push_back(detail::matrix_from_json(b));
  BlockStructure s(std::move(blocks));
  if (j.contains("dims") && j.at("dims").get<std::vector<Index>>() != s.dims()) {
    throw DimensionError("metric JSON: dims disagree with blocks");
  }
  return WeightedMetric(std::move(s), detail::vector_from_json(j.at("weights")));
}

inline nlohmann::json to_json(const RegionSpec& r) {
  nlohmann::json j = {{"kind", r.kind == RegionKind::box ? "box" : "metric_ball"},
                      {"center", detail::vector_json(r.center)}};
  if (r.kind == RegionKind::box) {
    j["half_widths"] = detail::vector_json(r.half_widths);
  } else {
    j["radius"] = r.radius;
    j["ball_metric"] = r.ball_metric ? to_json(*r.ball_metric) : nlohmann::json(nullptr);
  }
  return j;
}

inline RegionSpec region_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "box") return RegionSpec::box(detail::vector_from_json(j.at("center")), detail::vector_from_json(j.at("half_widths")));
  if (kind == "metric_ball") {
    std::optional<WeightedMetric> m;
    if (j.contains("ball_metric") && !j.at("ball_metric").is_null()) m = metric_from_json(j.at("ball_metric"));
    return RegionSpec::ball(detail::vector_from_json(j.at("center")), j.at("radius").get<double>(), std::move(m));
  }
  throw DomainError("unknown region kind '" + kind + "'");
}

inline nlohmann::json to_json(const Certificate& c) {
  return {{"schema_version", kCertificateSchemaVersion},
          {"metric", to_json(c.metric)},
          {"alpha", c.alpha},
          {"alpha_sgn", c.alpha_sgn},
          {"alpha_dsc", c.alpha_dsc ? nlohmann::json(*c.alpha_dsc) : nlohmann::json(nullptr)},
          {"beta", c.beta},
          {"eta_max", c.eta_max},
          {"h_max", c.h_max},
          {"C4", c.C4},
          {"c4", c.c4},
          {"region", to_json(c.region)},
          {"provenance", c.provenance}};
}

/// Reads a certificate back without recomputing anything; the stored
/// step sizes are checked against the stored alpha and beta.
inline Certificate certificate_from_json(const nlohmann::json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kCertificateSchemaVersion) {
    throw DomainError("certificate schema_version " + std::to_string(version) + " is not supported");
  }
  Certificate c;
  c.metric = metric_from_json(j.at("metric"));
  c.alpha = j.at("alpha").get<double>();
  c.alpha_sgn = j.at("alpha_sgn").get<double>();
  if (!j.at("alpha_dsc").is_null()) c.alpha_dsc = j.at("alpha_dsc").get<double>();
  c.beta = j.at("beta").get<double>();
  c.eta_max = j.at("eta_max").get<double>();
  c.h_max = j.at("h_max").get<double>();
  c.C4 = j.at("C4").get<double>();
  c.c4 = j.at("c4").get<double>();
  c.region = region_from_json(j.at("region"));
  c.provenance = j.value("provenance", nlohmann::json::object());
  if (c.eta_max != 2.0 * c.alpha / (c.beta * c.beta) || c.h_max != c.C4 / c.beta) {
    throw DomainError("certificate step sizes are inconsistent with alpha, beta and C4");
  }
  return c;
}

}  // namespace sgn
