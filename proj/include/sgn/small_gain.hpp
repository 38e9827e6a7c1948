#pragma once

// The small-gain machinery: the SGN matrix C(w, alpha), the normalized gain
// matrix H(w), margins, Gershgorin-type tests, the two-player timescale band,
// weight search, and certificate assembly.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgn/metric.hpp"
#include "sgn/region_spec.hpp"

namespace sgn {

/// Curvature vector mu and coupling matrix L (zero diagonal, nonnegative).
struct BlockBounds {
  Vector mu;
  Matrix L;

  [[nodiscard]] std::size_t num_players() const noexcept { return static_cast<std::size_t>(mu.size()); }

  void validate() const {
    if (mu.size() == 0) throw DimensionError("BlockBounds: empty curvature vector");
    if (L.rows() != mu.size() || L.cols() != mu.size()) {
      throw DimensionError("BlockBounds: L must be N x N with N = " + std::to_string(mu.size()));
    }
    for (Index i = 0; i < mu.size(); ++i) {
      if (!std::isfinite(mu(i))) throw DomainError("BlockBounds: mu_" + std::to_string(i) + " is not finite");
      if (L(i, i) != 0.0) throw DomainError("BlockBounds: L must have zero diagonal");
      for (Index j = 0; j < mu.size(); ++j) {
        if (!(L(i, j) >= 0.0) || !std::isfinite(L(i, j))) {
          throw DomainError("BlockBounds: L entries must be finite and nonnegative");
        }
      }
    }
  }

  void require_positive_curvature() const {
    if (!(mu.array() > 0.0).all()) throw DomainError("BlockBounds: curvature mu must be positive");
  }
};

namespace detail {

inline void check_weights(const BlockBounds& b, const Vector& w) {
  b.validate();
  if (w.size() != b.mu.size()) throw DimensionError("weight vector length does not match player count");
  for (Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i))) {
      throw DomainError("weight " + std::to_string(i) + " must be positive and finite");
    }
  }
}

inline double lambda_min_sym(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

/// C_ii = 2 w_i (mu_i - alpha), C_ij = -(w_i L_ij + w_j L_ji).
inline Matrix build_C(const BlockBounds& bounds, const Vector& w, double alpha) {
  detail::check_weights(bounds, w);
  const Index n = bounds.mu.size();
  Matrix c(n, n);
  for (Index i = 0; i < n; ++i) {
    c(i, i) = 2.0 * w(i) * (bounds.mu(i) - alpha);
    for (Index j = i + 1; j < n; ++j) {
      c(i, j) = c(j, i) = -(w(i) * bounds.L(i, j) + w(j) * bounds.L(j, i));
    }
  }
  return c;
}

/// Positive-definiteness test used by the margin bisection: lambda_min above
/// 1e-12 times the trace scale.
inline bool sgn_matrix_pd(const Matrix& c) {
  const double scale = std::max(std::abs(c.trace()), 1e-300);
  return detail::lambda_min_sym(c) > 1e-12 * scale;
}

struct MarginResult {
  double alpha = 0.0;
  bool feasible = false;
};

inline constexpr double kMarginTol = 1e-9;

/// alpha_*(w) = sup{alpha >= 0 : C(w, alpha) > 0}, by bisection on
/// [0, min_i mu_i]. Returns the largest bracket point known to be feasible.
inline MarginResult sgn_margin(const BlockBounds& bounds, const Vector& w) {
  detail::check_weights(bounds, w);
  const double mu_min = bounds.mu.minCoeff();
  if (!(mu_min > 0.0) || !sgn_matrix_pd(build_C(bounds, w, 0.0))) return {0.0, false};
  double lo = 0.0, hi = mu_min;
  while (hi - lo > kMarginTol) {
    const double mid = 0.5 * (lo + hi);
    if (sgn_matrix_pd(build_C(bounds, w, mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, true};
}

/// min_i (mu_i - (1/(2 w_i)) sum_{j != i} (w_i L_ij + w_j L_ji)); may be negative.
inline double gershgorin_margin(const BlockBounds& bounds, const Vector& w) {
  detail::check_weights(bounds, w);
  const Index n = bounds.mu.size();
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) row += w(i) * bounds.L(i, j) + w(j) * bounds.L(j, i);
    }
    best = std::min(best, bounds.mu(i) - row / (2.0 * w(i)));
  }
  return best;
}

/// H_ii = mu_i, H_ij = -(k_ij + k_ji)/2 with k_ij = L_ij sqrt(w_i / w_j).
inline Matrix normalized_gain_matrix(const BlockBounds& bounds, const Vector& w) {
  detail::check_weights(bounds, w);
  const Index n = bounds.mu.size();
  Matrix h(n, n);
  for (Index i = 0; i < n; ++i) {
    h(i, i) = bounds.mu(i);
    for (Index j = i + 1; j < n; ++j) {
      const double kij = bounds.L(i, j) * std::sqrt(w(i) / w(j));
      const double kji = bounds.L(j, i) * std::sqrt(w(j) / w(i));
      h(i, j) = h(j, i) = -0.5 * (kij + kji);
    }
  }
  return h;
}

inline double normalized_gain_lambda_min(const BlockBounds& bounds, const Vector& w) {
  return detail::lambda_min_sym(normalized_gain_matrix(bounds, w));
}

/// Strict diagonal dominance of H(w) - alpha I. True implies lambda_min(H(w)) >= alpha.
inline bool normalized_gershgorin_check(const BlockBounds& bounds, const Vector& w, double alpha) {
  detail::check_weights(bounds, w);
  const Index n = bounds.mu.size();
  for (Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      row += bounds.L(i, j) * std::sqrt(w(i) / w(j)) + bounds.L(j, i) * std::sqrt(w(j) / w(i));
    }
    if (!(bounds.mu(i) - alpha > 0.5 * row)) return false;
  }
  return true;
}

struct GainMatrix {
  Matrix K;
  double rho = 0.0;
};

/// K_ij = L_ij / mu_i and its spectral radius.
inline GainMatrix gain_matrix_spectral_radius(const BlockBounds& bounds) {
  bounds.validate();
  bounds.require_positive_curvature();
  const Index n = bounds.mu.size();
  Matrix k = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j) k(i, j) = bounds.L(i, j) / bounds.mu(i);
    }
  }
  return {k, spectral_radius(k)};
}

/// Interval (r_lo, r_hi) of ratios r = w2/w1 with C((1, r), alpha) > 0.
/// An empty endpoint means the band is unbounded on that side.
struct TimescaleBand {
  double alpha = 0.0;
  std::optional<double> r_lo;
  std::optional<double> r_hi;
  bool feasible = false;

  [[nodiscard]] bool contains(double r) const {
    if (!feasible) return false;
    return (!r_lo || r > *r_lo) && (!r_hi || r < *r_hi);
  }
};

inline TimescaleBand two_player_band(const BlockBounds& bounds, double alpha) {
  bounds.validate();
  if (bounds.num_players() != 2) throw DimensionError("two_player_band: requires exactly two players");
  const double m1 = bounds.mu(0) - alpha, m2 = bounds.mu(1) - alpha;
  if (!(m1 > 0.0 && m2 > 0.0)) throw DomainError("two_player_band: alpha must be below min(mu_1, mu_2)");
  const double l12 = bounds.L(0, 1), l21 = bounds.L(1, 0);
  const double p = m1 * m2;
  const double q = l12 * l21;
  TimescaleBand band;
  band.alpha = alpha;
  if (!(p > q)) return band;
  band.feasible = true;
  if (l21 == 0.0) {
    // det condition is linear in r: 4 p r - L12^2 > 0
    if (l12 > 0.0) band.r_lo = l12 * l12 / (4.0 * p);
    return band;
  }
  const double disc = 2.0 * std::sqrt(p * (p - q));
  const double denom = l21 * l21;
  const double hi = (2.0 * p - q + disc) / denom;
  // r_lo * r_hi = L12^2 / L21^2; the product form avoids cancellation.
  if (l12 > 0.0) band.r_lo = (l12 * l12 / denom) / hi;
  band.r_hi = hi;
  return band;
}

enum class WeightStrategy { two_player_analytic, log_grid, coordinate_search };

inline const char* to_string(WeightStrategy s) {
  switch (s) {
    case WeightStrategy::two_player_analytic: return "two-player-analytic";
    case WeightStrategy::log_grid: return "log-grid";
    case WeightStrategy::coordinate_search: return "coordinate-search";
  }
  return "unknown";
}

inline WeightStrategy weight_strategy_from_string(const std::string& s) {
  if (s == "two-player-analytic") return WeightStrategy::two_player_analytic;
  if (s == "log-grid") return WeightStrategy::log_grid;
  if (s == "coordinate-search") return WeightStrategy::coordinate_search;
  throw DomainError("unknown weight strategy '" + s + "'");
}

struct WeightSearchResult {
  Vector w;
  double alpha_star = 0.0;
  bool feasible = false;
};

namespace detail {

// Weights from the Perron vector of K: w_i proportional to 1/v_i^2, which
// balances the off-diagonal gains in the two-player case.
inline Vector perron_seed_weights(const BlockBounds& bounds) {
  const Index n = bounds.mu.size();
  Vector w = Vector::Ones(n);
  if (!(bounds.mu.array() > 0.0).all()) return w;
  const Matrix k = gain_matrix_spectral_radius(bounds).K;
  if (k.cwiseAbs().maxCoeff() == 0.0) return w;
  Eigen::EigenSolver<Matrix> es(k);
  Index best = 0;
  es.eigenvalues().real().maxCoeff(&best);
  Vector v = es.eigenvectors().col(best).real().cwiseAbs();
  if (!(v.maxCoeff() > 0.0)) return w;
  v /= v.maxCoeff();
  for (Index i = 0; i < n; ++i) w(i) = v(i) > 1e-8 ? 1.0 / (v(i) * v(i)) : 1.0;
  return w / w(0);
}

inline Vector weights_from_log(const Vector& log_tail) {
  Vector w(log_tail.size() + 1);
  w(0) = 1.0;
  w.tail(log_tail.size()) = log_tail.array().exp();
  return w;
}

inline double weight_objective(const BlockBounds& b, const Vector& log_tail) {
  return normalized_gain_lambda_min(b, weights_from_log(log_tail));
}

inline WeightSearchResult finish_search(const BlockBounds& b, Vector w) {
  w /= w(0);
  const auto m = sgn_margin(b, w);
  return {std::move(w), m.alpha, m.feasible};
}

inline WeightSearchResult optimize_two_player(const BlockBounds& b) {
  if (b.num_players() != 2) throw DimensionError("two-player-analytic strategy requires N = 2");
  if (!(b.mu.minCoeff() > 0.0)) return {Vector::Ones(2), 0.0, false};
  const auto band = two_player_band(b, 0.0);
  if (!band.feasible) return {Vector::Ones(2), 0.0, false};
  if (!band.r_lo && !band.r_hi) return finish_search(b, Vector::Ones(2));
  constexpr double kSpan = 30.0;
  double lo = band.r_lo ? std::log(*band.r_lo) : std::log(*band.r_hi) - kSpan;
  double hi = band.r_hi ? std::log(*band.r_hi) : std::log(*band.r_lo) + kSpan;
  auto objective = [&](double t) { return weight_objective(b, Vector::Constant(1, t)); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = objective(x1);
    }
  }
  const double t = 0.5 * (lo + hi);
  Vector w(2);
  w << 1.0, std::exp(t);
  return finish_search(b, w);
}

inline WeightSearchResult optimize_log_grid(const BlockBounds& b) {
  const Index n = b.mu.size();
  if (n == 1) return finish_search(b, Vector::Ones(1));
  const Index dims = n - 1;
  const Vector seed = perron_seed_weights(b);
  Vector center = seed.tail(dims).array().log();
  const int per_axis = std::max(4, static_cast<int>(std::floor(std::pow(4096.0, 1.0 / static_cast<double>(dims)))));
  double half_span = 6.0 * std::log(10.0);
  Vector best = center;
  double best_val = weight_objective(b, best);
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    while (true) {
      Vector t(dims);
      for (Index k = 0; k < dims; ++k) {
        t(k) = center(k) - half_span + 2.0 * half_span * idx[static_cast<std::size_t>(k)] / (per_axis - 1);
      }
      const double v = weight_objective(b, t);
      if (v > best_val) {
        best_val = v;
        best = t;
      }
      Index k = 0;
      while (k < dims && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == dims) break;
    }
    center = best;
    half_span *= 4.0 / (per_axis - 1);
  }
  return finish_search(b, weights_from_log(best));
}

inline WeightSearchResult optimize_coordinate(const BlockBounds& b, std::uint64_t seed) {
  const Index n = b.mu.size();
  if (n == 1) return finish_search(b, Vector::Ones(1));
  const Index dims = n - 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  std::vector<Vector> starts;
  starts.push_back(Vector::Zero(dims));
  starts.push_back(perron_seed_weights(b).tail(dims).array().log());
  Vector rnd(dims);
  for (Index k = 0; k < dims; ++k) rnd(k) = ud(rng);
  starts.push_back(rnd);

  Vector best = starts.front();
  double best_val = -std::numeric_limits<double>::infinity();
  constexpr int kLinePoints = 64;
  for (const Vector& start : starts) {
    Vector t = start;
    double val = weight_objective(b, t);
    double delta = 8.0;
    while (delta > 1e-9) {
      bool improved = false;
      for (Index k = 0; k < dims; ++k) {
        const double c = t(k);
        for (int p = 0; p < kLinePoints; ++p) {
          Vector cand = t;
          cand(k) = c - delta + 2.0 * delta * p / (kLinePoints - 1);
          const double v = weight_objective(b, cand);
          if (v > val) {
            val = v;
            t = cand;
            improved = true;
          }
        }
      }
      if (!improved) delta *= 0.25;
    }
    if (val > best_val) {
      best_val = val;
      best = t;
    }
  }
  return finish_search(b, weights_from_log(best));
}

}  // namespace detail

/// Best diagonal margin search over w (normalized so w_1 = 1). The
/// objective is lambda_min(H(w)), which equals alpha_*(w) wherever positive.
inline WeightSearchResult optimize_weights(const BlockBounds& bounds, WeightStrategy strategy,
                                           std::uint64_t seed = 0) {
  bounds.validate();
  switch (strategy) {
    case WeightStrategy::two_player_analytic: return detail::optimize_two_player(bounds);
    case WeightStrategy::log_grid: return detail::optimize_log_grid(bounds);
    case WeightStrategy::coordinate_search: return detail::optimize_coordinate(bounds, seed);
  }
  throw Error("optimize_weights: unknown strategy");
}

inline constexpr double kDefaultC4 = 2.5;
inline constexpr double kDefaultSmallC4 = 0.5;
inline constexpr int kCertificateSchemaVersion = 1;

/// Region, metric, margin, Lipschitz bound and safe steps.
struct Certificate {
  WeightedMetric metric;
  double alpha = 0.0;
  double alpha_sgn = 0.0;
  std::optional<double> alpha_dsc;
  double beta = 0.0;
  double eta_max = 0.0;
  double h_max = 0.0;
  double C4 = kDefaultC4;
  double c4 = kDefaultSmallC4;
  RegionSpec region;
  nlohmann::json provenance = nlohmann::json::object();
};

inline Certificate assemble_certificate(WeightedMetric metric, double alpha_sgn, std::optional<double> alpha_dsc,
                                        double beta, RegionSpec region, double C4 = kDefaultC4,
                                        double c4 = kDefaultSmallC4,
                                        nlohmann::json provenance = nlohmann::json::object()) {
  const double alpha = alpha_dsc ? std::max(alpha_sgn, *alpha_dsc) : alpha_sgn;
  if (!(alpha > 0.0)) throw DomainError("assemble_certificate: no positive margin to certify");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("assemble_certificate: beta must be positive");
  if (beta < alpha) {
    throw DomainError("assemble_certificate: beta (" + std::to_string(beta) + ") is below alpha (" +
                      std::to_string(alpha) + "); a Lipschitz bound can never be below the monotonicity margin");
  }
  if (!(C4 > 0.0) || !(c4 > 0.0 && c4 <= 1.0)) throw DomainError("assemble_certificate: invalid RK4 constants");
  Certificate c;
  c.metric = std::move(metric);
  c.alpha = alpha;
  c.alpha_sgn = alpha_sgn;
  c.alpha_dsc = alpha_dsc;
  c.beta = beta;
  c.eta_max = 2.0 * alpha / (beta * beta);
  c.h_max = C4 / beta;
  c.C4 = C4;
  c.c4 = c4;
  c.region = std::move(region);
  c.provenance = std::move(provenance);
  return c;
}

}  // namespace sgn
