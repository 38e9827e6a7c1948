#pragma once

// Sampling-based certification: sample a region, estimate block bounds in
// P-geometry, search weights, re-probe beta and the DSC margin in M(w), and
// assemble a certificate or a failure record.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgn/csv.hpp"
#include "sgn/games.hpp"
#include "sgn/parallel.hpp"
#include "sgn/region_spec.hpp"
#include "sgn/small_gain.hpp"

namespace sgn {

namespace detail {

inline std::vector<int> first_primes(std::size_t count) {
  std::vector<int> primes;
  for (int c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

inline double radical_inverse(std::uint64_t k, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % static_cast<std::uint64_t>(base));
    k /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

// Smallest k with k^d >= budget.
inline Index grid_points_per_axis(std::size_t budget, Index d) {
  Index k = std::max<Index>(1, static_cast<Index>(std::floor(std::pow(static_cast<double>(budget), 1.0 / d))));
  auto pow_ge = [&](Index base) {
    double acc = 1.0;
    for (Index t = 0; t < d; ++t) acc *= static_cast<double>(base);
    return acc >= static_cast<double>(budget);
  };
  while (!pow_ge(k)) ++k;
  while (k > 1 && pow_ge(k - 1)) --k;
  return k;
}

// Unit-cube coordinate u in [-1,1]^d mapped into the region.
inline Vector map_to_region(const RegionSpec& region, const Vector& u, bool concentric) {
  if (region.kind == RegionKind::box) return region.center + region.half_widths.cwiseProduct(u);
  Vector y = u;
  const double n2 = y.norm();
  if (n2 > 0.0) {
    if (concentric) {
      y *= y.cwiseAbs().maxCoeff() / n2;
    } else if (n2 > 1.0) {
      y /= n2;
    }
  }
  y *= region.radius;
  if (region.ball_metric) return region.center + region.ball_metric->inv_sqrt() * y;
  return region.center + y;
}

}  // namespace detail

inline constexpr Index kGridMaxDim = 4;

/// Sample points in the region, center first. Up to four dimensions this is
/// a uniform grid with ceil(budget^(1/d)) points per axis (ball grids are
/// projected radially); above that, a Halton sequence with a seeded
/// Cranley-Patterson shift.
inline std::vector<Vector> sample_region(const RegionSpec& region, std::size_t budget, std::uint64_t seed) {
  region.validate();
  if (budget < 1) throw DomainError("sample_region: budget must be >= 1");
  std::vector<Vector> pts{region.center};
  if (budget == 1) return pts;
  const Index d = region.dim();
  if (d <= kGridMaxDim) {
    const Index k = detail::grid_points_per_axis(budget, d);
    if (k == 1) return pts;
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Vector u(d);
      bool is_center = true;
      for (Index t = 0; t < d; ++t) {
        const Index c = idx[static_cast<std::size_t>(t)];
        u(t) = -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(k - 1);
        if (2 * c != k - 1) is_center = false;
      }
      if (!is_center) pts.push_back(detail::map_to_region(region, u, false));
      Index t = 0;
      while (t < d && ++idx[static_cast<std::size_t>(t)] == k) idx[static_cast<std::size_t>(t++)] = 0;
      if (t == d) break;
    }
    return pts;
  }
  const auto primes = detail::first_primes(static_cast<std::size_t>(d));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Vector shift(d);
  for (Index t = 0; t < d; ++t) shift(t) = ud(rng);
  for (std::size_t k = 1; k < budget; ++k) {
    Vector u(d);
    for (Index t = 0; t < d; ++t) {
      double v = detail::radical_inverse(k, primes[static_cast<std::size_t>(t)]) + shift(t);
      v -= std::floor(v);
      u(t) = 2.0 * v - 1.0;
    }
    pts.push_back(detail::map_to_region(region, u, true));
  }
  return pts;
}

/// Per-sample probe values, one row of the estimation report.
struct SampleProbe {
  Vector mu;       // per-block lambda_min of the own Hessian in P_i
  Matrix L;        // per-pair mixed norms, zero diagonal
  double beta = std::numeric_limits<double>::quiet_NaN();      // ||J_G||_{M->M}
  double log_norm = std::numeric_limits<double>::quiet_NaN();  // mu_M(J_G)
};

inline SampleProbe probe_block_bounds(const GameModel& game, const BlockStructure& p, const Vector& x,
                                      std::size_t sample_index = 0) {
  const std::size_t n = game.num_players();
  if (p.num_players() != n || p.dims() != game.structure().dims()) {
    throw DimensionError("probe_block_bounds: metric structure does not match game structure");
  }
  SampleProbe probe{Vector(static_cast<Index>(n)), Matrix::Zero(static_cast<Index>(n), static_cast<Index>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix hii = game.hess_block(i, i, x);
    if (!detail::is_symmetric(hii, 1e-10)) {
      throw NotSpdError("own Hessian of player " + std::to_string(i) + " is not symmetric at sample " +
                        std::to_string(sample_index));
    }
    probe.mu(static_cast<Index>(i)) = min_sym_eig_in_metric(symmetric_part(hii), p.block(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      probe.L(static_cast<Index>(i), static_cast<Index>(j)) = mixed_op_norm(game.hess_block(i, j, x), p.block(j), p.block(i));
    }
  }
  return probe;
}

inline BlockBounds reduce_block_bounds(const std::vector<SampleProbe>& probes) {
  if (probes.empty()) throw DomainError("reduce_block_bounds: no samples");
  BlockBounds b{probes.front().mu, probes.front().L};
  for (const auto& pr : probes) {
    b.mu = b.mu.cwiseMin(pr.mu);
    b.L = b.L.cwiseMax(pr.L);
  }
  return b;
}

/// mu_i^lo = min over samples, L_ij^hi = max over samples.
inline BlockBounds estimate_block_bounds(const GameModel& game, const BlockStructure& p,
                                         const std::vector<Vector>& samples, int threads = 1) {
  if (samples.empty()) throw DomainError("estimate_block_bounds: no samples");
  std::vector<SampleProbe> probes(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) { probes[k] = probe_block_bounds(game, p, samples[k], k); });
  return reduce_block_bounds(probes);
}

/// max over samples of ||J_G(x)|| in the M-operator norm.
inline double estimate_lipschitz(const GameModel& game, const WeightedMetric& m, const std::vector<Vector>& samples,
                                 int threads = 1) {
  if (samples.empty()) throw DomainError("estimate_lipschitz: no samples");
  std::vector<double> v(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) { v[k] = metric_op_norm(game.eval_JG(samples[k]), m); });
  return *std::max_element(v.begin(), v.end());
}

/// min over samples of -mu_M(J_G(x)).
inline double estimate_dsc_margin(const GameModel& game, const WeightedMetric& m, const std::vector<Vector>& samples,
                                  int threads = 1) {
  if (samples.empty()) throw DomainError("estimate_dsc_margin: no samples");
  std::vector<double> v(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) { v[k] = -log_norm(game.eval_JG(samples[k]), m); });
  return *std::min_element(v.begin(), v.end());
}

struct SampleExtremes {
  std::vector<std::size_t> mu_argmin;             // per block
  std::vector<std::vector<std::size_t>> L_argmax;  // per pair
  std::size_t beta_argmax = 0;
  std::size_t dsc_argmin = 0;
};

struct EstimatedBounds {
  BlockBounds bounds;
  double beta_hi = 0.0;
  double alpha_dsc = 0.0;
  std::size_t sample_count = 0;
  SampleExtremes extremes;
};

struct CertifyOptions {
  WeightStrategy strategy = WeightStrategy::two_player_analytic;
  std::optional<Vector> fixed_weights;  // skips the weight search when set
  double C4 = kDefaultC4;
  double c4 = kDefaultSmallC4;
  int threads = 1;
};

/// Either a certificate or the reason none could be issued, plus every
/// intermediate estimate and the per-sample report.
struct CertifyResult {
  std::optional<Certificate> certificate;
  std::string failure_reason;
  EstimatedBounds estimates;
  WeightSearchResult weights;
  std::vector<SampleProbe> report;

  [[nodiscard]] bool ok() const noexcept { return certificate.has_value(); }
};

inline CertifyResult certify(const GameModel& game, const RegionSpec& region, const BlockStructure& p,
                             std::size_t budget, std::uint64_t seed, const CertifyOptions& opts = {}) {
  if (region.dim() != game.total_dim()) throw DimensionError("certify: region dimension does not match the game");
  const auto samples = sample_region(region, budget, seed);
  const std::size_t n = game.num_players();
  CertifyResult res;
  res.report.resize(samples.size());
  parallel_for(samples.size(), opts.threads,
               [&](std::size_t k) { res.report[k] = probe_block_bounds(game, p, samples[k], k); });
  auto& est = res.estimates;
  est.sample_count = samples.size();
  est.bounds = reduce_block_bounds(res.report);
  est.extremes.mu_argmin.assign(n, 0);
  est.extremes.L_argmax.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Index>(i);
      if (res.report[k].mu(ii) < res.report[est.extremes.mu_argmin[i]].mu(ii)) est.extremes.mu_argmin[i] = k;
      for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Index>(j);
        if (res.report[k].L(ii, jj) > res.report[est.extremes.L_argmax[i][j]].L(ii, jj)) est.extremes.L_argmax[i][j] = k;
      }
    }
  }

  if (opts.fixed_weights) {
    const auto m = sgn_margin(est.bounds, *opts.fixed_weights);
    res.weights = {*opts.fixed_weights / (*opts.fixed_weights)(0), m.alpha, m.feasible};
  } else {
    res.weights = optimize_weights(est.bounds, opts.strategy, seed);
  }
  const WeightedMetric metric(p, res.weights.w);
  parallel_for(samples.size(), opts.threads, [&](std::size_t k) {
    const Matrix jg = game.eval_JG(samples[k]);
    res.report[k].beta = metric_op_norm(jg, metric);
    res.report[k].log_norm = log_norm(jg, metric);
  });
  est.beta_hi = -std::numeric_limits<double>::infinity();
  est.alpha_dsc = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (res.report[k].beta > est.beta_hi) {
      est.beta_hi = res.report[k].beta;
      est.extremes.beta_argmax = k;
    }
    if (-res.report[k].log_norm < est.alpha_dsc) {
      est.alpha_dsc = -res.report[k].log_norm;
      est.extremes.dsc_argmin = k;
    }
  }

  const double alpha_sgn = res.weights.feasible ? res.weights.alpha_star : 0.0;
  if (!(alpha_sgn > 0.0) && !(est.alpha_dsc > 0.0)) {
    res.failure_reason = "no positive margin: SGN " + std::string(res.weights.feasible ? "margin is zero" : "is infeasible") +
                         " and the DSC margin is " + format_double(est.alpha_dsc);
    return res;
  }
  nlohmann::json prov = {{"method", "sampled"},
                         {"budget", budget},
                         {"sample_count", samples.size()},
                         {"seed", seed},
                         {"weight_search", opts.fixed_weights ? "fixed" : to_string(opts.strategy)},
                         {"probe", "dense"},
                         {"interval_inflation", false}};
  try {
    res.certificate = assemble_certificate(metric, alpha_sgn, est.alpha_dsc, est.beta_hi, region, opts.C4, opts.c4,
                                           std::move(prov));
  } catch (const DomainError& e) {
    res.failure_reason = e.what();
  }
  return res;
}

}  // namespace sgn
