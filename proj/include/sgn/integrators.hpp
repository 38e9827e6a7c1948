#pragma once

// Projected Euler and RK4 in a block metric, trajectories, one-step
// matrices of linear games, stability thresholds and phase diagrams.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sgn/games.hpp"
#include "sgn/parallel.hpp"
#include "sgn/small_gain.hpp"

namespace sgn {

enum class ConstraintKind { unconstrained, product_box, metric_ball };

struct ConstraintSet {
  ConstraintKind kind = ConstraintKind::unconstrained;
  Vector lower, upper;  // product box
  Vector center;        // ball, radius measured in the metric passed to project_metric
  double radius = 0.0;

  static ConstraintSet unconstrained() { return {}; }

  static ConstraintSet box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw DimensionError("ConstraintSet::box: bound lengths differ");
    if (!(lower.array() <= upper.array()).all()) throw DomainError("ConstraintSet::box: lower exceeds upper");
    ConstraintSet s;
    s.kind = ConstraintKind::product_box;
    s.lower = std::move(lower);
    s.upper = std::move(upper);
    return s;
  }

  static ConstraintSet ball(Vector center, double radius) {
    if (!(radius > 0.0)) throw DomainError("ConstraintSet::ball: radius must be positive");
    ConstraintSet s;
    s.kind = ConstraintKind::metric_ball;
    s.center = std::move(center);
    s.radius = radius;
    return s;
  }
};

/// Projection onto the set in the M(w) norm.
inline Vector project_metric(const Vector& x, const ConstraintSet& set, const WeightedMetric& m) {
  if (x.size() != m.total_dim()) throw DimensionError("project_metric: point does not match metric dimension");
  switch (set.kind) {
    case ConstraintKind::unconstrained:
      return x;
    case ConstraintKind::product_box:
      // the M-projection onto a box separates per coordinate only when
      // every P_i is diagonal
      if (!m.structure().all_diagonal()) {
        throw UnsupportedError("project_metric: product box needs diagonal P_i blocks");
      }
      if (set.lower.size() != x.size()) throw DimensionError("project_metric: box dimension mismatch");
      return x.cwiseMax(set.lower).cwiseMin(set.upper);
    case ConstraintKind::metric_ball: {
      if (set.center.size() != x.size()) throw DimensionError("project_metric: ball dimension mismatch");
      const Vector d = x - set.center;
      const double r = block_norm(d, m);
      if (r <= set.radius) return x;
      return set.center + (set.radius / r) * d;
    }
  }
  throw Error("project_metric: unknown constraint kind");
}

inline Vector euler_step(const GameModel& game, const Vector& x, double eta, const ConstraintSet& set,
                         const WeightedMetric& m) {
  if (!(eta > 0.0)) throw DomainError("euler_step: step must be positive");
  return project_metric(x + eta * game.eval_G(x), set, m);
}

namespace detail {

inline Vector rk4_raw(const GameModel& game, const Vector& x, double h) {
  const Vector k1 = game.eval_G(x);
  const Vector k2 = game.eval_G(x + 0.5 * h * k1);
  const Vector k3 = game.eval_G(x + 0.5 * h * k2);
  const Vector k4 = game.eval_G(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Classical RK4 step for x' = G(x), then metric projection.
inline Vector rk4_step(const GameModel& game, const Vector& x, double h, const ConstraintSet& set,
                       const WeightedMetric& m) {
  if (!(h > 0.0)) throw DomainError("rk4_step: step must be positive");
  return project_metric(detail::rk4_raw(game, x, h), set, m);
}

enum class Method { euler, rk4, flow_rk4_fine };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::euler: return "euler";
    case Method::rk4: return "rk4";
    case Method::flow_rk4_fine: return "flow-rk4-fine";
  }
  return "unknown";
}

inline Method method_from_string(const std::string& s) {
  if (s == "euler") return Method::euler;
  if (s == "rk4") return Method::rk4;
  if (s == "flow-rk4-fine") return Method::flow_rk4_fine;
  throw DomainError("unknown integration method '" + s + "'");
}

inline constexpr double kDivergenceGuard = 1e12;
inline constexpr int kFlowSubsteps = 100;

struct TrajectoryRecord {
  std::vector<Vector> iterates;
  std::vector<double> metric_dists;  // empty when no reference point is known
  std::vector<double> step_factors;  // dists[k+1] / dists[k]; NaN where dists[k] == 0
  std::vector<double> lyapunov;
  Method method = Method::euler;
  double step_size = 0.0;
  bool diverged = false;
};

using LyapunovFn = std::function<double(const Vector&)>;

inline TrajectoryRecord run_dynamics(const GameModel& game, const Vector& x0, std::size_t steps, Method method,
                                     double step, const ConstraintSet& set, const WeightedMetric& m,
                                     std::optional<Vector> x_star = std::nullopt, const LyapunovFn& lyap = {}) {
  if (!(step > 0.0)) throw DomainError("run_dynamics: step must be positive");
  if (!x_star) x_star = game.equilibrium_hint();
  TrajectoryRecord rec;
  rec.method = method;
  rec.step_size = step;
  auto record = [&](const Vector& x) {
    rec.iterates.push_back(x);
    if (x_star) {
      const double d = block_norm(x - *x_star, m);
      if (!rec.metric_dists.empty()) {
        const double prev = rec.metric_dists.back();
        rec.step_factors.push_back(prev > 0.0 ? d / prev : std::numeric_limits<double>::quiet_NaN());
      }
      rec.metric_dists.push_back(d);
    }
    if (lyap) rec.lyapunov.push_back(lyap(x));
  };
  record(x0);
  Vector x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    switch (method) {
      case Method::euler:
        x = euler_step(game, x, step, set, m);
        break;
      case Method::rk4:
        x = rk4_step(game, x, step, set, m);
        break;
      case Method::flow_rk4_fine:
        for (int s = 0; s < kFlowSubsteps; ++s) x = rk4_step(game, x, step / kFlowSubsteps, set, m);
        break;
    }
    const double size = x_star ? block_norm(x - *x_star, m) : block_norm(x, m);
    if (!std::isfinite(size) || size > kDivergenceGuard) {
      rec.diverged = true;
      break;
    }
    record(x);
  }
  return rec;
}

/// R(z) = 1 + z + z^2/2 + z^3/6 + z^4/24.
template <class T>
T rk4_stability_polynomial(const T& z) {
  return 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
}

/// Linear update x -> T x of the unconstrained scheme on F(x) = Hx.
inline Matrix one_step_matrix(const QuadraticGame& game, Method method, double step) {
  const Index n = game.total_dim();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix z = -step * game.H();
  switch (method) {
    case Method::euler:
      return id + z;
    case Method::rk4:
      // Horner: I + Z (I + Z/2 (I + Z/3 (I + Z/4)))
      return id + z * (id + 0.5 * z * (id + (1.0 / 3.0) * z * (id + 0.25 * z)));
    case Method::flow_rk4_fine:
      break;
  }
  throw UnsupportedError("one_step_matrix: only euler and rk4 have a one-step matrix");
}

/// rho(T(h)) for all h from one eigendecomposition of H: the eigenvalues of
/// T(h) are p(-h lambda_k) for the scheme's polynomial p.
class StepSpectrum {
 public:
  StepSpectrum(const QuadraticGame& game, Method method) : method_(method) {
    if (method == Method::flow_rk4_fine) throw UnsupportedError("StepSpectrum: euler or rk4 only");
    Eigen::EigenSolver<Matrix> es(game.H(), false);
    if (es.info() != Eigen::Success) throw Error("StepSpectrum: eigensolver failed");
    eig_ = es.eigenvalues();
  }

  [[nodiscard]] double rho(double h) const {
    double r = 0.0;
    for (Index k = 0; k < eig_.size(); ++k) {
      const std::complex<double> z = -h * eig_(k);
      const std::complex<double> p = method_ == Method::euler ? 1.0 + z : rk4_stability_polynomial(z);
      r = std::max(r, std::abs(p));
    }
    return r;
  }

 private:
  Method method_;
  Eigen::VectorXcd eig_;
};

inline constexpr int kThresholdScan = 200;

/// Largest step below which rho(T) < 1, searched on (0, h_max_search]:
/// a coarse scan locates the first unstable step, bisection refines it. The
/// stable end of the final bracket is returned; 0 when no step is stable.
inline double stability_threshold(const QuadraticGame& game, Method method, double h_max_search) {
  if (!(h_max_search > 0.0)) throw DomainError("stability_threshold: search range must be positive");
  const StepSpectrum spec(game, method);
  double lo = 0.0, hi = 0.0;
  bool found = false;
  for (int k = 1; k <= kThresholdScan; ++k) {
    const double h = h_max_search * k / kThresholdScan;
    if (spec.rho(h) >= 1.0) {
      hi = h;
      found = true;
      break;
    }
    lo = h;
  }
  if (!found) return h_max_search;
  if (lo == 0.0) {
    lo = hi * 1e-9;
    if (spec.rho(lo) >= 1.0) return 0.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (spec.rho(mid) < 1.0 ? lo : hi) = mid;
  }
  return lo;
}

struct PhaseDiagram {
  Method method = Method::euler;
  std::vector<double> lambda_grid, h_grid;
  Matrix log_rho;                      // lambda x h
  std::vector<double> sgn_step_curve;  // 0 where nothing is certified
  std::vector<double> stability_curve;
  std::vector<double> alpha_sgn, beta;
};

namespace detail {

inline void require_increasing(const std::vector<double>& g, const char* what) {
  if (g.empty()) throw DomainError(std::string(what) + " is empty");
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (!(g[k] > g[k - 1])) throw DomainError(std::string(what) + " must be strictly increasing");
  }
}

}  // namespace detail

/// log rho(T(lambda, h)) for the canonical LQ family in a fixed metric, with
/// the certified step (2 alpha/beta^2 for Euler, C4/beta for RK4) and the
/// empirical threshold per lambda. alpha is the SGN margin from exact block
/// bounds in the metric's weights.
inline PhaseDiagram phase_diagram(const LqSpec& base, const Vector& weights, const std::vector<double>& lambda_grid,
                                  const std::vector<double>& h_grid, Method method, double C4 = kDefaultC4,
                                  int threads = 1) {
  detail::require_increasing(lambda_grid, "phase_diagram: lambda grid");
  detail::require_increasing(h_grid, "phase_diagram: h grid");
  if (method == Method::flow_rk4_fine) throw UnsupportedError("phase_diagram: euler or rk4 only");
  PhaseDiagram pd;
  pd.method = method;
  pd.lambda_grid = lambda_grid;
  pd.h_grid = h_grid;
  const std::size_t nl = lambda_grid.size(), nh = h_grid.size();
  pd.log_rho.resize(static_cast<Index>(nl), static_cast<Index>(nh));
  pd.sgn_step_curve.assign(nl, 0.0);
  pd.stability_curve.assign(nl, 0.0);
  pd.alpha_sgn.assign(nl, 0.0);
  pd.beta.assign(nl, 0.0);
  parallel_for(nl, threads, [&](std::size_t l) {
    LqSpec s = base;
    s.lambda = lambda_grid[l];
    const QuadraticGame game = canonical_lq(s);
    const WeightedMetric m(game.structure(), weights);
    const auto margin = sgn_margin(exact_block_bounds(game), weights);
    const double alpha = margin.feasible ? margin.alpha : 0.0;
    const double beta = metric_op_norm(game.H(), m);
    pd.alpha_sgn[l] = alpha;
    pd.beta[l] = beta;
    if (alpha > 0.0) pd.sgn_step_curve[l] = method == Method::euler ? 2.0 * alpha / (beta * beta) : C4 / beta;
    pd.stability_curve[l] = stability_threshold(game, method, h_grid.back());
    const StepSpectrum spec(game, method);
    for (std::size_t k = 0; k < nh; ++k) pd.log_rho(static_cast<Index>(l), static_cast<Index>(k)) = std::log(spec.rho(h_grid[k]));
  });
  return pd;
}

}  // namespace sgn
