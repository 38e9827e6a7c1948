#pragma once

// Entropic mirror geometry on products of simplices: softmax/logit charts,
// KL divergences, Fisher blocks, mirror block bounds from Hessians, and
// dual-coordinate Euler/RK4.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sgn/games.hpp"
#include "sgn/parallel.hpp"
#include "sgn/small_gain.hpp"

namespace sgn {

inline constexpr double kInteriorFloor = 1e-12;
inline constexpr double kSoftmaxFloor = 1e-300;
inline constexpr double kGaugeRidge = 1e-10;

namespace detail {

inline void require_interior(const Vector& x, const char* what) {
  for (Index k = 0; k < x.size(); ++k) {
    if (!(x(k) >= kInteriorFloor)) {
      throw DomainError(std::string(what) + ": coordinate " + std::to_string(k) + " = " + std::to_string(x(k)) +
                        " is on or outside the simplex boundary");
    }
  }
}

}  // namespace detail

/// KL(x* || x) = sum_k x*_k log(x*_k / x_k).
inline double bregman_div(const Vector& x_star, const Vector& x) {
  if (x_star.size() != x.size()) throw DimensionError("bregman_div: length mismatch");
  detail::require_interior(x_star, "bregman_div");
  detail::require_interior(x, "bregman_div");
  double d = 0.0;
  for (Index k = 0; k < x.size(); ++k) d += x_star(k) * std::log(x_star(k) / x(k));
  return std::max(d, 0.0);
}

/// Max-shifted softmax, floored at 1e-300 against underflow.
inline Vector softmax(const Vector& z) {
  if (z.size() == 0) throw DimensionError("softmax: empty input");
  Vector e = (z.array() - z.maxCoeff()).exp();
  e /= e.sum();
  return e.cwiseMax(kSoftmaxFloor);
}

inline Vector center(const Vector& z) { return z.array() - z.mean(); }

/// Mean-zero logits of an interior simplex point.
inline Vector centered_logits(const Vector& x) {
  detail::require_interior(x, "centered_logits");
  return center(x.array().log().matrix());
}

/// diag(pi) - pi pi^T, the Hessian of log-sum-exp at any logits of pi.
inline Matrix fisher_block(const Vector& pi) {
  detail::require_interior(pi, "fisher_block");
  return Matrix(pi.asDiagonal()) - pi * pi.transpose();
}

/// Orthonormal basis of the mean-zero subspace of R^m (Helmert columns).
inline Matrix gauge_basis(Index m) {
  if (m < 2) throw DimensionError("gauge_basis: need at least two coordinates");
  Matrix u = Matrix::Zero(m, m - 1);
  for (Index k = 1; k < m; ++k) {
    const double s = 1.0 / std::sqrt(static_cast<double>(k * (k + 1)));
    for (Index t = 0; t < k; ++t) u(t, k - 1) = s;
    u(k, k - 1) = -static_cast<double>(k) * s;
  }
  return u;
}

enum class Chart { primal, logit };

/// Negative entropy on each simplex of each player. Player i owns a list of
/// simplices (one per state for tabular policies); coordinates are stacked
/// player-major, simplex-major.
class MirrorMap {
 public:
  explicit MirrorMap(std::vector<std::vector<Index>> simplices) : simplices_(std::move(simplices)) {
    if (simplices_.empty()) throw DimensionError("MirrorMap: no players");
    std::vector<Index> dims;
    for (std::size_t i = 0; i < simplices_.size(); ++i) {
      Index d = 0;
      if (simplices_[i].empty()) throw DimensionError("MirrorMap: player without simplices", i);
      for (Index m : simplices_[i]) {
        if (m < 2) throw DimensionError("MirrorMap: simplex dimension must be >= 2", i);
        d += m;
      }
      dims.push_back(d);
    }
    structure_ = BlockStructure::identity(dims);
  }

  // N players, each with `states` simplices of `actions` coordinates.
  static MirrorMap tabular(std::size_t players, std::size_t states, Index actions) {
    return MirrorMap(std::vector<std::vector<Index>>(players, std::vector<Index>(states, actions)));
  }

  [[nodiscard]] std::size_t num_players() const noexcept { return simplices_.size(); }
  [[nodiscard]] const BlockStructure& structure() const noexcept { return structure_; }
  [[nodiscard]] Index total_dim() const noexcept { return structure_.total_dim(); }
  [[nodiscard]] const std::vector<Index>& simplices(std::size_t i) const { return simplices_.at(i); }

  // Applies fn(offset, size) to every simplex of player i (offsets global).
  template <class Fn>
  void for_each_simplex(std::size_t i, Fn&& fn) const {
    Index o = structure_.offset(i);
    for (Index m : simplices_.at(i)) {
      fn(o, m);
      o += m;
    }
  }

  template <class Fn>
  void for_each_simplex(Fn&& fn) const {
    for (std::size_t i = 0; i < simplices_.size(); ++i) for_each_simplex(i, fn);
  }

  [[nodiscard]] Vector to_primal(const Vector& z) const {
    check(z, "to_primal");
    Vector x(z.size());
    for_each_simplex([&](Index o, Index m) { x.segment(o, m) = softmax(z.segment(o, m)); });
    return x;
  }

  [[nodiscard]] Vector to_dual(const Vector& x) const {
    check(x, "to_dual");
    Vector z(x.size());
    for_each_simplex([&](Index o, Index m) { z.segment(o, m) = centered_logits(x.segment(o, m)); });
    return z;
  }

  [[nodiscard]] Vector center_gauge(const Vector& z) const {
    check(z, "center_gauge");
    Vector c(z.size());
    for_each_simplex([&](Index o, Index m) { c.segment(o, m) = center(z.segment(o, m)); });
    return c;
  }

  // Block-diagonal gauge basis of player i, d_i x (d_i - #simplices).
  [[nodiscard]] Matrix gauge(std::size_t i) const {
    const Index d = structure_.dim(i);
    Index cols = 0;
    for (Index m : simplices_.at(i)) cols += m - 1;
    Matrix u = Matrix::Zero(d, cols);
    Index r = 0, c = 0;
    for (Index m : simplices_.at(i)) {
      u.block(r, c, m, m - 1) = gauge_basis(m);
      r += m;
      c += m - 1;
    }
    return u;
  }

  // Local metric of player i at a point given in `chart` coordinates:
  // Fisher blocks in the logit chart, diag(1/x) in the primal chart.
  [[nodiscard]] Matrix metric(std::size_t i, const Vector& point, Chart chart) const {
    check(point, "metric");
    const Index d = structure_.dim(i), base = structure_.offset(i);
    Matrix g = Matrix::Zero(d, d);
    for_each_simplex(i, [&](Index o, Index m) {
      const Index r = o - base;
      if (chart == Chart::logit) {
        g.block(r, r, m, m) = fisher_block(softmax(point.segment(o, m)));
      } else {
        const Vector x = point.segment(o, m);
        detail::require_interior(x, "metric");
        g.block(r, r, m, m) = x.cwiseInverse().asDiagonal();
      }
    });
    return g;
  }

  // Per-player sums of KL(x*_s || x_s) over that player's simplices.
  [[nodiscard]] Vector player_divergences(const Vector& x, const Vector& x_star) const {
    check(x, "player_divergences");
    check(x_star, "player_divergences");
    Vector d = Vector::Zero(static_cast<Index>(num_players()));
    for (std::size_t i = 0; i < num_players(); ++i) {
      for_each_simplex(i, [&](Index o, Index m) {
        d(static_cast<Index>(i)) += bregman_div(x_star.segment(o, m), x.segment(o, m));
      });
    }
    return d;
  }

 private:
  void check(const Vector& v, const char* what) const {
    if (v.size() != total_dim()) {
      throw DimensionError(std::string("MirrorMap::") + what + ": vector length " + std::to_string(v.size()) +
                           " does not match " + std::to_string(total_dim()));
    }
  }

  std::vector<std::vector<Index>> simplices_;
  BlockStructure structure_;
};

/// V(x) = sum_i w_i D_psi_i(x_i* || x_i).
inline double lyapunov_V(const MirrorMap& psi, const Vector& x, const Vector& x_star, const Vector& w) {
  const Vector d = psi.player_divergences(x, x_star);
  if (w.size() != d.size()) throw DimensionError("lyapunov_V: weight count does not match player count");
  return w.dot(d);
}

struct MirrorBounds {
  BlockBounds bounds;
  Vector reference_point;  // primal
};

/// Smallest generalized eigenvalue of (A, B), B SPD, via the symmetric-definite solver.
inline double generalized_min_eig(const Matrix& a, const Matrix& b) {
  detail::require_symmetric(b, "generalized_min_eig");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(symmetric_part(a), b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NotSpdError("generalized_min_eig: metric is not positive definite");
  return es.eigenvalues()(0);
}

/// Mirror curvature and coupling at one point, in gauge-reduced coordinates:
/// mu_i = lambda_min(U^T H_ii U, U^T Psi_i U) and
/// L_ij = ||Psi_r,i^{-1/2} U_i^T H_ij U_j Psi_r,j^{-1/2}||.
inline BlockBounds mirror_probe(const GameModel& game, const MirrorMap& psi, Chart chart, const Vector& x,
                                std::size_t sample_index = 0) {
  const std::size_t n = psi.num_players();
  if (game.structure().dims() != psi.structure().dims()) {
    throw DimensionError("mirror_probe: game and mirror map disagree on player dimensions");
  }
  std::vector<Matrix> u(n), psi_r(n), inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = psi.gauge(i);
    psi_r[i] = symmetric_part(u[i].transpose() * psi.metric(i, x, chart) * u[i]);
    inv_sqrt[i] = spd_inv_sqrt(psi_r[i]);
  }
  const auto nn = static_cast<Index>(n);
  BlockBounds b{Vector(nn), Matrix::Zero(nn, nn)};
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix hii = game.hess_block(i, i, x);
    if (!detail::is_symmetric(hii, 1e-8)) {
      throw NotSpdError("own Hessian of player " + std::to_string(i) + " is not symmetric at sample " +
                        std::to_string(sample_index));
    }
    b.mu(static_cast<Index>(i)) = generalized_min_eig(u[i].transpose() * hii * u[i], psi_r[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Matrix c = inv_sqrt[i] * (u[i].transpose() * game.hess_block(i, j, x) * u[j]) * inv_sqrt[j];
      b.L(static_cast<Index>(i), static_cast<Index>(j)) = Eigen::JacobiSVD<Matrix>(c).singularValues()(0);
    }
  }
  return b;
}

/// Min/max reduction of mirror_probe over samples given in chart coordinates.
inline MirrorBounds mirror_block_bounds(const GameModel& game, const MirrorMap& psi, Chart chart,
                                        const Vector& x_star, const std::vector<Vector>& samples, int threads = 1) {
  if (samples.empty()) throw DomainError("mirror_block_bounds: no samples");
  std::vector<BlockBounds> probes(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) { probes[k] = mirror_probe(game, psi, chart, samples[k], k); });
  MirrorBounds mb{probes.front(), chart == Chart::logit ? psi.to_primal(x_star) : x_star};
  detail::require_interior(mb.reference_point, "mirror_block_bounds");
  for (const auto& p : probes) {
    mb.bounds.mu = mb.bounds.mu.cwiseMin(p.mu);
    mb.bounds.L = mb.bounds.L.cwiseMax(p.L);
  }
  return mb;
}

/// lambda_min of the mirror H(w); negative when the small-gain test fails.
inline double mirror_sgn_margin(const MirrorBounds& mb, const Vector& w) {
  return normalized_gain_lambda_min(mb.bounds, w);
}

/// Stacked primal gradients (grad_{x_i} f_i) at a primal point.
using PrimalGradient = std::function<Vector(const Vector&)>;

enum class MirrorMethod { euler, rk4 };

/// One step of z' = -grad f(softmax(z)) in dual coordinates, re-centered.
inline Vector mirror_step(const MirrorMap& psi, const Vector& z, const PrimalGradient& grad, double step,
                          MirrorMethod method) {
  if (!(step > 0.0)) throw DomainError("mirror_step: step must be positive");
  auto field = [&](const Vector& y) -> Vector { return -grad(psi.to_primal(y)); };
  Vector next;
  if (method == MirrorMethod::euler) {
    next = z + step * field(z);
  } else {
    const Vector k1 = field(z);
    const Vector k2 = field(z + 0.5 * step * k1);
    const Vector k3 = field(z + 0.5 * step * k2);
    const Vector k4 = field(z + step * k3);
    next = z + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi.center_gauge(next);
}

}  // namespace sgn
