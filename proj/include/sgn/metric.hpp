#pragma once

// Weighted block geometry: block norms, mixed operator norms, logarithmic
// norms and extreme-eigenvalue probes. Dimensions here are small (<= 64), so
// the dense Eigen path is the default and the iterative probes are opt-in.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sgn/error.hpp"

namespace sgn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTol = 1e-12;

namespace detail {

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline bool is_symmetric(const Matrix& a, double rel_tol = kSymmetryTol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, max_abs(a));
  return max_abs(a - a.transpose()) <= rel_tol * scale;
}

inline void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
}

inline void require_symmetric(const Matrix& a, const char* what) {
  require_square(a, what);
  if (!is_symmetric(a)) {
    throw NotSpdError(std::string(what) + ": matrix is not symmetric within relative tolerance 1e-12");
  }
}

// Symmetric eigendecomposition of an SPD matrix; throws if not SPD.
inline Eigen::SelfAdjointEigenSolver<Matrix> spd_eigen(const Matrix& p, const char* what) {
  require_symmetric(p, what);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  if (es.info() != Eigen::Success) throw Error(std::string(what) + ": eigensolver failed");
  if (p.rows() > 0 && !(es.eigenvalues()(0) > 0.0)) {
    throw NotSpdError(std::string(what) + ": matrix is not positive definite (lambda_min = " +
                      std::to_string(es.eigenvalues()(0)) + ")");
  }
  return es;
}

}  // namespace detail

/// P^{1/2} for SPD P, by symmetric eigendecomposition.
inline Matrix spd_sqrt(const Matrix& p) {
  const auto es = detail::spd_eigen(p, "spd_sqrt");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

/// P^{-1/2} for SPD P.
inline Matrix spd_inv_sqrt(const Matrix& p) {
  const auto es = detail::spd_eigen(p, "spd_inv_sqrt");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

inline Matrix symmetric_part(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Per-player dimensions and SPD blocks P_i.
class BlockStructure {
 public:
  BlockStructure() = default;

  explicit BlockStructure(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw DimensionError("BlockStructure: at least one block required");
    offsets_.reserve(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Matrix& p = blocks_[i];
      if (p.rows() == 0 || p.rows() != p.cols()) {
        throw DimensionError("BlockStructure: block " + std::to_string(i) + " must be square and nonempty", i);
      }
      if (!detail::is_symmetric(p)) {
        throw NotSpdError("BlockStructure: block " + std::to_string(i) + " is not symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
      if (!(es.eigenvalues()(0) > 0.0)) {
        throw NotSpdError("BlockStructure: block " + std::to_string(i) + " is not positive definite");
      }
      offsets_.push_back(total_);
      total_ += p.rows();
    }
  }

  static BlockStructure identity(const std::vector<Index>& dims) {
    std::vector<Matrix> blocks;
    blocks.reserve(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (dims[i] <= 0) throw DimensionError("BlockStructure: nonpositive dimension", i);
      blocks.push_back(Matrix::Identity(dims[i], dims[i]));
    }
    return BlockStructure(std::move(blocks));
  }

  [[nodiscard]] std::size_t num_players() const noexcept { return blocks_.size(); }
  [[nodiscard]] Index total_dim() const noexcept { return total_; }
  [[nodiscard]] Index dim(std::size_t i) const { return blocks_.at(i).rows(); }
  [[nodiscard]] Index offset(std::size_t i) const { return offsets_.at(i); }
  [[nodiscard]] const Matrix& block(std::size_t i) const { return blocks_.at(i); }
  [[nodiscard]] const std::vector<Matrix>& blocks() const noexcept { return blocks_; }

  [[nodiscard]] std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& b : blocks_) d.push_back(b.rows());
    return d;
  }

  [[nodiscard]] bool all_diagonal() const {
    for (const auto& b : blocks_) {
      Matrix off = b;
      off.diagonal().setZero();
      if (detail::max_abs(off) != 0.0) return false;
    }
    return true;
  }

  // Dense P = diag(P_1, ..., P_N).
  [[nodiscard]] Matrix matrix() const {
    Matrix p = Matrix::Zero(total_, total_);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      p.block(offsets_[i], offsets_[i], dim(i), dim(i)) = blocks_[i];
    }
    return p;
  }

 private:
  std::vector<Matrix> blocks_;
  std::vector<Index> offsets_;
  Index total_ = 0;
};

/// M(w) = diag(w_i P_i).
class WeightedMetric {
 public:
  WeightedMetric() = default;

  WeightedMetric(BlockStructure structure, Vector weights)
      : structure_(std::move(structure)), weights_(std::move(weights)) {
    if (static_cast<std::size_t>(weights_.size()) != structure_.num_players()) {
      throw DimensionError("WeightedMetric: weight count " + std::to_string(weights_.size()) +
                           " does not match player count " + std::to_string(structure_.num_players()));
    }
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_(i) > 0.0) || !std::isfinite(weights_(i))) {
        throw DomainError("WeightedMetric: weight " + std::to_string(i) + " must be positive and finite");
      }
    }
  }

  static WeightedMetric uniform(BlockStructure structure) {
    const auto n = static_cast<Index>(structure.num_players());
    return WeightedMetric(std::move(structure), Vector::Ones(n));
  }

  [[nodiscard]] const BlockStructure& structure() const noexcept { return structure_; }
  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
  [[nodiscard]] Index total_dim() const noexcept { return structure_.total_dim(); }

  [[nodiscard]] Matrix matrix() const {
    Matrix m = structure_.matrix();
    for (std::size_t i = 0; i < structure_.num_players(); ++i) {
      const Index o = structure_.offset(i), d = structure_.dim(i);
      m.block(o, o, d, d) *= weights_(static_cast<Index>(i));
    }
    return m;
  }

  // M^{1/2} and M^{-1/2}, assembled blockwise.
  [[nodiscard]] Matrix sqrt() const { return blockwise(false); }
  [[nodiscard]] Matrix inv_sqrt() const { return blockwise(true); }

 private:
  [[nodiscard]] Matrix blockwise(bool inverse) const {
    const Index n = structure_.total_dim();
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < structure_.num_players(); ++i) {
      const Index o = structure_.offset(i), d = structure_.dim(i);
      const double w = weights_(static_cast<Index>(i));
      if (inverse) {
        out.block(o, o, d, d) = spd_inv_sqrt(structure_.block(i)) / std::sqrt(w);
      } else {
        out.block(o, o, d, d) = spd_sqrt(structure_.block(i)) * std::sqrt(w);
      }
    }
    return out;
  }

  BlockStructure structure_;
  Vector weights_;
};

enum class ProbeMethod { dense, power_iteration, lanczos };

struct SpectralProbeConfig {
  ProbeMethod method = ProbeMethod::dense;
  int max_iters = 100000;
  double tol = 1e-12;

  void validate() const {
    if (!(tol > 0.0)) throw DomainError("SpectralProbeConfig: tol must be positive");
    if (max_iters < 1) throw DomainError("SpectralProbeConfig: max_iters must be >= 1");
  }
};

/// sqrt(sum_i w_i v_i^T P_i v_i).
inline double block_norm(const Vector& v, const WeightedMetric& m) {
  const auto& s = m.structure();
  if (v.size() != s.total_dim()) {
    // name the first block the vector fails to cover (npos if it is too long)
    std::size_t block = DimensionError::npos;
    for (std::size_t i = 0; i < s.num_players(); ++i) {
      if (s.offset(i) + s.dim(i) > v.size()) {
        block = i;
        break;
      }
    }
    throw DimensionError("block_norm: vector length " + std::to_string(v.size()) + " does not match total dimension " +
                             std::to_string(s.total_dim()) +
                             (block == DimensionError::npos ? std::string(" (too long)")
                                                            : " (block " + std::to_string(block) + " incomplete)"),
                         block);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < s.num_players(); ++i) {
    const auto vi = v.segment(s.offset(i), s.dim(i));
    acc += m.weights()(static_cast<Index>(i)) * vi.dot(s.block(i) * vi);
  }
  return std::sqrt(std::max(acc, 0.0));
}

/// Inner product <u, v>_M(w).
inline double block_inner(const Vector& u, const Vector& v, const WeightedMetric& m) {
  const auto& s = m.structure();
  if (u.size() != s.total_dim() || v.size() != s.total_dim()) {
    throw DimensionError("block_inner: vector length does not match total dimension");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < s.num_players(); ++i) {
    acc += m.weights()(static_cast<Index>(i)) *
           u.segment(s.offset(i), s.dim(i)).dot(s.block(i) * v.segment(s.offset(i), s.dim(i)));
  }
  return acc;
}

namespace detail {

inline Vector seeded_start(Index n) {
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v.normalized();
}

// Largest eigenvalue of a symmetric PSD-shifted operator by power iteration
// with Rayleigh-quotient stopping on the residual.
inline double power_max(const Matrix& s, const SpectralProbeConfig& cfg) {
  const Index n = s.rows();
  const double scale = std::max(1e-300, s.cwiseAbs().rowwise().sum().maxCoeff());
  // Shift so that every eigenvalue of (s + shift I) is nonnegative; the
  // dominant one is then lambda_max + shift.
  const double shift = scale;
  Vector v = seeded_start(n);
  double theta = 0.0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    Vector sv = s * v;
    theta = v.dot(sv);
    const double resid = (sv - theta * v).norm();
    if (resid <= cfg.tol * scale) return theta;
    Vector next = sv + shift * v;
    const double nrm = next.norm();
    if (nrm == 0.0) return theta;
    v = next / nrm;
  }
  throw ConvergenceError("power iteration did not converge", cfg.max_iters);
}

// Lanczos with full reorthogonalization; returns the requested extreme Ritz
// value once its residual bound drops below tol * ||S||.
inline double lanczos_extreme(const Matrix& s, bool want_max, const SpectralProbeConfig& cfg) {
  const Index n = s.rows();
  const double scale = std::max(1e-300, s.cwiseAbs().rowwise().sum().maxCoeff());
  const Index kmax = std::min<Index>(n, cfg.max_iters);
  Matrix q(n, kmax);
  std::vector<double> alpha, beta;
  q.col(0) = seeded_start(n);
  double ritz = 0.0;
  for (Index k = 0; k < kmax; ++k) {
    Vector z = s * q.col(k);
    const double a = q.col(k).dot(z);
    alpha.push_back(a);
    // full reorthogonalization (twice is enough)
    for (int pass = 0; pass < 2; ++pass) {
      z -= q.leftCols(k + 1) * (q.leftCols(k + 1).transpose() * z);
    }
    const double b = z.norm();
    const Index m = k + 1;
    Matrix t = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const Index pick = want_max ? m - 1 : 0;
    ritz = es.eigenvalues()(pick);
    const double bound = b * std::abs(es.eigenvectors()(m - 1, pick));
    if (bound <= cfg.tol * scale || m == n || b <= 1e-300) return ritz;
    if (k + 1 < kmax) {
      beta.push_back(b);
      q.col(k + 1) = z / b;
    }
  }
  throw ConvergenceError("Lanczos did not converge", static_cast<int>(kmax));
}

}  // namespace detail

enum class Extreme { min, max };

/// Extreme eigenvalue of a symmetric matrix by the configured method.
inline double extreme_eig(const Matrix& s, Extreme which, const SpectralProbeConfig& cfg = {}) {
  cfg.validate();
  detail::require_symmetric(s, "extreme_eig");
  if (s.rows() == 0) throw DimensionError("extreme_eig: empty matrix");
  const bool want_max = which == Extreme::max;
  switch (cfg.method) {
    case ProbeMethod::dense: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw Error("extreme_eig: dense eigensolver failed");
      return want_max ? es.eigenvalues()(s.rows() - 1) : es.eigenvalues()(0);
    }
    case ProbeMethod::power_iteration:
      return want_max ? detail::power_max(s, cfg) : -detail::power_max(-s, cfg);
    case ProbeMethod::lanczos:
      return detail::lanczos_extreme(s, want_max, cfg);
  }
  throw Error("extreme_eig: unknown method");
}

/// ||P_i^{1/2} A P_j^{-1/2}||_2, the operator norm of A : (R^{d_j}, P_j) -> (R^{d_i}, P_i).
inline double mixed_op_norm(const Matrix& a, const Matrix& pj, const Matrix& pi,
                            const SpectralProbeConfig& cfg = {}) {
  if (a.rows() != pi.rows() || a.cols() != pj.rows()) {
    throw DimensionError("mixed_op_norm: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " but metrics are " + std::to_string(pi.rows()) + " and " + std::to_string(pj.rows()));
  }
  const Matrix b = spd_sqrt(pi) * a * spd_inv_sqrt(pj);
  if (cfg.method == ProbeMethod::dense) {
    Eigen::JacobiSVD<Matrix> svd(b);
    return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
  }
  const Matrix gram = symmetric_part(b.transpose() * b);
  return std::sqrt(std::max(0.0, extreme_eig(gram, Extreme::max, cfg)));
}

/// Operator norm of a square A in the M-norm: ||M^{1/2} A M^{-1/2}||_2.
inline double metric_op_norm(const Matrix& a, const WeightedMetric& m) {
  if (a.rows() != m.total_dim() || a.cols() != m.total_dim()) {
    throw DimensionError("metric_op_norm: matrix does not match metric dimension");
  }
  const Matrix b = m.sqrt() * a * m.inv_sqrt();
  Eigen::JacobiSVD<Matrix> svd(b);
  return svd.singularValues()(0);
}

namespace detail {

inline Matrix congruent_symmetric_part(const Matrix& a, const Matrix& m) {
  require_square(a, "log_norm");
  if (a.rows() != m.rows() || m.rows() != m.cols()) {
    throw DimensionError("log_norm: A and M do not conform");
  }
  const Matrix r = spd_inv_sqrt(m);
  const Matrix jm = 0.5 * (m * a + a.transpose() * m);
  return symmetric_part(r * jm * r);
}

}  // namespace detail

/// Logarithmic norm mu_M(A) = lambda_max(M^{-1/2} (MA + A^T M)/2 M^{-1/2}).
inline double log_norm(const Matrix& a, const Matrix& m, const SpectralProbeConfig& cfg = {}) {
  return extreme_eig(detail::congruent_symmetric_part(a, m), Extreme::max, cfg);
}

inline double log_norm(const Matrix& a, const WeightedMetric& m, const SpectralProbeConfig& cfg = {}) {
  return log_norm(a, m.matrix(), cfg);
}

/// lambda_min of the M-congruent symmetric part; the metric margin of A.
/// Defined as -log_norm(-A, M) so the identity between the two is exact.
inline double min_sym_eig_in_metric(const Matrix& a, const Matrix& m, const SpectralProbeConfig& cfg = {}) {
  return -log_norm(-a, m, cfg);
}

inline double min_sym_eig_in_metric(const Matrix& a, const WeightedMetric& m,
                                    const SpectralProbeConfig& cfg = {}) {
  return min_sym_eig_in_metric(a, m.matrix(), cfg);
}

/// Spectral radius of a general square matrix (dense eigensolve).
inline double spectral_radius(const Matrix& a) {
  detail::require_square(a, "spectral_radius");
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw Error("spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace sgn
