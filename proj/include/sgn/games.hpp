#pragma once

// Game models exposing pseudo-gradients, Jacobians and Hessian blocks, plus
// the quadratic and LQ families used by the experiments.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgn/metric.hpp"
#include "sgn/rng.hpp"
#include "sgn/small_gain.hpp"

namespace sgn {

/// Evaluation surface of an N-player game with costs f_i. F stacks the
/// per-player gradients, G = -F drives the dynamics.
class GameModel {
 public:
  virtual ~GameModel() = default;

  [[nodiscard]] virtual const BlockStructure& structure() const = 0;
  [[nodiscard]] virtual Vector eval_F(const Vector& x) const = 0;
  [[nodiscard]] virtual Matrix eval_JG(const Vector& x) const = 0;

  // d^2 f_i / dx_i dx_j, read off -J_G by default.
  [[nodiscard]] virtual Matrix hess_block(std::size_t i, std::size_t j, const Vector& x) const {
    const auto& s = structure();
    const Matrix jg = eval_JG(x);
    return -jg.block(s.offset(i), s.offset(j), s.dim(i), s.dim(j));
  }

  [[nodiscard]] virtual std::optional<Vector> equilibrium_hint() const { return std::nullopt; }

  [[nodiscard]] Vector eval_G(const Vector& x) const { return -eval_F(x); }
  [[nodiscard]] std::size_t num_players() const { return structure().num_players(); }
  [[nodiscard]] Index total_dim() const { return structure().total_dim(); }
};

/// F(x) = H x.
class QuadraticGame final : public GameModel {
 public:
  QuadraticGame(Matrix h, const std::vector<Index>& dims)
      : h_(std::move(h)), structure_(BlockStructure::identity(dims)) {
    detail::require_square(h_, "QuadraticGame");
    if (h_.rows() != structure_.total_dim()) {
      throw DimensionError("QuadraticGame: H is " + std::to_string(h_.rows()) + "x" + std::to_string(h_.cols()) +
                           " but player dimensions sum to " + std::to_string(structure_.total_dim()));
    }
  }

  [[nodiscard]] const BlockStructure& structure() const override { return structure_; }
  [[nodiscard]] Vector eval_F(const Vector& x) const override {
    if (x.size() != h_.cols()) throw DimensionError("QuadraticGame::eval_F: state dimension mismatch");
    return h_ * x;
  }
  [[nodiscard]] Matrix eval_JG(const Vector&) const override { return -h_; }
  [[nodiscard]] Matrix hess_block(std::size_t i, std::size_t j, const Vector&) const override {
    return block(i, j);
  }
  [[nodiscard]] std::optional<Vector> equilibrium_hint() const override {
    return Vector::Zero(h_.rows());
  }

  [[nodiscard]] const Matrix& H() const noexcept { return h_; }
  [[nodiscard]] Matrix block(std::size_t i, std::size_t j) const {
    return h_.block(structure_.offset(i), structure_.offset(j), structure_.dim(i), structure_.dim(j));
  }

 private:
  Matrix h_;
  BlockStructure structure_;
};

/// H = [[1, 10], [0.05, 1]] on R x R.
inline QuadraticGame two_player_scalar_example(double a = 10.0, double b = 0.05, double mu1 = 1.0, double mu2 = 1.0) {
  Matrix h(2, 2);
  h << mu1, a, b, mu2;
  return QuadraticGame(h, {1, 1});
}

struct LqSpec {
  double lambda = 1.0;
  double a = 10.0;
  double b = 0.05;
  double mu0 = 1.0;
  Index block_dim = 32;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !(mu0 > 0.0)) throw DomainError("LqSpec: a, b and mu0 must be positive");
    if (!(lambda >= 0.0)) throw DomainError("LqSpec: lambda must be nonnegative");
    if (block_dim < 1) throw DomainError("LqSpec: block_dim must be >= 1");
  }

  // w2/w1 = a/b equalizes the two normalized couplings.
  [[nodiscard]] Vector balanced_weights() const {
    Vector w(2);
    w << 1.0, a / b;
    return w;
  }
};

/// H(lambda) = [[mu0 I, lambda a R], [lambda b R^T, mu0 I]].
inline QuadraticGame canonical_lq(const LqSpec& spec) {
  spec.validate();
  const Index n = spec.block_dim;
  const Matrix r = random_orthogonal(n, spec.seed);
  Eigen::JacobiSVD<Matrix> svd(r);
  if (std::abs(svd.singularValues()(0) - 1.0) > 1e-12) throw Error("canonical_lq: base matrix is not orthogonal");
  Matrix h = Matrix::Zero(2 * n, 2 * n);
  h.topLeftCorner(n, n) = spec.mu0 * Matrix::Identity(n, n);
  h.bottomRightCorner(n, n) = spec.mu0 * Matrix::Identity(n, n);
  h.topRightCorner(n, n) = spec.lambda * spec.a * r;
  h.bottomLeftCorner(n, n) = spec.lambda * spec.b * r.transpose();
  return QuadraticGame(h, {n, n});
}

/// Curvatures mu_i = lambda_min of H_ii in the P_i metric and couplings
/// L_ij = ||P_i^{1/2} H_ij P_j^{-1/2}||_2. Exact for quadratic games.
inline BlockBounds exact_block_bounds(const QuadraticGame& game, const BlockStructure& p) {
  const auto& s = game.structure();
  if (p.num_players() != s.num_players() || p.dims() != s.dims()) {
    throw DimensionError("exact_block_bounds: metric structure does not match game structure");
  }
  const auto n = static_cast<Index>(s.num_players());
  BlockBounds b{Vector(n), Matrix::Zero(n, n)};
  for (std::size_t i = 0; i < s.num_players(); ++i) {
    b.mu(static_cast<Index>(i)) = min_sym_eig_in_metric(game.block(i, i), p.block(i));
    for (std::size_t j = 0; j < s.num_players(); ++j) {
      if (i != j) b.L(static_cast<Index>(i), static_cast<Index>(j)) = mixed_op_norm(game.block(i, j), p.block(j), p.block(i));
    }
  }
  return b;
}

inline BlockBounds exact_block_bounds(const QuadraticGame& game) {
  return exact_block_bounds(game, game.structure());
}

/// A'_ij = A_ij + eps ||A_ij||_2 N_ij / ||N_ij||_2 for every cross block,
/// each with its own Gaussian stream derived from `seed`.
inline QuadraticGame perturb_couplings(const QuadraticGame& game, double eps, std::uint64_t seed) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("perturb_couplings: eps must lie in [0, 1]");
  if (eps == 0.0) return game;
  const auto& s = game.structure();
  Matrix h = game.H();
  const std::size_t n = s.num_players();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Matrix a = game.block(i, j);
      std::mt19937_64 rng(mix_seed(seed, i * n + j));
      const Matrix noise = gaussian_matrix(a.rows(), a.cols(), rng);
      const double a_norm = Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
      const double n_norm = Eigen::JacobiSVD<Matrix>(noise).singularValues()(0);
      h.block(s.offset(i), s.offset(j), s.dim(i), s.dim(j)) = a + (eps * a_norm / n_norm) * noise;
    }
  }
  return QuadraticGame(std::move(h), s.dims());
}

struct EnsembleGame {
  std::size_t instance = 0;
  double lambda = 0.0;
  QuadraticGame game;
};

inline constexpr double kEnsembleCurvatureLo = 0.5;
inline constexpr double kEnsembleCurvatureHi = 1.5;

/// Heterogeneous two-player LQ games: random SPD curvature blocks with
/// spectrum in [0.5, 1.5] and independent orthogonal couplings
/// A12 = lambda a R1, A21 = lambda b R2^T. Instance k uses the same draws at
/// every lambda in the grid.
inline std::vector<EnsembleGame> random_lq_ensemble(std::size_t count, std::uint64_t seed,
                                                    const std::vector<double>& lambda_grid,
                                                    const LqSpec& base = {}) {
  if (count < 1) throw DomainError("random_lq_ensemble: count must be >= 1");
  base.validate();
  const Index n = base.block_dim;
  std::vector<EnsembleGame> out;
  out.reserve(count * lambda_grid.size());
  for (std::size_t k = 0; k < count; ++k) {
    std::mt19937_64 rng(mix_seed(seed, k));
    std::uniform_real_distribution<double> ud(kEnsembleCurvatureLo, kEnsembleCurvatureHi);
    Matrix q[2];
    for (auto& qi : q) {
      const Matrix u = random_orthogonal(n, rng);
      Vector eig(n);
      for (Index t = 0; t < n; ++t) eig(t) = ud(rng);
      qi = u * eig.asDiagonal() * u.transpose();
      qi = symmetric_part(qi);
    }
    const Matrix r1 = random_orthogonal(n, rng);
    const Matrix r2 = random_orthogonal(n, rng);
    for (double lam : lambda_grid) {
      Matrix h(2 * n, 2 * n);
      h.topLeftCorner(n, n) = q[0];
      h.bottomRightCorner(n, n) = q[1];
      h.topRightCorner(n, n) = lam * base.a * r1;
      h.bottomLeftCorner(n, n) = lam * base.b * r2.transpose();
      out.push_back({k, lam, QuadraticGame(std::move(h), {n, n})});
    }
  }
  return out;
}

/// Quadratic game from a JSON spec:
///   {"type": "scalar2p", "a": 10, "b": 0.05}
///   {"type": "canonical_lq", "lambda": 1, "a": 10, "b": 0.05, "mu0": 1, "block_dim": 32, "seed": 1}
///   {"type": "ensemble", "seed": 7, "instance": 3, "lambda": 1.2, "count": 50}
inline LqSpec lq_spec_from_json(const nlohmann::json& j) {
  LqSpec s;
  s.lambda = j.value("lambda", s.lambda);
  s.a = j.value("a", s.a);
  s.b = j.value("b", s.b);
  s.mu0 = j.value("mu0", s.mu0);
  s.block_dim = j.value("block_dim", s.block_dim);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

inline QuadraticGame quadratic_game_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "scalar2p") {
    return two_player_scalar_example(j.value("a", 10.0), j.value("b", 0.05), j.value("mu1", 1.0), j.value("mu2", 1.0));
  }
  if (type == "canonical_lq") return canonical_lq(lq_spec_from_json(j));
  if (type == "ensemble") {
    const auto instance = j.value<std::size_t>("instance", 0);
    const auto count = j.value<std::size_t>("count", instance + 1);
    if (instance >= count) throw DomainError("ensemble game: instance index out of range");
    LqSpec base = lq_spec_from_json(j);
    auto games = random_lq_ensemble(count, j.value<std::uint64_t>("seed", 0), {base.lambda}, base);
    return std::move(games[instance].game);
  }
  throw DomainError("unknown game type '" + type + "'");
}

}  // namespace sgn
