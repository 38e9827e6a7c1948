#pragma once

// Two-player tabular Markov game with entropy regularization: exact policy
// evaluation, logit and primal pseudo-gradients, natural and Euclidean
// policy gradient, mirror-SGN certification on a logit cube, step sweeps.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sgn/games.hpp"
#include "sgn/mirror.hpp"
#include "sgn/parallel.hpp"
#include "sgn/region.hpp"
#include "sgn/rng.hpp"
#include "sgn/small_gain.hpp"

namespace sgn {

inline constexpr int kMarkovPlayers = 2;

/// Shared reward r(s, a1, a2), kernel P(s' | s, a1, a2), discount, entropy
/// weight and initial distribution. The return is scaled by (1 - gamma) so
/// it is an average reward; the entropy bonus is summed over states.
struct MarkovGameSpec {
  int n_states = 2;
  int n_actions = 2;
  std::vector<double> reward;      // [s][a1][a2]
  std::vector<double> transition;  // [s][a1][a2][s']
  double gamma = 0.9;
  double tau = 1.0;
  Vector initial_dist;

  [[nodiscard]] double return_scale() const { return 1.0 - gamma; }
  [[nodiscard]] Index player_dim() const { return static_cast<Index>(n_states) * n_actions; }
  [[nodiscard]] Index total_dim() const { return kMarkovPlayers * player_dim(); }

  [[nodiscard]] double r(int s, int a1, int a2) const { return reward[static_cast<std::size_t>((s * n_actions + a1) * n_actions + a2)]; }
  [[nodiscard]] double p(int s, int a1, int a2, int t) const {
    return transition[static_cast<std::size_t>(((s * n_actions + a1) * n_actions + a2) * n_states + t)];
  }
  double& p_ref(int s, int a1, int a2, int t) {
    return transition[static_cast<std::size_t>(((s * n_actions + a1) * n_actions + a2) * n_states + t)];
  }

  void validate() const {
    if (n_states < 1 || n_actions < 2) throw DomainError("MarkovGameSpec: need >= 1 state and >= 2 actions");
    const auto sa = static_cast<std::size_t>(n_states * n_actions * n_actions);
    if (reward.size() != sa) throw DimensionError("MarkovGameSpec: reward tensor has the wrong size");
    if (transition.size() != sa * static_cast<std::size_t>(n_states)) {
      throw DimensionError("MarkovGameSpec: transition tensor has the wrong size");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("MarkovGameSpec: gamma must lie in [0, 1)");
    if (!(tau >= 0.0)) throw DomainError("MarkovGameSpec: tau must be nonnegative");
    if (initial_dist.size() != n_states) throw DimensionError("MarkovGameSpec: initial distribution length");
    if (std::abs(initial_dist.sum() - 1.0) > 1e-12 || (initial_dist.array() < 0.0).any()) {
      throw DomainError("MarkovGameSpec: initial distribution must be a probability vector");
    }
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) {
        for (int b = 0; b < n_actions; ++b) {
          double row = 0.0;
          for (int t = 0; t < n_states; ++t) {
            if (p(s, a, b, t) < 0.0) throw DomainError("MarkovGameSpec: negative transition probability");
            row += p(s, a, b, t);
          }
          if (std::abs(row - 1.0) > 1e-12) throw DomainError("MarkovGameSpec: transition row does not sum to 1");
        }
      }
    }
  }

  [[nodiscard]] MirrorMap mirror_map() const {
    return MirrorMap::tabular(kMarkovPlayers, static_cast<std::size_t>(n_states), n_actions);
  }
};

/// Coordination game on two states: +1 for matching actions, -1 otherwise.
/// Joint action (s, s) keeps state s with probability `stickiness`; the
/// opposite coordinated action and mismatches flip it with that probability.
inline MarkovGameSpec default_coordination_game(double stickiness = 0.9, double gamma = 0.9, double tau = 1.0) {
  if (!(stickiness >= 0.0 && stickiness <= 1.0)) throw DomainError("stickiness must lie in [0, 1]");
  MarkovGameSpec g;
  g.gamma = gamma;
  g.tau = tau;
  g.reward.assign(8, 0.0);
  g.transition.assign(16, 0.0);
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        g.reward[static_cast<std::size_t>((s * 2 + a) * 2 + b)] = a == b ? 1.0 : -1.0;
        const double stay = (a == s && b == s) ? stickiness : 1.0 - stickiness;
        g.p_ref(s, a, b, s) = stay;
        g.p_ref(s, a, b, 1 - s) = 1.0 - stay;
      }
    }
  }
  g.initial_dist = Vector::Constant(2, 0.5);
  g.validate();
  return g;
}

inline MarkovGameSpec markov_spec_from_json(const nlohmann::json& j) {
  MarkovGameSpec g = default_coordination_game(j.value("stickiness", 0.9), j.value("gamma", 0.9), j.value("tau", 1.0));
  if (j.contains("initial_dist")) {
    const auto d = j.at("initial_dist").get<std::vector<double>>();
    g.initial_dist = Eigen::Map<const Vector>(d.data(), static_cast<Index>(d.size()));
  }
  g.validate();
  return g;
}

/// Per-(player, state) softmax of logits laid out [player][state][action].
inline Vector policy_probs(const MarkovGameSpec& g, const Vector& theta) {
  return g.mirror_map().to_primal(theta);
}

inline Vector center_logits(const MarkovGameSpec& g, const Vector& theta) {
  return g.mirror_map().center_gauge(theta);
}

struct ValueSolution {
  std::array<Vector, kMarkovPlayers> V;  // reward-only values
  std::array<Matrix, kMarkovPlayers> Q;  // Q_i(s, a_i), other player marginalized
  Vector occupancy;                      // rho^T (I - gamma P_pi)^{-1}, sums to 1/(1-gamma)
  std::array<double, kMarkovPlayers> entropy{};
  std::array<double, kMarkovPlayers> J{};
  double residual = 0.0;
};

/// Exact policy evaluation at primal policies pi (same layout as logits).
inline ValueSolution solve_values_primal(const MarkovGameSpec& g, const Vector& pi) {
  const int S = g.n_states, A = g.n_actions;
  if (pi.size() != g.total_dim()) throw DimensionError("solve_values: policy vector length");
  auto prob = [&](int i, int s, int a) { return pi(static_cast<Index>((i * S + s) * A + a)); };
  Matrix p_pi = Matrix::Zero(S, S);
  Vector r_pi = Vector::Zero(S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      for (int b = 0; b < A; ++b) {
        const double w = prob(0, s, a) * prob(1, s, b);
        r_pi(s) += w * g.r(s, a, b);
        for (int t = 0; t < S; ++t) p_pi(s, t) += w * g.p(s, a, b, t);
      }
    }
  }
  const Matrix sys = Matrix::Identity(S, S) - g.gamma * p_pi;
  Eigen::FullPivLU<Matrix> lu(sys);
  if (!lu.isInvertible()) throw Error("solve_values: Bellman system is singular");
  ValueSolution sol;
  const Vector v = lu.solve(r_pi);
  sol.residual = (sys * v - r_pi).cwiseAbs().maxCoeff();
  sol.occupancy = sys.transpose().fullPivLu().solve(g.initial_dist);
  Matrix q_full(S, A * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      for (int b = 0; b < A; ++b) {
        double cont = 0.0;
        for (int t = 0; t < S; ++t) cont += g.p(s, a, b, t) * v(t);
        q_full(s, a * A + b) = g.r(s, a, b) + g.gamma * cont;
      }
    }
  }
  for (int i = 0; i < kMarkovPlayers; ++i) {
    sol.V[static_cast<std::size_t>(i)] = v;
    Matrix q = Matrix::Zero(S, A);
    double ent = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        for (int b = 0; b < A; ++b) {
          if (i == 0) {
            q(s, a) += prob(1, s, b) * q_full(s, a * A + b);
          } else {
            q(s, a) += prob(0, s, b) * q_full(s, b * A + a);
          }
        }
        if (prob(i, s, a) > 0.0) ent -= prob(i, s, a) * std::log(prob(i, s, a));
      }
    }
    sol.Q[static_cast<std::size_t>(i)] = q;
    sol.entropy[static_cast<std::size_t>(i)] = ent;
    sol.J[static_cast<std::size_t>(i)] = g.return_scale() * g.initial_dist.dot(v) + g.tau * ent;
  }
  return sol;
}

inline ValueSolution solve_values(const MarkovGameSpec& g, const Vector& theta) {
  return solve_values_primal(g, policy_probs(g, theta));
}

/// Costs f_i = -J_i.
inline std::array<double, kMarkovPlayers> markov_costs(const MarkovGameSpec& g, const Vector& theta) {
  const auto sol = solve_values(g, theta);
  return {-sol.J[0], -sol.J[1]};
}

/// grad_{pi_i(s)} f_i = -c d(s) Q_i(s, .) + tau (log pi_i(s) + 1), treating
/// pi as unconstrained coordinates.
inline Vector primal_gradient(const MarkovGameSpec& g, const Vector& pi) {
  detail::require_interior(pi, "primal_gradient");
  const auto sol = solve_values_primal(g, pi);
  const int S = g.n_states, A = g.n_actions;
  Vector out(g.total_dim());
  for (int i = 0; i < kMarkovPlayers; ++i) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const auto k = static_cast<Index>((i * S + s) * A + a);
        out(k) = -g.return_scale() * sol.occupancy(s) * sol.Q[static_cast<std::size_t>(i)](s, a) + g.tau * (std::log(pi(k)) + 1.0);
      }
    }
  }
  return out;
}

enum class GradientMode { finite_difference, analytic };

inline constexpr double kFdStep = 1e-5;

/// Logit pseudo-gradient (grad_{theta_1} f_1, grad_{theta_2} f_2), centered.
/// finite_difference: Richardson-extrapolated central differences of the
/// exactly solved costs. analytic: chain rule through the softmax Jacobian,
/// F_s (grad_pi f)(s).
inline Vector pseudo_gradient(const MarkovGameSpec& g, const Vector& theta,
                              GradientMode mode = GradientMode::finite_difference) {
  if (theta.size() != g.total_dim()) throw DimensionError("pseudo_gradient: logit vector length");
  const MirrorMap psi = g.mirror_map();
  Vector out(g.total_dim());
  if (mode == GradientMode::analytic) {
    const Vector pi = psi.to_primal(theta);
    const Vector gp = primal_gradient(g, pi);
    psi.for_each_simplex([&](Index o, Index m) {
      out.segment(o, m) = fisher_block(pi.segment(o, m)) * gp.segment(o, m);
    });
    return psi.center_gauge(out);
  }
  const Index d = g.player_dim();
  for (int i = 0; i < kMarkovPlayers; ++i) {
    for (Index k = 0; k < d; ++k) {
      const Index idx = i * d + k;
      auto central = [&](double h) {
        Vector tp = theta, tm = theta;
        tp(idx) += h;
        tm(idx) -= h;
        return (markov_costs(g, tp)[static_cast<std::size_t>(i)] - markov_costs(g, tm)[static_cast<std::size_t>(i)]) / (2.0 * h);
      };
      out(idx) = (4.0 * central(0.5 * kFdStep) - central(kFdStep)) / 3.0;
    }
  }
  return psi.center_gauge(out);
}

namespace detail {

// Central-difference Jacobian of a vector field.
template <class Field>
Matrix fd_jacobian(const Field& field, const Vector& x, double h = kFdStep) {
  const Index n = x.size();
  Matrix j(field(x).size(), n);
  for (Index k = 0; k < n; ++k) {
    Vector xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    j.col(k) = (field(xp) - field(xm)) / (2.0 * h);
  }
  return j;
}

}  // namespace detail

/// The Markov game as a GameModel in logit coordinates. F is the analytic
/// pseudo-gradient; Hessian blocks are central differences of it, with the
/// own blocks symmetrized.
class MarkovGame final : public GameModel {
 public:
  explicit MarkovGame(MarkovGameSpec spec)
      : spec_(std::move(spec)), structure_(BlockStructure::identity({spec_.player_dim(), spec_.player_dim()})) {
    spec_.validate();
  }

  [[nodiscard]] const BlockStructure& structure() const override { return structure_; }
  [[nodiscard]] Vector eval_F(const Vector& theta) const override {
    return pseudo_gradient(spec_, theta, GradientMode::analytic);
  }
  [[nodiscard]] Matrix eval_JG(const Vector& theta) const override {
    Matrix j = -detail::fd_jacobian([&](const Vector& t) { return eval_F(t); }, theta);
    const Index d = spec_.player_dim();
    for (Index i = 0; i < kMarkovPlayers; ++i) j.block(i * d, i * d, d, d) = symmetric_part(j.block(i * d, i * d, d, d));
    return j;
  }
  [[nodiscard]] std::optional<Vector> equilibrium_hint() const override { return Vector::Zero(spec_.total_dim()); }
  [[nodiscard]] const MarkovGameSpec& spec() const noexcept { return spec_; }

 private:
  MarkovGameSpec spec_;
  BlockStructure structure_;
};

/// The same game in primal (policy-probability) coordinates, for mirror
/// bounds in the diag(1/x) chart.
class MarkovPrimalGame final : public GameModel {
 public:
  explicit MarkovPrimalGame(MarkovGameSpec spec)
      : spec_(std::move(spec)), structure_(BlockStructure::identity({spec_.player_dim(), spec_.player_dim()})) {
    spec_.validate();
  }

  [[nodiscard]] const BlockStructure& structure() const override { return structure_; }
  [[nodiscard]] Vector eval_F(const Vector& pi) const override { return primal_gradient(spec_, pi); }
  [[nodiscard]] Matrix eval_JG(const Vector& pi) const override {
    Matrix j = -detail::fd_jacobian([&](const Vector& x) { return eval_F(x); }, pi, 1e-6);
    const Index d = spec_.player_dim();
    for (Index i = 0; i < kMarkovPlayers; ++i) j.block(i * d, i * d, d, d) = symmetric_part(j.block(i * d, i * d, d, d));
    return j;
  }
  [[nodiscard]] std::optional<Vector> equilibrium_hint() const override {
    return Vector::Constant(spec_.total_dim(), 1.0 / spec_.n_actions);
  }

 private:
  MarkovGameSpec spec_;
  BlockStructure structure_;
};

/// theta <- theta - eta U (U^T F_s U + 1e-10 I)^{-1} U^T grad, per (player, state), then centered.
inline Vector npg_step(const MarkovGameSpec& g, const Vector& theta, double eta) {
  if (!(eta > 0.0)) throw DomainError("npg_step: step must be positive");
  const MirrorMap psi = g.mirror_map();
  const Vector grad = pseudo_gradient(g, theta, GradientMode::analytic);
  const Vector pi = psi.to_primal(theta);
  const Matrix u = gauge_basis(g.n_actions);
  Vector next = theta;
  psi.for_each_simplex([&](Index o, Index m) {
    Matrix fr = u.transpose() * fisher_block(pi.segment(o, m)) * u;
    fr.diagonal().array() += kGaugeRidge;
    next.segment(o, m) -= eta * (u * fr.ldlt().solve(u.transpose() * grad.segment(o, m)));
  });
  return psi.center_gauge(next);
}

/// Plain gradient descent on centered logits.
inline Vector epg_step(const MarkovGameSpec& g, const Vector& theta, double eta) {
  if (!(eta > 0.0)) throw DomainError("epg_step: step must be positive");
  return center_logits(g, theta - eta * pseudo_gradient(g, theta, GradientMode::analytic));
}

enum class PolicyMethod { npg, epg };

inline const char* to_string(PolicyMethod m) { return m == PolicyMethod::npg ? "npg" : "epg"; }

inline Vector policy_step(const MarkovGameSpec& g, const Vector& theta, double eta, PolicyMethod m) {
  return m == PolicyMethod::npg ? npg_step(g, theta, eta) : epg_step(g, theta, eta);
}

/// Natural-gradient field in gauge-reduced logit coordinates y (theta = U y).
inline Vector reduced_natural_field(const MarkovGameSpec& g, const Vector& y) {
  const MirrorMap psi = g.mirror_map();
  const Matrix u = gauge_basis(g.n_actions);
  const Index red = g.n_actions - 1;
  Vector theta(g.total_dim());
  Index c = 0;
  psi.for_each_simplex([&](Index o, Index m) {
    theta.segment(o, m) = u * y.segment(c, red);
    c += red;
  });
  const Vector grad = pseudo_gradient(g, theta, GradientMode::analytic);
  const Vector pi = psi.to_primal(theta);
  Vector out(y.size());
  c = 0;
  psi.for_each_simplex([&](Index o, Index m) {
    Matrix fr = u.transpose() * fisher_block(pi.segment(o, m)) * u;
    fr.diagonal().array() += kGaugeRidge;
    out.segment(c, red) = -fr.ldlt().solve(u.transpose() * grad.segment(o, m));
    c += red;
  });
  return out;
}

/// ||M^{1/2} J M^{-1/2}|| for the Jacobian J of the reduced natural-gradient
/// field at theta, with M = diag(w_i Fisher_r,i(theta)).
inline double natural_field_lipschitz(const MarkovGameSpec& g, const Vector& theta, const Vector& w) {
  const MirrorMap psi = g.mirror_map();
  const Index red_player = static_cast<Index>(g.n_states) * (g.n_actions - 1);
  Vector y(kMarkovPlayers * red_player);
  Matrix m = Matrix::Zero(y.size(), y.size());
  for (std::size_t i = 0; i < kMarkovPlayers; ++i) {
    const Matrix ui = psi.gauge(i);
    const auto ii = static_cast<Index>(i);
    y.segment(ii * red_player, red_player) = ui.transpose() * theta.segment(ii * g.player_dim(), g.player_dim());
    m.block(ii * red_player, ii * red_player, red_player, red_player) =
        w(ii) * symmetric_part(ui.transpose() * psi.metric(i, theta, Chart::logit) * ui);
  }
  const Matrix j = detail::fd_jacobian([&](const Vector& yy) { return reduced_natural_field(g, yy); }, y);
  const Matrix b = spd_sqrt(m) * j * spd_inv_sqrt(m);
  return Eigen::JacobiSVD<Matrix>(b).singularValues()(0);
}

struct MarkovCertificate {
  MirrorBounds bounds;
  Vector w;
  double r_star = 1.0;
  double alpha_star = 0.0;
  bool feasible = false;
  double beta = 0.0;
  double eta_sgn = 0.0;
  double half_width = 0.0;
  std::size_t sample_count = 0;
};

inline std::vector<Vector> markov_cube_samples(const MarkovGameSpec& g, double half_width, std::size_t budget,
                                               std::uint64_t seed) {
  auto pts = sample_region(RegionSpec::cube(Vector::Zero(g.total_dim()), half_width), budget, seed);
  for (auto& p : pts) p = center_logits(g, p);
  return pts;
}

/// Mirror-SGN certificate on the logit cube ||theta - theta*||_inf <= half_width
/// around theta* = 0: Fisher-geometry block bounds, best weight ratio,
/// natural-field Lipschitz bound beta in M(w), and eta_SGN = 2 alpha / beta^2.
inline MarkovCertificate certify_markov(const MarkovGameSpec& g, double half_width = 0.1, std::size_t budget = 2000,
                                        std::uint64_t seed = 0, int threads = 1) {
  const MarkovGame game(g);
  const auto samples = markov_cube_samples(g, half_width, budget, seed);
  MarkovCertificate mc;
  mc.half_width = half_width;
  mc.sample_count = samples.size();
  mc.bounds = mirror_block_bounds(game, g.mirror_map(), Chart::logit, Vector::Zero(g.total_dim()), samples, threads);
  const auto ws = optimize_weights(mc.bounds.bounds, WeightStrategy::two_player_analytic);
  mc.w = ws.w;
  mc.r_star = ws.w(1);
  mc.alpha_star = ws.alpha_star;
  mc.feasible = ws.feasible;
  std::vector<double> betas(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) { betas[k] = natural_field_lipschitz(g, samples[k], mc.w); });
  mc.beta = *std::max_element(betas.begin(), betas.end());
  if (mc.feasible && mc.alpha_star > 0.0) mc.eta_sgn = 2.0 * mc.alpha_star / (mc.beta * mc.beta);
  return mc;
}

/// alpha*(r) = lambda_min(H((1, r))) on the mirror bounds.
inline std::vector<double> markov_timescale_band(const MirrorBounds& mb, const std::vector<double>& ratio_grid) {
  std::vector<double> out;
  out.reserve(ratio_grid.size());
  for (double r : ratio_grid) {
    if (!(r > 0.0)) throw DomainError("markov_timescale_band: ratios must be positive");
    Vector w(2);
    w << 1.0, r;
    out.push_back(mirror_sgn_margin(mb, w));
  }
  return out;
}

struct PolicyTrajectory {
  PolicyMethod method = PolicyMethod::npg;
  double eta = 0.0;
  std::vector<double> V, dist, grad_norm;
  bool diverged = false;
};

/// Runs `steps` policy updates from theta0, recording the weighted KL
/// Lyapunov value, ||theta - theta*||_2 and ||F(theta)||_2 before each step.
inline PolicyTrajectory run_policy(const MarkovGameSpec& g, const Vector& theta0, double eta, PolicyMethod method,
                                   std::size_t steps, const Vector& w, const Vector& theta_star) {
  const MirrorMap psi = g.mirror_map();
  const Vector x_star = psi.to_primal(theta_star);
  PolicyTrajectory tr;
  tr.method = method;
  tr.eta = eta;
  Vector theta = center_logits(g, theta0);
  for (std::size_t k = 0; k <= steps; ++k) {
    if (!theta.allFinite()) {
      tr.diverged = true;
      break;
    }
    tr.V.push_back(lyapunov_V(psi, psi.to_primal(theta), x_star, w));
    tr.dist.push_back((theta - theta_star).norm());
    tr.grad_norm.push_back(pseudo_gradient(g, theta, GradientMode::analytic).norm());
    if (k < steps) theta = policy_step(g, theta, eta, method);
  }
  return tr;
}

struct SweepOptions {
  std::size_t seeds = 20;
  std::size_t max_steps = 500;
  double grad_tol = 1e-6;
  double dist_tol = 1.0;
  double init_half_width = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SweepRow {
  double multiplier = 0.0;
  PolicyMethod method = PolicyMethod::npg;
  double fraction = 0.0;
};

/// Seeded initial logits: uniform in [-0.5, 0.5], centered.
inline Vector sweep_initial_logits(const MarkovGameSpec& g, std::uint64_t base, std::size_t index,
                                   double half_width = 0.5) {
  std::mt19937_64 rng(mix_seed(base, index));
  std::uniform_real_distribution<double> ud(-half_width, half_width);
  Vector t(g.total_dim());
  for (Index k = 0; k < t.size(); ++k) t(k) = ud(rng);
  return center_logits(g, t);
}

/// True when the run meets ||F|| < grad_tol at some step or ends within
/// dist_tol of theta* = 0.
inline bool policy_run_converges(const MarkovGameSpec& g, Vector theta, double eta, PolicyMethod method,
                                 const SweepOptions& o) {
  for (std::size_t k = 0; k < o.max_steps; ++k) {
    const double gn = pseudo_gradient(g, theta, GradientMode::analytic).norm();
    if (!std::isfinite(gn)) return false;
    if (gn < o.grad_tol) return true;
    theta = policy_step(g, theta, eta, method);
    if (!theta.allFinite()) return false;
  }
  return theta.norm() < o.dist_tol;
}

/// Convergent fraction of seeded runs per method and multiplier of eta_SGN.
inline std::vector<SweepRow> step_sweep(const MarkovGameSpec& g, double eta_sgn, const std::vector<double>& multipliers,
                                        const std::vector<PolicyMethod>& methods, const SweepOptions& o = {}) {
  if (!(eta_sgn > 0.0)) throw DomainError("step_sweep: eta_SGN must be positive");
  if (o.seeds < 1) throw DomainError("step_sweep: need at least one seed");
  for (double m : multipliers) {
    if (!(m > 0.0)) throw DomainError("step_sweep: multipliers must be positive");
  }
  const std::size_t cells = multipliers.size() * methods.size();
  std::vector<int> hits(cells * o.seeds, 0);
  parallel_for(cells * o.seeds, o.threads, [&](std::size_t t) {
    const std::size_t cell = t / o.seeds, s = t % o.seeds;
    const double eta = multipliers[cell / methods.size()] * eta_sgn;
    const PolicyMethod m = methods[cell % methods.size()];
    hits[t] = policy_run_converges(g, sweep_initial_logits(g, o.seed, s, o.init_half_width), eta, m, o) ? 1 : 0;
  });
  std::vector<SweepRow> rows;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    int sum = 0;
    for (std::size_t s = 0; s < o.seeds; ++s) sum += hits[cell * o.seeds + s];
    rows.push_back({multipliers[cell / methods.size()], methods[cell % methods.size()],
                    static_cast<double>(sum) / static_cast<double>(o.seeds)});
  }
  return rows;
}

}  // namespace sgn
