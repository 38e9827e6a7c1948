#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sgn/markov.hpp"
#include "sgn/mirror.hpp"
#include "support/oracles.hpp"

using namespace sgn;
using Catch::Approx;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

Vector random_simplex(Index m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  Vector z(m);
  for (Index k = 0; k < m; ++k) z(k) = ud(rng);
  return softmax(z);
}

// f_i = tau * sum x log x on each player's simplices, in primal coordinates.
class EntropyGame final : public GameModel {
 public:
  EntropyGame(MirrorMap psi, double tau) : psi_(std::move(psi)), tau_(tau) {}
  [[nodiscard]] const BlockStructure& structure() const override { return psi_.structure(); }
  [[nodiscard]] Vector eval_F(const Vector& x) const override { return tau_ * (x.array().log() + 1.0).matrix(); }
  [[nodiscard]] Matrix eval_JG(const Vector& x) const override { return -tau_ * Matrix(x.cwiseInverse().asDiagonal()); }

 private:
  MirrorMap psi_;
  double tau_;
};

// certify_markov at the default settings, computed once
const MarkovCertificate& default_certificate() {
  static const MarkovCertificate mc = certify_markov(default_coordination_game(), 0.1, 2000, 0, 4);
  return mc;
}

Vector random_logits(const MarkovGameSpec& g, std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> ud(-half_width, half_width);
  Vector t(g.total_dim());
  for (Index k = 0; k < t.size(); ++k) t(k) = ud(rng);
  return t;
}

}  // namespace

TEST_CASE("bregman_div examples", "[mirror]") {
  const Vector u = v2(0.5, 0.5);
  CHECK(bregman_div(u, u) == 0.0);
  CHECK(bregman_div(u, v2(0.9, 0.1)) == Approx(0.5108).margin(1e-4));
  CHECK(bregman_div(u, v2(0.9, 0.1)) == Approx(static_cast<double>(oracle::kl(u, v2(0.9, 0.1)))).epsilon(1e-14));
  CHECK_THROWS_AS(bregman_div(u, v2(1.0, 0.0)), DomainError);

  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const Index m = 2 + t % 4;
    CHECK(bregman_div(random_simplex(m, rng), random_simplex(m, rng)) >= 0.0);
  }
}

TEST_CASE("softmax and logits", "[mirror]") {
  CHECK(softmax(Vector::Zero(3)).isApprox(Vector::Constant(3, 1.0 / 3.0)));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const Vector z = oracle::random_matrix(4, 1, rng).col(0) * 3.0;
    const Vector x = softmax(z);
    CHECK(std::abs(x.sum() - 1.0) <= 1e-14);
    CHECK((centered_logits(x) - center(z)).norm() <= 1e-12);
  }
  const Vector big = (Vector(3) << 500.0, -500.0, 0.0).finished();
  const Vector x = softmax(big);
  CHECK(x.allFinite());
  CHECK((x.array() >= 1e-300).all());
  const auto ld = oracle::softmax_ld(big);
  CHECK(x(0) == Approx(static_cast<double>(ld[0])).epsilon(1e-15));
  CHECK(x(2) == Approx(static_cast<double>(ld[2])).epsilon(1e-12));
}

TEST_CASE("fisher_block examples", "[mirror]") {
  const Matrix f = fisher_block(v2(0.5, 0.5));
  Matrix expected(2, 2);
  expected << 0.25, -0.25, -0.25, 0.25;
  CHECK((f - expected).norm() < 1e-15);
  CHECK_THROWS_AS(fisher_block(v2(1.0, 0.0)), DomainError);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const Index m = 2 + t % 4;
    const Vector pi = random_simplex(m, rng);
    const Matrix fb = fisher_block(pi);
    CHECK(fb.rowwise().sum().norm() < 1e-15);
    const Matrix u = gauge_basis(m);
    CHECK(oracle::lambda_min(u.transpose() * fb * u) > 0.0);

    // Hessian of log-sum-exp: Richardson differences of its gradient (softmax)
    const Vector z = pi.array().log().matrix();
    Matrix hess(m, m);
    for (Index k = 0; k < m; ++k) {
      auto central = [&](double h) {
        Vector zp = z, zm = z;
        zp(k) += h;
        zm(k) -= h;
        return Vector((softmax(zp) - softmax(zm)) / (2.0 * h));
      };
      hess.col(k) = (4.0 * central(5e-4) - central(1e-3)) / 3.0;
    }
    CHECK((hess - fb).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("mirror block bounds of a pure entropy game", "[mirror]") {
  const MirrorMap psi({{2, 3}, {4}});
  const EntropyGame g(psi, 0.7);
  std::mt19937_64 rng(4);
  std::vector<Vector> samples;
  for (int t = 0; t < 5; ++t) {
    Vector x(psi.total_dim());
    psi.for_each_simplex([&](Index o, Index m) { x.segment(o, m) = random_simplex(m, rng); });
    samples.push_back(x);
  }
  const MirrorBounds mb = mirror_block_bounds(g, psi, Chart::primal, samples[0], samples);
  CHECK(mb.bounds.mu(0) == Approx(0.7).epsilon(1e-10));
  CHECK(mb.bounds.mu(1) == Approx(0.7).epsilon(1e-10));
  CHECK(mb.bounds.L.norm() == 0.0);
  CHECK(mirror_sgn_margin(mb, v2(1.0, 5.0)) == Approx(0.7).epsilon(1e-10));
}

TEST_CASE("generalized eigenvalue matches the congruence path", "[mirror]") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 5;
    const Matrix a = symmetric_part(oracle::random_matrix(n, n, rng));
    const Matrix b = oracle::random_spd(n, rng);
    const Matrix r = spd_inv_sqrt(b);
    CHECK(generalized_min_eig(a, b) == Approx(oracle::lambda_min(r * a * r)).margin(1e-10));
  }
}

TEST_CASE("mirror margin symmetry", "[mirror]") {
  MirrorBounds mb{BlockBounds{v2(0.9, 0.9), Matrix::Zero(2, 2)}, Vector::Constant(4, 0.5)};
  mb.bounds.L(0, 1) = mb.bounds.L(1, 0) = 0.4;
  const WeightSearchResult r = optimize_weights(mb.bounds, WeightStrategy::two_player_analytic);
  CHECK(r.w(1) == Approx(1.0).margin(1e-4));
  CHECK(mirror_sgn_margin(mb, r.w) == Approx(0.5).margin(1e-9));
}

TEST_CASE("mirror_step examples", "[mirror]") {
  const MirrorMap psi = MirrorMap::tabular(1, 1, 2);
  const Vector z = center(v2(0.3, -0.1));
  const PrimalGradient zero = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
  CHECK((mirror_step(psi, z, zero, 0.5, MirrorMethod::euler) - z).norm() < 1e-15);
  CHECK((mirror_step(psi, z, zero, 0.5, MirrorMethod::rk4) - z).norm() < 1e-15);
  CHECK_THROWS_AS(mirror_step(psi, z, zero, 0.0, MirrorMethod::euler), DomainError);

  const double tau = 1.0;
  const PrimalGradient ent = [&](const Vector& x) { return Vector(tau * (x.array().log() + 1.0).matrix()); };
  const Vector u = v2(0.5, 0.5);
  for (double eta : {0.01, 0.05, 0.1}) {
    Vector y = center(v2(1.0, -1.0));
    for (int k = 0; k < 20; ++k) {
      const double before = bregman_div(u, psi.to_primal(y));
      y = mirror_step(psi, y, ent, eta, MirrorMethod::euler);
      CHECK(bregman_div(u, psi.to_primal(y)) <= (1.0 - eta * tau) * before);
    }
  }
}

TEST_CASE("lyapunov_V properties", "[mirror]") {
  const MirrorMap psi = MirrorMap::tabular(2, 2, 2);
  std::mt19937_64 rng(6);
  const Vector w = v2(1.0, 2.5);
  for (int t = 0; t < 100; ++t) {
    Vector x(8), xs(8);
    psi.for_each_simplex([&](Index o, Index m) {
      x.segment(o, m) = random_simplex(m, rng);
      xs.segment(o, m) = random_simplex(m, rng);
    });
    CHECK(lyapunov_V(psi, xs, xs, w) == 0.0);
    const double v = lyapunov_V(psi, x, xs, w);
    CHECK(v >= 0.0);
    const Vector d = psi.player_divergences(x, xs);
    CHECK(v == Approx(w(0) * d(0) + w(1) * d(1)).epsilon(1e-14));
    // gauge shift of the logits leaves V unchanged
    Vector z = x.array().log().matrix();
    psi.for_each_simplex([&](Index o, Index m) { z.segment(o, m).array() += 3.0 * (o + 1) - 7.0; });
    CHECK(lyapunov_V(psi, psi.to_primal(z), xs, w) == Approx(v).epsilon(1e-10).margin(1e-14));
  }
}

TEST_CASE("default coordination game", "[markov]") {
  const MarkovGameSpec g = default_coordination_game();
  for (int s = 0; s < 2; ++s) {
    CHECK(g.r(s, 0, 0) == 1.0);
    CHECK(g.r(s, 1, 1) == 1.0);
    CHECK(g.r(s, 0, 1) == -1.0);
    CHECK(g.r(s, 1, 0) == -1.0);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        CHECK(g.p(s, a, b, 0) + g.p(s, a, b, 1) == Approx(1.0).epsilon(1e-15));
        CHECK(g.r(s, a, b) == g.r(s, b, a));
        for (int t = 0; t < 2; ++t) CHECK(g.p(s, a, b, t) == g.p(s, b, a, t));
      }
    }
  }
  CHECK(g.p(0, 0, 0, 0) == 0.9);
  CHECK(g.p(0, 1, 1, 1) == Approx(0.9));
  CHECK(g.p(1, 0, 1, 0) == Approx(0.9));
  MarkovGameSpec bad = g;
  bad.p_ref(0, 0, 0, 0) = 0.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("solve_values examples", "[markov]") {
  const MarkovGameSpec g = default_coordination_game(1.0, 0.9, 0.0);
  // both players pick action s in state s: the state never changes
  Vector pi(8);
  pi << 1, 0, 0, 1, 1, 0, 0, 1;
  const ValueSolution det = solve_values_primal(g, pi);
  CHECK(det.V[0](0) == Approx(10.0).epsilon(1e-12));
  CHECK(det.V[1](1) == Approx(10.0).epsilon(1e-12));

  const MarkovGameSpec d = default_coordination_game();
  const ValueSolution uni = solve_values(d, Vector::Zero(8));
  CHECK(uni.J[0] == uni.J[1]);
  CHECK(uni.residual <= 1e-12);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const ValueSolution s = solve_values(d, random_logits(d, rng, 1.0));
    CHECK(s.residual <= 1e-12);
    CHECK((s.occupancy.array() >= 0.0).all());
    CHECK(s.occupancy.sum() == Approx(1.0 / (1.0 - d.gamma)).epsilon(1e-12));
  }
}

TEST_CASE("pseudo_gradient checks", "[markov]") {
  const MarkovGameSpec g = default_coordination_game();
  CHECK(pseudo_gradient(g, Vector::Zero(8)).norm() <= 1e-6);
  CHECK(pseudo_gradient(g, Vector::Zero(8), GradientMode::analytic).norm() <= 1e-6);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const Vector th = random_logits(g, rng, 1.0);
    const Vector fd = pseudo_gradient(g, th);
    const Vector an = pseudo_gradient(g, th, GradientMode::analytic);
    CHECK((fd - an).norm() <= 1e-4 * std::max(1.0, an.norm()));
    Vector shifted = th;
    shifted.segment(2, 2).array() += 1.7;
    shifted.segment(4, 2).array() -= 0.4;
    CHECK((pseudo_gradient(g, shifted) - fd).norm() <= 1e-8);
    CHECK(std::abs(solve_values(g, shifted).J[0] - solve_values(g, th).J[0]) <= 1e-12);
  }
}

TEST_CASE("policy steps", "[markov]") {
  const MarkovGameSpec g = default_coordination_game();
  CHECK((npg_step(g, Vector::Zero(8), 0.2) - Vector::Zero(8)).norm() <= 1e-9);
  CHECK_THROWS_AS(npg_step(g, Vector::Zero(8), 0.0), DomainError);
  const MirrorMap psi = g.mirror_map();
  const PrimalGradient grad = [&](const Vector& x) { return primal_gradient(g, x); };
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const Vector th = center_logits(g, random_logits(g, rng, 0.5));
    const Vector npg = npg_step(g, th, 0.15);
    const Vector dual = mirror_step(psi, th, grad, 0.15, MirrorMethod::euler);
    CHECK((npg - dual).cwiseAbs().maxCoeff() <= 1e-10);
    const Vector epg = epg_step(g, th, 0.15);
    CHECK((epg - center_logits(g, th - 0.15 * pseudo_gradient(g, th, GradientMode::analytic))).norm() < 1e-15);
  }
}

TEST_CASE("Markov certificate structure", "[markov]") {
  const MarkovCertificate& mc = default_certificate();
  CHECK(mc.sample_count == 2000);
  CHECK(mc.feasible);
  CHECK(mc.bounds.bounds.mu.minCoeff() > 0.0);
  CHECK(mc.bounds.bounds.mu(0) == Approx(mc.bounds.bounds.mu(1)).epsilon(0.05));
  CHECK(mc.bounds.bounds.L(0, 1) == Approx(mc.bounds.bounds.L(1, 0)).epsilon(0.05));
  CHECK(mc.r_star == Approx(1.0).epsilon(0.1));
  CHECK(mc.alpha_star > 0.0);
  CHECK(mc.beta >= mc.alpha_star);
  CHECK(mc.eta_sgn == 2.0 * mc.alpha_star / (mc.beta * mc.beta));
  for (const auto& s : markov_cube_samples(default_coordination_game(), 0.1, 2000, 0)) {
    CHECK(s.cwiseAbs().maxCoeff() <= 0.2 + 1e-12);
    CHECK(std::abs(s.segment(0, 2).sum()) < 1e-14);
  }
}

TEST_CASE("Markov timescale band", "[markov]") {
  const MarkovCertificate& mc = default_certificate();
  const auto at = [&](double r) { return markov_timescale_band(mc.bounds, {r})[0]; };
  CHECK(at(1.0) > 0.0);
  CHECK(at(1e3) < 0.0);
  CHECK(at(1e-3) < 0.0);
  std::vector<double> grid;
  for (int k = 0; k < 200; ++k) grid.push_back(std::pow(10.0, -3.0 + 6.0 * k / 199.0));
  const auto a = markov_timescale_band(mc.bounds, grid);
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (a[k] > 0.0) {
      if (lo == 0.0) lo = grid[k];
      hi = grid[k];
    }
  }
  REQUIRE(lo > 0.0);
  CHECK(lo * hi == Approx(1.0).epsilon(0.2));
  CHECK_THROWS_AS(markov_timescale_band(mc.bounds, {0.0}), DomainError);
}

TEST_CASE("NPG decay at certified steps", "[markov]") {
  const MarkovGameSpec g = default_coordination_game();
  const MarkovCertificate& mc = default_certificate();
  std::mt19937_64 rng(10);
  for (int t = 0; t < 5; ++t) {
    const Vector th0 = center_logits(g, random_logits(g, rng, 0.1));
    const PolicyTrajectory half = run_policy(g, th0, 0.5 * mc.eta_sgn, PolicyMethod::npg, 60, mc.w, Vector::Zero(8));
    for (std::size_t k = 2; k < half.V.size(); ++k) CHECK(half.V[k] <= half.V[k - 1]);
    CHECK(half.V.back() < 1e-3 * half.V.front());

    const double eta = 0.9 * mc.eta_sgn;
    const double q = 1.0 - 2.0 * mc.alpha_star * eta + mc.beta * mc.beta * eta * eta;
    const PolicyTrajectory near = run_policy(g, th0, eta, PolicyMethod::npg, 40, mc.w, Vector::Zero(8));
    for (std::size_t k = 2; k < near.V.size(); ++k) {
      if (near.V[k - 1] > 1e-20) CHECK(near.V[k] / near.V[k - 1] <= q + 0.05);
    }
  }
}

TEST_CASE("mirror flow decays V at the certified rate", "[mirror][markov]") {
  const MarkovGameSpec g = default_coordination_game();
  const MarkovCertificate& mc = default_certificate();
  const MirrorMap psi = g.mirror_map();
  const PrimalGradient grad = [&](const Vector& x) { return primal_gradient(g, x); };
  const Vector x_star = psi.to_primal(Vector::Zero(8));
  std::mt19937_64 rng(11);
  const double dt = 0.01;
  for (int t = 0; t < 3; ++t) {
    Vector z = center_logits(g, random_logits(g, rng, 0.1));
    double v = lyapunov_V(psi, psi.to_primal(z), x_star, mc.w);
    for (int k = 0; k < 100; ++k) {
      z = mirror_step(psi, z, grad, dt, MirrorMethod::rk4);
      const double nv = lyapunov_V(psi, psi.to_primal(z), x_star, mc.w);
      CHECK((std::log(nv) - std::log(v)) / dt <= -mc.alpha_star + 1e-3);
      v = nv;
    }
  }
}

TEST_CASE("Lemma-style monotonicity in primal mirror geometry", "[mirror][markov]") {
  const MarkovGameSpec g = default_coordination_game();
  const MarkovPrimalGame game(g);
  const MirrorMap psi = g.mirror_map();
  const Vector x_star = psi.to_primal(Vector::Zero(8));
  std::vector<Vector> samples;
  for (const auto& th : markov_cube_samples(g, 0.1, 300, 1)) samples.push_back(psi.to_primal(th));
  const MirrorBounds mb = mirror_block_bounds(game, psi, Chart::primal, x_star, samples, 4);
  const Vector w = optimize_weights(mb.bounds, WeightStrategy::two_player_analytic).w;
  const double lm = mirror_sgn_margin(mb, w);
  REQUIRE(lm > 0.0);
  const Vector f_star = primal_gradient(g, x_star);
  const Index d = g.player_dim();
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const Vector x = psi.to_primal(center_logits(g, random_logits(g, rng, 0.1)));
    const Vector df = primal_gradient(g, x) - f_star;
    const Vector dx = x - x_star;
    const double lhs = w(0) * dx.head(d).dot(df.head(d)) + w(1) * dx.tail(d).dot(df.tail(d));
    CHECK(lhs >= lm * lyapunov_V(psi, x, x_star, w) - 1e-6);
  }
}

TEST_CASE("step sweep", "[markov]") {
  const MarkovGameSpec g = default_coordination_game();
  const MarkovCertificate& mc = default_certificate();
  SweepOptions o;
  o.threads = 4;
  const auto rows = step_sweep(g, mc.eta_sgn, {0.5, 1.0}, {PolicyMethod::npg}, o);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fraction == 1.0);
  CHECK(rows[1].fraction >= 0.9);
  CHECK_THROWS_AS(step_sweep(g, mc.eta_sgn, {0.0}, {PolicyMethod::npg}, o), DomainError);
  CHECK(sweep_initial_logits(g, 0, 3) == sweep_initial_logits(g, 0, 3));
}
