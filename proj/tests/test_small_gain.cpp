#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sgn/certificate_io.hpp"
#include "sgn/games.hpp"
#include "sgn/small_gain.hpp"
#include "support/oracles.hpp"

using namespace sgn;
using Catch::Approx;

namespace {

BlockBounds scalar_bounds() {
  BlockBounds b{Vector::Ones(2), Matrix::Zero(2, 2)};
  b.L(0, 1) = 10.0;
  b.L(1, 0) = 0.05;
  return b;
}

Vector w2(double a, double b) {
  Vector w(2);
  w << a, b;
  return w;
}

BlockBounds random_bounds(int n, std::mt19937_64& rng, double coupling = 1.0) {
  std::uniform_real_distribution<double> mu(0.2, 2.0), l(0.0, coupling);
  BlockBounds b{Vector(n), Matrix::Zero(n, n)};
  for (int i = 0; i < n; ++i) {
    b.mu(i) = mu(rng);
    for (int j = 0; j < n; ++j) {
      if (i != j) b.L(i, j) = l(rng);
    }
  }
  return b;
}

Vector random_weights(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lw(-3.0, 3.0);
  Vector w(n);
  for (int i = 0; i < n; ++i) w(i) = std::exp(lw(rng));
  return w;
}

double det_c(const BlockBounds& b, double r, double alpha) {
  return build_C(b, w2(1.0, r), alpha).determinant();
}

const double kRootHalf = 1.0 - std::sqrt(0.5);

}  // namespace

TEST_CASE("build_C examples", "[sgn]") {
  const Matrix c = build_C(scalar_bounds(), w2(1, 200), 0.0);
  Matrix expected(2, 2);
  expected << 2, -20, -20, 400;
  CHECK((c - expected).norm() < 1e-12);

  BlockBounds dec{w2(0.5, 3.0), Matrix::Zero(2, 2)};
  CHECK((build_C(dec, Vector::Ones(2), 0.0) - Matrix(w2(1.0, 6.0).asDiagonal())).norm() == 0.0);

  std::mt19937_64 rng(1);
  const BlockBounds b = random_bounds(4, rng);
  const Vector w = random_weights(4, rng);
  CHECK((build_C(b, 3.5 * w, 0.1) - 3.5 * build_C(b, w, 0.1)).norm() < 1e-12 * build_C(b, w, 0.1).norm());
  CHECK_THROWS_AS(build_C(b, -w, 0.0), DomainError);
  CHECK_THROWS_AS(build_C(b, Vector::Ones(3), 0.0), DimensionError);
}

TEST_CASE("sgn_margin examples", "[sgn]") {
  const MarginResult m = sgn_margin(scalar_bounds(), w2(1, 200));
  CHECK(m.feasible);
  CHECK(m.alpha == Approx(kRootHalf).margin(1e-8));

  BlockBounds dec{w2(0.7, 1.3), Matrix::Zero(2, 2)};
  CHECK(sgn_margin(dec, Vector::Ones(2)).alpha == Approx(0.7).margin(1e-8));

  const MarginResult bad = sgn_margin(scalar_bounds(), Vector::Ones(2));
  CHECK_FALSE(bad.feasible);
  CHECK(bad.alpha == 0.0);

  std::mt19937_64 rng(2);
  int checked = 0;
  while (checked < 10) {
    const BlockBounds b = random_bounds(3, rng, 0.6);
    const Vector w = random_weights(3, rng);
    const MarginResult r = sgn_margin(b, w);
    if (!r.feasible) continue;
    ++checked;
    CHECK(r.alpha == Approx(oracle::grid_alpha(b.mu, b.L, w, 1e-4)).margin(1e-4));
  }
}

TEST_CASE("gershgorin and normalized gain examples", "[sgn]") {
  CHECK(gershgorin_margin(scalar_bounds(), Vector::Ones(2)) == Approx(-4.025).margin(1e-12));
  BlockBounds dec{w2(0.4, 0.9), Matrix::Zero(2, 2)};
  CHECK(gershgorin_margin(dec, Vector::Ones(2)) == Approx(0.4));

  const Matrix h = normalized_gain_matrix(scalar_bounds(), w2(1, 200));
  CHECK(h(0, 0) == 1.0);
  CHECK(h(0, 1) == Approx(-std::sqrt(0.5)).margin(1e-12));
  CHECK(h(1, 0) == h(0, 1));
  CHECK(normalized_gain_lambda_min(scalar_bounds(), w2(1, 200)) == Approx(kRootHalf).margin(1e-12));

  const Matrix hu = normalized_gain_matrix(scalar_bounds(), Vector::Ones(2));
  CHECK(hu(0, 1) == Approx(-5.025).margin(1e-12));
  CHECK(normalized_gain_lambda_min(scalar_bounds(), Vector::Ones(2)) == Approx(-4.025).margin(1e-12));
  CHECK((normalized_gain_matrix(dec, Vector::Ones(2)) - Matrix(dec.mu.asDiagonal())).norm() == 0.0);

  CHECK(normalized_gershgorin_check(scalar_bounds(), w2(1, 200), 0.29));
  CHECK_FALSE(normalized_gershgorin_check(scalar_bounds(), w2(1, 200), 0.30));
  CHECK(normalized_gershgorin_check(dec, Vector::Ones(2), 0.39));
}

TEST_CASE("gain matrix spectral radius", "[sgn]") {
  const GainMatrix g = gain_matrix_spectral_radius(scalar_bounds());
  CHECK(g.K(0, 1) == 10.0);
  CHECK(g.K(1, 0) == 0.05);
  CHECK(g.K(0, 0) == 0.0);
  CHECK(g.rho == Approx(std::sqrt(0.5)).margin(1e-12));
  BlockBounds dec{w2(0.4, 0.9), Matrix::Zero(2, 2)};
  CHECK(gain_matrix_spectral_radius(dec).rho == 0.0);
}

TEST_CASE("two_player_band examples", "[sgn]") {
  const TimescaleBand band = two_player_band(scalar_bounds(), 0.0);
  REQUIRE(band.feasible);
  REQUIRE(band.r_lo);
  REQUIRE(band.r_hi);
  CHECK(*band.r_lo == Approx(34.3).margin(0.05));
  CHECK(*band.r_hi == Approx(1165.7).margin(0.05));
  CHECK(band.contains(200.0));
  for (double r : {*band.r_lo, *band.r_hi}) {
    const Matrix c = build_C(scalar_bounds(), w2(1, r), 0.0);
    CHECK(std::abs(c.determinant()) <= 1e-6 * c.norm() * c.norm());
  }

  // boundary: (mu1 - alpha)(mu2 - alpha) == L12 L21
  BlockBounds edge{Vector::Ones(2), Matrix::Zero(2, 2)};
  edge.L(0, 1) = 2.0;
  edge.L(1, 0) = 0.5;
  CHECK_FALSE(two_player_band(edge, 0.0).feasible);

  BlockBounds sym{Vector::Ones(2), Matrix::Zero(2, 2)};
  sym.L(0, 1) = sym.L(1, 0) = 0.5;
  const TimescaleBand s = two_player_band(sym, 0.0);
  REQUIRE(s.feasible);
  CHECK(s.contains(1.0));
  CHECK(*s.r_lo * *s.r_hi == Approx(1.0).margin(1e-9));

  BlockBounds one_way{Vector::Ones(2), Matrix::Zero(2, 2)};
  one_way.L(0, 1) = 3.0;
  const TimescaleBand ow = two_player_band(one_way, 0.0);
  CHECK(ow.feasible);
  CHECK_FALSE(ow.r_hi);
  CHECK(*ow.r_lo == Approx(9.0 / 4.0));
  CHECK(std::abs(det_c(one_way, *ow.r_lo, 0.0)) < 1e-9);

  BlockBounds three{Vector::Ones(3), Matrix::Zero(3, 3)};
  CHECK_THROWS_AS(two_player_band(three, 0.0), DimensionError);
  CHECK_THROWS_AS(two_player_band(scalar_bounds(), 1.0), DomainError);
}

TEST_CASE("optimize_weights examples", "[sgn]") {
  const WeightSearchResult r = optimize_weights(scalar_bounds(), WeightStrategy::two_player_analytic);
  CHECK(r.feasible);
  CHECK(r.w(0) == 1.0);
  CHECK(r.alpha_star == Approx(kRootHalf).margin(1e-7));
  CHECK(two_player_band(scalar_bounds(), 0.0).contains(r.w(1)));

  BlockBounds dec{w2(0.4, 0.9), Matrix::Zero(2, 2)};
  for (auto s : {WeightStrategy::two_player_analytic, WeightStrategy::log_grid, WeightStrategy::coordinate_search}) {
    CHECK(optimize_weights(dec, s).alpha_star == Approx(0.4).margin(1e-8));
  }

  BlockBounds over{Vector::Ones(2), Matrix::Zero(2, 2)};
  over.L(0, 1) = 3.0;
  over.L(1, 0) = 1.0;
  const WeightSearchResult bad = optimize_weights(over, WeightStrategy::two_player_analytic);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.alpha_star == 0.0);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const BlockBounds b = random_bounds(2, rng, 1.5);
    const double sweep = oracle::ratio_sweep(b.mu(0), b.mu(1), b.L(0, 1), b.L(1, 0), 10000);
    const WeightSearchResult res = optimize_weights(b, WeightStrategy::two_player_analytic);
    if (sweep <= 0.0) {
      CHECK_FALSE(res.feasible);
    } else {
      CHECK(res.alpha_star == Approx(sweep).margin(1e-3));
    }
  }
}

TEST_CASE("strategies agree on three-player bounds", "[sgn]") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const BlockBounds b = random_bounds(3, rng, 0.8);
    const WeightSearchResult g = optimize_weights(b, WeightStrategy::log_grid);
    const WeightSearchResult c = optimize_weights(b, WeightStrategy::coordinate_search, 9);
    CHECK(g.w(0) == 1.0);
    CHECK(c.w(0) == 1.0);
    CHECK(g.alpha_star == Approx(sgn_margin(b, g.w).alpha));
    if (g.feasible || c.feasible) CHECK(std::abs(g.alpha_star - c.alpha_star) < 1e-3);
    const WeightSearchResult again = optimize_weights(b, WeightStrategy::coordinate_search, 9);
    CHECK(again.w == c.w);
  }
  CHECK(weight_strategy_from_string("log-grid") == WeightStrategy::log_grid);
  CHECK_THROWS(weight_strategy_from_string("simplex"));
}

TEST_CASE("assemble_certificate examples", "[sgn]") {
  const WeightedMetric m = WeightedMetric::uniform(BlockStructure::identity({1, 1}));
  const RegionSpec region = RegionSpec::cube(Vector::Zero(2), 1.0);
  const Certificate c = assemble_certificate(m, 0.293, std::nullopt, 1.71, region);
  CHECK(c.eta_max == Approx(0.200).margin(1e-3));
  CHECK(c.h_max == Approx(1.462).margin(1e-3));
  CHECK(c.eta_max == 2.0 * 0.293 / (1.71 * 1.71));

  const Certificate u = assemble_certificate(m, 1.0, std::nullopt, 1.0, region);
  CHECK(u.eta_max == 2.0);
  CHECK(u.h_max == 2.5);

  const Certificate mk = assemble_certificate(m, 0.33, std::nullopt, 1.57, region);
  CHECK(mk.eta_max == Approx(0.268).margin(1e-3));

  const Certificate dsc = assemble_certificate(m, 0.1, 0.3, 1.0, region);
  CHECK(dsc.alpha == 0.3);
  CHECK_THROWS_AS(assemble_certificate(m, 0.5, std::nullopt, 0.4, region), DomainError);
  CHECK_THROWS_AS(assemble_certificate(m, 0.0, std::nullopt, 1.0, region), DomainError);
}

TEST_CASE("certificate JSON round trip", "[sgn]") {
  const LqSpec spec{};
  const QuadraticGame g = canonical_lq(spec);
  const WeightedMetric m(g.structure(), spec.balanced_weights());
  const Certificate c = assemble_certificate(m, 0.2928932188134524, 0.2928932188134525, 1.7071067811865475,
                                             RegionSpec::ball(Vector::Zero(64), 2.0, m), kDefaultC4,
                                             kDefaultSmallC4, {{"budget", 16}});
  const nlohmann::json j = to_json(c);
  CHECK(j.at("schema_version") == kCertificateSchemaVersion);
  const Certificate back = certificate_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.alpha == c.alpha);
  CHECK(back.beta == c.beta);
  CHECK(back.eta_max == c.eta_max);
  CHECK(back.h_max == c.h_max);
  CHECK(back.metric.weights() == c.metric.weights());
  CHECK(back.region.radius == 2.0);
  CHECK(to_json(back).dump() == j.dump());

  nlohmann::json tampered = j;
  tampered["eta_max"] = 0.3;
  CHECK_THROWS_AS(certificate_from_json(tampered), DomainError);
  tampered = j;
  tampered["schema_version"] = 99;
  CHECK_THROWS(certificate_from_json(tampered));
}

TEST_CASE("game examples", "[games]") {
  const QuadraticGame s = two_player_scalar_example();
  const double h = 0.5 * (10.0 + 0.05);
  CHECK(h * h == Approx(25.25).margin(1e-3));
  CHECK(h * h > 1.0);
  CHECK(oracle::lambda_min(s.H()) < 0.0);
  CHECK(s.eval_F(Vector::Zero(2)).norm() == 0.0);
  const BlockBounds sb = exact_block_bounds(s);
  CHECK(sb.mu == Vector::Ones(2));
  CHECK(sb.L(0, 1) == Approx(10.0));
  CHECK(sb.L(1, 0) == Approx(0.05));

  LqSpec spec;
  spec.lambda = 0.0;
  const QuadraticGame g0 = canonical_lq(spec);
  CHECK((g0.H() - Matrix::Identity(64, 64)).norm() == 0.0);
  CHECK(exact_block_bounds(g0).L.norm() == 0.0);

  spec.lambda = 1.0;
  const QuadraticGame g1 = canonical_lq(spec);
  CHECK(oracle::lambda_min(g1.H()) == Approx(-4.025).margin(1e-9));
  const WeightedMetric bal(g1.structure(), spec.balanced_weights());
  CHECK(metric_op_norm(g1.H(), bal) == Approx(1.0 + std::sqrt(0.5)).margin(1e-9));
  const BlockBounds b1 = exact_block_bounds(g1);
  CHECK(b1.mu(0) == Approx(1.0));
  CHECK(b1.L(0, 1) == Approx(10.0).margin(1e-10));
  CHECK(b1.L(1, 0) == Approx(0.05).margin(1e-12));

  spec.lambda = 2.0;
  const BlockBounds b2 = exact_block_bounds(canonical_lq(spec));
  CHECK(b2.L(0, 1) == Approx(20.0).margin(1e-10));
  CHECK(b2.L(1, 0) == Approx(0.1).margin(1e-12));

  CHECK((g1.eval_JG(Vector::Ones(64)) + g1.H()).norm() == 0.0);
  CHECK((g1.hess_block(0, 1, Vector::Zero(64)) - g1.H().topRightCorner(32, 32)).norm() == 0.0);
  CHECK(canonical_lq(LqSpec{}).H() == canonical_lq(LqSpec{}).H());
  CHECK_THROWS_AS(QuadraticGame(Matrix::Identity(3, 3), {1, 1}), DimensionError);
}

TEST_CASE("perturb_couplings examples", "[games]") {
  const QuadraticGame g = canonical_lq(LqSpec{});
  CHECK(perturb_couplings(g, 0.0, 5).H() == g.H());
  const QuadraticGame p = perturb_couplings(g, 1.0, 5);
  for (auto [i, j] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 0}}) {
    const Matrix d = p.block(i, j) - g.block(i, j);
    const double dn = Eigen::JacobiSVD<Matrix>(d).singularValues()(0);
    const double an = Eigen::JacobiSVD<Matrix>(g.block(i, j)).singularValues()(0);
    CHECK(dn == Approx(an).epsilon(1e-12));
  }
  CHECK(p.block(0, 0) == g.block(0, 0));
  CHECK(perturb_couplings(g, 0.5, 5).H() == perturb_couplings(g, 0.5, 5).H());
  CHECK_THROWS_AS(perturb_couplings(g, 1.5, 5), DomainError);

  const Vector w = LqSpec{}.balanced_weights();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const QuadraticGame q = perturb_couplings(g, 0.5, seed);
    const double a_star = sgn_margin(exact_block_bounds(q), w).alpha;
    const double a_true = min_sym_eig_in_metric(q.H(), WeightedMetric(q.structure(), w));
    if (a_star > 0.0) CHECK(a_true >= a_star - 1e-9);
  }
}

TEST_CASE("random_lq_ensemble examples", "[games]") {
  LqSpec base;
  base.block_dim = 8;
  const auto e = random_lq_ensemble(6, 42, {0.0, 0.3}, base);
  REQUIRE(e.size() == 12);
  const auto again = random_lq_ensemble(6, 42, {0.0, 0.3}, base);
  for (std::size_t k = 0; k < e.size(); ++k) {
    CHECK(e[k].game.H() == again[k].game.H());
    if (e[k].lambda == 0.0) CHECK(oracle::lambda_min(e[k].game.H()) > 0.0);
    const BlockBounds b = exact_block_bounds(e[k].game);
    CHECK(b.mu.minCoeff() >= kEnsembleCurvatureLo - 1e-12);
    const Vector w = base.balanced_weights();
    const double a_star = sgn_margin(b, w).alpha;
    const double a_true = min_sym_eig_in_metric(e[k].game.H(), WeightedMetric(e[k].game.structure(), w));
    if (a_star > 0.0) {
      CHECK(a_star / a_true > 0.0);
      CHECK(a_star / a_true <= 1.0 + 1e-9);
    }
  }
  CHECK_THROWS_AS(random_lq_ensemble(0, 1, {0.0}), DomainError);
}

TEST_CASE("structural equality on the lambda grid", "[games]") {
  LqSpec spec;
  const Vector w = spec.balanced_weights();
  for (int k = 0; k < 26; ++k) {
    spec.lambda = 2.5 * k / 25.0;
    const QuadraticGame g = canonical_lq(spec);
    const WeightedMetric m(g.structure(), w);
    const double a_star = sgn_margin(exact_block_bounds(g), w).alpha;
    const double a_true = min_sym_eig_in_metric(g.H(), m);
    if (a_star > 0.0) CHECK(std::abs(a_star - a_true) <= 1e-8 * std::max(1.0, a_true));
    CHECK(metric_op_norm(g.H(), m) == Approx(1.0 + spec.lambda * std::sqrt(0.5)).margin(1e-9));
  }
}

TEST_CASE("property: C scale invariance and alpha monotonicity", "[sgn][property]") {
  std::mt19937_64 rng(501);
  std::uniform_real_distribution<double> cd(0.01, 100.0);
  int feasible = 0;
  for (int t = 0; t < 150; ++t) {
    const int n = 2 + t % 4;
    const BlockBounds b = random_bounds(n, rng, 0.5);
    const Vector w = random_weights(n, rng);
    const MarginResult r = sgn_margin(b, w);
    CHECK(sgn_margin(b, cd(rng) * w).alpha == Approx(r.alpha).margin(1e-9));
    const double a1 = 0.3 * b.mu.minCoeff(), a2 = 0.7 * b.mu.minCoeff();
    CHECK(oracle::lambda_min(build_C(b, w, a1)) > oracle::lambda_min(build_C(b, w, a2)));
    if (r.feasible) {
      ++feasible;
      CHECK(oracle::lambda_min(oracle::sgn_matrix(b.mu, b.L, w, r.alpha)) >= -1e-8);
      CHECK(oracle::lambda_min(oracle::sgn_matrix(b.mu, b.L, w, r.alpha + 2e-9)) <= 1e-8);
    }
  }
  CHECK(feasible >= 50);
}

TEST_CASE("property: Gershgorin bounds are conservative", "[sgn][property]") {
  std::mt19937_64 rng(502);
  std::uniform_real_distribution<double> af(0.0, 1.0);
  for (int t = 0; t < 150; ++t) {
    const int n = 2 + t % 4;
    const BlockBounds b = random_bounds(n, rng, 0.4);
    const Vector w = random_weights(n, rng);
    const MarginResult r = sgn_margin(b, w);
    if (r.feasible) CHECK(gershgorin_margin(b, w) <= r.alpha + 1e-9);
    const double alpha = af(rng) * b.mu.minCoeff();
    const Matrix h = normalized_gain_matrix(b, w);
    if (normalized_gershgorin_check(b, w, alpha)) CHECK(oracle::lambda_min(h) >= alpha - 1e-12);
    // lambda_min(H(w)) >= alpha  <=>  H(w) - alpha I is PSD
    const double lm = normalized_gain_lambda_min(b, w);
    CHECK(lm == Approx(oracle::lambda_min(h)).margin(1e-12));
    CHECK(oracle::lambda_min(h - lm * Matrix::Identity(n, n)) == Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("property: band and feasibility cross-validate", "[sgn][property]") {
  std::mt19937_64 rng(503);
  for (int t = 0; t < 120; ++t) {
    const BlockBounds b = random_bounds(2, rng, 1.5);
    const double alpha = 0.5 * b.mu.minCoeff() * (t % 2);
    const TimescaleBand band = two_player_band(b, alpha);
    const bool expected = (b.mu(0) - alpha) * (b.mu(1) - alpha) > b.L(0, 1) * b.L(1, 0);
    CHECK(band.feasible == expected);
    if (band.feasible && band.r_lo && band.r_hi) {
      CHECK(0.0 < *band.r_lo);
      CHECK(*band.r_lo < *band.r_hi);
      for (double r : {*band.r_lo, *band.r_hi}) {
        const Matrix c = build_C(b, w2(1, r), alpha);
        CHECK(std::abs(c.determinant()) <= 1e-6 * c.norm() * c.norm());
      }
    }
    for (int k = 0; k <= 40; ++k) {
      const double r = std::pow(10.0, -4.0 + 8.0 * k / 40.0);
      const bool pd = oracle::lambda_min(oracle::sgn_matrix(b.mu, b.L, w2(1, r), alpha)) > 0.0;
      const double lo = band.r_lo.value_or(0.0), hi = band.r_hi.value_or(1e300);
      // skip ratios within rounding of an endpoint
      if (std::abs(std::log(r / lo)) < 1e-9 || std::abs(std::log(r / hi)) < 1e-9) continue;
      CHECK(pd == band.contains(r));
    }
    if (alpha == 0.0) {
      const GainMatrix k = gain_matrix_spectral_radius(b);
      const WeightSearchResult res = optimize_weights(b, WeightStrategy::two_player_analytic);
      if (std::abs(k.rho - 1.0) > 1e-6) CHECK((k.rho < 1.0) == res.feasible);
    }
  }
}
