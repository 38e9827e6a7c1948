#pragma once

// Experiment runners behind the command-line tool. Each writes its CSV
// artifacts plus manifest.json into an output directory and returns the
// process exit code (0 ok, 2 certification infeasible).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgn/certificate_io.hpp"
#include "sgn/csv.hpp"
#include "sgn/games.hpp"
#include "sgn/integrators.hpp"
#include "sgn/markov.hpp"
#include "sgn/parallel.hpp"
#include "sgn/region.hpp"

namespace sgn {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitError = 1;

struct RunContext {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::filesystem::path out = ".";
  std::uint64_t seed = 0;
  int threads = 1;

  [[nodiscard]] std::string path(const std::string& file) const { return (out / file).string(); }
};

namespace grids {

inline std::vector<double> linear(double lo, double step, int count) {
  std::vector<double> g;
  for (int k = 0; k < count; ++k) g.push_back(lo + step * k);
  return g;
}

// `count` points log-spaced over [lo, hi], endpoints included.
inline std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> g;
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < count; ++k) g.push_back(std::pow(10.0, count == 1 ? a : a + (b - a) * k / (count - 1)));
  return g;
}

inline std::vector<double> lambdas() {
  std::vector<double> g;
  for (int k = 0; k <= 25; ++k) g.push_back(k / 10.0);
  return g;
}

// 40 points per decade over [1e-3, 10].
inline std::vector<double> steps() { return logspace(1e-3, 10.0, 161); }

inline std::vector<double> lq_ratios() { return logspace(1.0, 1e4, 200); }
inline std::vector<double> markov_ratios() { return logspace(1e-3, 1e3, 200); }

inline std::vector<double> eps() {
  std::vector<double> g;
  for (int k = 0; k <= 10; ++k) g.push_back(k / 10.0);
  return g;
}

inline std::vector<double> multipliers() {
  std::vector<double> g;
  for (int k = 1; k <= 8; ++k) g.push_back(0.25 * k);
  return g;
}

}  // namespace grids

namespace detail {

inline std::vector<double> grid_or(const nlohmann::json& cfg, const char* key, std::vector<double> fallback) {
  if (!cfg.contains(key)) return fallback;
  auto g = cfg.at(key).get<std::vector<double>>();
  if (g.empty()) throw DomainError(std::string("config grid '") + key + "' is empty");
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (!(g[k] > g[k - 1])) throw DomainError(std::string("config grid '") + key + "' must be increasing");
  }
  return g;
}

inline LqSpec lq_spec(const nlohmann::json& cfg) {
  return cfg.contains("game") ? lq_spec_from_json(cfg.at("game")) : LqSpec{};
}

inline std::string iso_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace detail

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
}

inline void write_manifest(const RunContext& ctx, const std::vector<std::string>& files,
                           nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json m = {{"command", ctx.command},     {"version", kToolVersion}, {"seed", ctx.seed},
                      {"threads", ctx.threads},     {"config", ctx.config},    {"outputs", files},
                      {"timestamp", detail::iso_timestamp()}};
  m["details"] = std::move(extra);
  write_json(ctx.path("manifest.json"), m);
}

/// Region from config: {"kind": "cube", "half_width": h} | {"kind": "box", "half_widths": [...]}
/// | {"kind": "ball", "radius": r}; centered at "center" or the origin.
inline RegionSpec region_from_config(const nlohmann::json& j, Index dim) {
  Vector c = Vector::Zero(dim);
  if (j.contains("center")) {
    const auto v = j.at("center").get<std::vector<double>>();
    if (static_cast<Index>(v.size()) != dim) throw DimensionError("region center has the wrong length");
    c = Eigen::Map<const Vector>(v.data(), dim);
  }
  const std::string kind = j.value("kind", "cube");
  if (kind == "cube") return RegionSpec::cube(c, j.value("half_width", 1.0));
  if (kind == "box") {
    const auto v = j.at("half_widths").get<std::vector<double>>();
    return RegionSpec::box(c, Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  }
  if (kind == "ball") return RegionSpec::ball(c, j.value("radius", 1.0));
  throw DomainError("unknown region kind '" + kind + "'");
}

/// certify: game + region config -> certificate.json (or failure.json) and estimation.csv.
inline int cmd_certify(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const QuadraticGame game = quadratic_game_from_json(cfg.value("game", nlohmann::json{{"type", "canonical_lq"}}));
  const RegionSpec region = region_from_config(cfg.value("region", nlohmann::json::object()), game.total_dim());
  CertifyOptions opts;
  opts.strategy = weight_strategy_from_string(cfg.value("strategy", "two-player-analytic"));
  if (opts.strategy == WeightStrategy::two_player_analytic && game.num_players() != 2) {
    opts.strategy = WeightStrategy::coordinate_search;
  }
  if (cfg.contains("weights")) {
    const auto w = cfg.at("weights").get<std::vector<double>>();
    opts.fixed_weights = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  }
  opts.C4 = cfg.value("C4", kDefaultC4);
  opts.c4 = cfg.value("c4", kDefaultSmallC4);
  opts.threads = ctx.threads;
  const auto budget = cfg.value<std::size_t>("budget", 2000);
  const auto res = certify(game, region, game.structure(), budget, ctx.seed, opts);

  const std::size_t n = game.num_players();
  std::vector<std::string> header{"sample"};
  for (std::size_t i = 0; i < n; ++i) header.push_back("mu_" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) header.push_back("L_" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  header.push_back("beta");
  header.push_back("log_norm");
  {
    CsvWriter csv(ctx.path("estimation.csv"), header);
    for (std::size_t k = 0; k < res.report.size(); ++k) {
      auto row = csv.row();
      row << k;
      const auto& p = res.report[k];
      for (std::size_t i = 0; i < n; ++i) row << p.mu(static_cast<Index>(i));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) row << p.L(static_cast<Index>(i), static_cast<Index>(j));
        }
      }
      row << p.beta << p.log_norm;
    }
  }
  const auto& est = res.estimates;
  nlohmann::json summary = {{"mu_lo", detail::vector_json(est.bounds.mu)},
                            {"L_hi", detail::matrix_json(est.bounds.L)},
                            {"beta_hi", est.beta_hi},
                            {"alpha_dsc", est.alpha_dsc},
                            {"alpha_sgn", res.weights.alpha_star},
                            {"sgn_feasible", res.weights.feasible},
                            {"weights", detail::vector_json(res.weights.w)},
                            {"sample_count", est.sample_count}};
  if (res.ok()) {
    write_json(ctx.path("certificate.json"), to_json(*res.certificate));
    write_manifest(ctx, {"certificate.json", "estimation.csv"}, summary);
    return kExitOk;
  }
  summary["reason"] = res.failure_reason;
  write_json(ctx.path("failure.json"), summary);
  write_manifest(ctx, {"failure.json", "estimation.csv"}, summary);
  return kExitInfeasible;
}

/// quadratic-demo: the two-player scalar flow seen in the Euclidean norm and
/// in the SGN metric M(w), w = (1, r).
inline int cmd_quadratic_demo(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const QuadraticGame game = two_player_scalar_example(cfg.value("a", 10.0), cfg.value("b", 0.05));
  Vector w(2);
  w << 1.0, cfg.value("r", 200.0);
  const WeightedMetric sgn_m(game.structure(), w);
  const WeightedMetric euc_m = WeightedMetric::uniform(game.structure());
  const auto x0v = cfg.value("x0", std::vector<double>{0.0, 1.0});
  const Vector x0 = Eigen::Map<const Vector>(x0v.data(), 2);
  const double dt = cfg.value("dt", 0.01), t_end = cfg.value("t_end", 10.0);
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const auto rec = run_dynamics(game, x0, steps, Method::flow_rk4_fine, dt, ConstraintSet::unconstrained(), sgn_m);
  CsvWriter csv(ctx.path("quadratic_demo.csv"), {"t", "euclid_norm", "sgn_norm"});
  for (std::size_t k = 0; k < rec.iterates.size(); ++k) {
    csv.row() << dt * static_cast<double>(k) << block_norm(rec.iterates[k], euc_m) << block_norm(rec.iterates[k], sgn_m);
  }
  write_manifest(ctx, {"quadratic_demo.csv"}, {{"weights", detail::vector_json(w)}});
  return kExitOk;
}

struct MarginRow {
  double lambda, gamma_euc, alpha_sgn, alpha_true, beta;
};

/// Euclidean margin, SGN margin, true metric margin and beta for one lambda
/// in the balanced metric.
inline MarginRow lq_margin_row(const LqSpec& base, double lambda) {
  LqSpec s = base;
  s.lambda = lambda;
  const QuadraticGame game = canonical_lq(s);
  const Vector w = s.balanced_weights();
  const WeightedMetric m(game.structure(), w);
  const auto sgn = sgn_margin(exact_block_bounds(game), w);
  return {lambda, min_sym_eig_in_metric(game.H(), Matrix::Identity(game.total_dim(), game.total_dim())),
          sgn.feasible ? sgn.alpha : 0.0, min_sym_eig_in_metric(game.H(), m), metric_op_norm(game.H(), m)};
}

inline int cmd_lq_margins(const RunContext& ctx) {
  const LqSpec base = detail::lq_spec(ctx.config);
  const auto lambdas = detail::grid_or(ctx.config, "lambda_grid", grids::lambdas());
  std::vector<MarginRow> rows(lambdas.size());
  parallel_for(lambdas.size(), ctx.threads, [&](std::size_t k) { rows[k] = lq_margin_row(base, lambdas[k]); });
  CsvWriter csv(ctx.path("margins.csv"), {"lambda", "gamma_euc", "alpha_sgn", "alpha_true", "beta"});
  for (const auto& r : rows) csv.row() << r.lambda << r.gamma_euc << r.alpha_sgn << r.alpha_true << r.beta;
  write_manifest(ctx, {"margins.csv"});
  return kExitOk;
}

inline int cmd_lq_band(const RunContext& ctx) {
  LqSpec s = detail::lq_spec(ctx.config);
  s.lambda = ctx.config.value("lambda", s.lambda);
  const auto ratios = detail::grid_or(ctx.config, "r_grid", grids::lq_ratios());
  const QuadraticGame game = canonical_lq(s);
  const BlockBounds b = exact_block_bounds(game);
  struct Row {
    double alpha_sgn, alpha_true;
    bool feasible;
  };
  std::vector<Row> rows(ratios.size());
  parallel_for(ratios.size(), ctx.threads, [&](std::size_t k) {
    Vector w(2);
    w << 1.0, ratios[k];
    const auto m = sgn_margin(b, w);
    rows[k] = {m.feasible ? m.alpha : 0.0, min_sym_eig_in_metric(game.H(), WeightedMetric(game.structure(), w)), m.feasible};
  });
  CsvWriter csv(ctx.path("band.csv"), {"r", "alpha_sgn", "alpha_true", "feasible"});
  for (std::size_t k = 0; k < ratios.size(); ++k) csv.row() << ratios[k] << rows[k].alpha_sgn << rows[k].alpha_true << rows[k].feasible;
  const auto band = two_player_band(b, 0.0);
  nlohmann::json details = {{"lambda", s.lambda}, {"band_feasible", band.feasible}};
  details["r_lo"] = band.r_lo ? nlohmann::json(*band.r_lo) : nlohmann::json(nullptr);
  details["r_hi"] = band.r_hi ? nlohmann::json(*band.r_hi) : nlohmann::json(nullptr);
  write_manifest(ctx, {"band.csv"}, details);
  return kExitOk;
}

inline int cmd_lq_phase(const RunContext& ctx) {
  const LqSpec base = detail::lq_spec(ctx.config);
  const auto lambdas = detail::grid_or(ctx.config, "lambda_grid", grids::lambdas());
  const auto hs = detail::grid_or(ctx.config, "h_grid", grids::steps());
  const double c4_big = ctx.config.value("C4", kDefaultC4);
  std::vector<std::string> files;
  for (Method method : {Method::euler, Method::rk4}) {
    const auto pd = phase_diagram(base, base.balanced_weights(), lambdas, hs, method, c4_big, ctx.threads);
    const std::string tag = to_string(method);
    {
      CsvWriter csv(ctx.path("phase_" + tag + ".csv"), {"lambda", "h", "log_rho"});
      for (std::size_t l = 0; l < lambdas.size(); ++l) {
        for (std::size_t k = 0; k < hs.size(); ++k) csv.row() << lambdas[l] << hs[k] << pd.log_rho(static_cast<Index>(l), static_cast<Index>(k));
      }
    }
    {
      CsvWriter csv(ctx.path("curves_" + tag + ".csv"), {"lambda", "h_sgn", "h_stab"});
      for (std::size_t l = 0; l < lambdas.size(); ++l) csv.row() << lambdas[l] << pd.sgn_step_curve[l] << pd.stability_curve[l];
    }
    files.push_back("phase_" + tag + ".csv");
    files.push_back("curves_" + tag + ".csv");
  }
  write_manifest(ctx, files);
  return kExitOk;
}

/// lq-flow: continuous-time flows from seeded unit-norm starts, norms in the
/// balanced metric. run_id is "l<lambda>_s<start>".
inline int cmd_lq_flow(const RunContext& ctx) {
  const LqSpec base = detail::lq_spec(ctx.config);
  const auto lambdas = detail::grid_or(ctx.config, "lambdas", {0.5, 1.0, 1.2});
  const auto starts = ctx.config.value<std::size_t>("starts", 8);
  const double dt = ctx.config.value("dt", 0.1), t_end = ctx.config.value("t_end", 20.0);
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t cells = lambdas.size() * starts;
  std::vector<TrajectoryRecord> recs(cells);
  parallel_for(cells, ctx.threads, [&](std::size_t c) {
    LqSpec s = base;
    s.lambda = lambdas[c / starts];
    const QuadraticGame game = canonical_lq(s);
    const WeightedMetric m(game.structure(), s.balanced_weights());
    std::mt19937_64 rng(mix_seed(ctx.seed, c % starts));
    Vector x0 = gaussian_matrix(game.total_dim(), 1, rng).col(0);
    x0 /= block_norm(x0, m);
    recs[c] = run_dynamics(game, x0, steps, Method::flow_rk4_fine, dt, ConstraintSet::unconstrained(), m);
  });
  CsvWriter csv(ctx.path("flow.csv"), {"t", "run_id", "metric_norm"});
  for (std::size_t c = 0; c < cells; ++c) {
    char id[64];
    std::snprintf(id, sizeof id, "l%g_s%zu", lambdas[c / starts], c % starts);
    for (std::size_t k = 0; k < recs[c].metric_dists.size(); ++k) {
      csv.row() << dt * static_cast<double>(k) << std::string(id) << recs[c].metric_dists[k];
    }
  }
  write_manifest(ctx, {"flow.csv"});
  return kExitOk;
}

struct NoiseRow {
  double eps;
  std::size_t seed;
  double alpha_true, alpha_sgn, ratio;
};

/// alpha_true / alpha_sgn at the SGN-optimal weights of a perturbed LQ game;
/// ratio is NaN when SGN does not certify.
inline NoiseRow lq_noise_row(const LqSpec& s, double eps, std::uint64_t base_seed, std::size_t seed_index) {
  const QuadraticGame game = perturb_couplings(canonical_lq(s), eps, mix_seed(base_seed, seed_index));
  const auto ws = optimize_weights(exact_block_bounds(game), WeightStrategy::two_player_analytic);
  const double at = min_sym_eig_in_metric(game.H(), WeightedMetric(game.structure(), ws.w));
  const double as = ws.feasible ? ws.alpha_star : 0.0;
  return {eps, seed_index, at, as, as > 0.0 ? at / as : std::numeric_limits<double>::quiet_NaN()};
}

inline int cmd_lq_noise(const RunContext& ctx) {
  LqSpec s = detail::lq_spec(ctx.config);
  s.lambda = ctx.config.value("lambda", s.lambda);
  const auto eps = detail::grid_or(ctx.config, "eps_grid", grids::eps());
  const auto seeds = ctx.config.value<std::size_t>("seeds", 10);
  std::vector<NoiseRow> rows(eps.size() * seeds);
  parallel_for(rows.size(), ctx.threads, [&](std::size_t c) { rows[c] = lq_noise_row(s, eps[c / seeds], ctx.seed, c % seeds); });
  CsvWriter csv(ctx.path("noise.csv"), {"eps", "seed", "alpha_true", "alpha_sgn", "ratio"});
  for (const auto& r : rows) csv.row() << r.eps << r.seed << r.alpha_true << r.alpha_sgn << r.ratio;
  write_manifest(ctx, {"noise.csv"});
  return kExitOk;
}

struct EnsembleRow {
  std::size_t instance;
  double lambda;
  double alpha_sgn, alpha_true, h_sgn, h_stab;
  double alpha_ratio, log_step_ratio;  // NaN unless SGN certifies
  bool euclid_positive, sgn_positive;
};

/// Fixed balanced metric, exact block bounds; the RK4 certified step is
/// compared with the RK4 stability threshold. log_step_ratio = ln(h_sgn / h_stab).
inline EnsembleRow lq_ensemble_row(const EnsembleGame& eg, const LqSpec& base, double c4_big) {
  const Vector w = base.balanced_weights();
  const auto& game = eg.game;
  const WeightedMetric m(game.structure(), w);
  const auto sgn = sgn_margin(exact_block_bounds(game), w);
  EnsembleRow r{};
  r.instance = eg.instance;
  r.lambda = eg.lambda;
  r.alpha_sgn = sgn.feasible ? sgn.alpha : 0.0;
  r.alpha_true = min_sym_eig_in_metric(game.H(), m);
  r.h_sgn = c4_big / metric_op_norm(game.H(), m);
  r.h_stab = stability_threshold(game, Method::rk4, 10.0);
  r.euclid_positive = min_sym_eig_in_metric(game.H(), Matrix::Identity(game.total_dim(), game.total_dim())) > 0.0;
  r.sgn_positive = r.alpha_sgn > 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.alpha_ratio = r.sgn_positive ? r.alpha_sgn / r.alpha_true : nan;
  r.log_step_ratio = r.sgn_positive ? std::log(r.h_sgn / r.h_stab) : nan;
  return r;
}

inline int cmd_lq_ensemble(const RunContext& ctx) {
  const LqSpec base = detail::lq_spec(ctx.config);
  const auto lambdas = detail::grid_or(ctx.config, "lambda_grid", grids::lambdas());
  const auto count = ctx.config.value<std::size_t>("count", 50);
  const auto games = random_lq_ensemble(count, ctx.seed, lambdas, base);
  std::vector<EnsembleRow> rows(games.size());
  const double c4_big = ctx.config.value("C4", kDefaultC4);
  parallel_for(games.size(), ctx.threads, [&](std::size_t k) { rows[k] = lq_ensemble_row(games[k], base, c4_big); });
  CsvWriter csv(ctx.path("ensemble.csv"),
                {"instance", "lambda", "alpha_ratio", "log_step_ratio", "euclid_positive", "sgn_positive"});
  for (const auto& r : rows) csv.row() << r.instance << r.lambda << r.alpha_ratio << r.log_step_ratio << r.euclid_positive << r.sgn_positive;
  write_manifest(ctx, {"ensemble.csv"});
  return kExitOk;
}

inline nlohmann::json to_json(const MarkovCertificate& mc) {
  return {{"mu", detail::vector_json(mc.bounds.bounds.mu)},
          {"L", detail::matrix_json(mc.bounds.bounds.L)},
          {"weights", detail::vector_json(mc.w)},
          {"r_star", mc.r_star},
          {"alpha_star", mc.alpha_star},
          {"feasible", mc.feasible},
          {"beta", mc.beta},
          {"eta_sgn", mc.eta_sgn},
          {"half_width", mc.half_width},
          {"sample_count", mc.sample_count},
          {"geometry", "fisher (logit chart, gauge-reduced)"},
          {"return_normalization", "(1 - gamma) * rho^T V; entropy summed over states"}};
}

inline MarkovGameSpec markov_spec(const nlohmann::json& cfg) {
  return markov_spec_from_json(cfg.value("game", nlohmann::json::object()));
}

inline MarkovCertificate markov_certificate(const RunContext& ctx, const MarkovGameSpec& g) {
  return certify_markov(g, ctx.config.value("half_width", 0.1), ctx.config.value<std::size_t>("budget", 2000), ctx.seed,
                        ctx.threads);
}

/// markov-npg: certificate, NPG vs EPG Lyapunov traces at a common step, and
/// the convergence sweep over multiples of eta_SGN.
inline int cmd_markov_npg(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const MarkovGameSpec g = markov_spec(cfg);
  const auto mc = markov_certificate(ctx, g);
  write_json(ctx.path("markov_certificate.json"), to_json(mc));
  if (!(mc.eta_sgn > 0.0)) {
    write_manifest(ctx, {"markov_certificate.json"}, {{"reason", "mirror small-gain test infeasible"}});
    return kExitInfeasible;
  }
  const double eta = cfg.value("multiplier", 0.5) * mc.eta_sgn;
  const auto steps = cfg.value<std::size_t>("steps", 200);
  const Vector theta0 = sweep_initial_logits(g, ctx.seed, cfg.value<std::size_t>("start", 0), cfg.value("init_half_width", 0.5));
  const Vector theta_star = Vector::Zero(g.total_dim());
  {
    CsvWriter csv(ctx.path("npg.csv"), {"step", "method", "V", "dist"});
    for (PolicyMethod m : {PolicyMethod::npg, PolicyMethod::epg}) {
      const auto tr = run_policy(g, theta0, eta, m, steps, mc.w, theta_star);
      for (std::size_t k = 0; k < tr.V.size(); ++k) csv.row() << k << to_string(m) << tr.V[k] << tr.dist[k];
    }
  }
  SweepOptions so;
  so.seeds = cfg.value<std::size_t>("seeds", 20);
  so.max_steps = cfg.value<std::size_t>("max_steps", 500);
  so.grad_tol = cfg.value("grad_tol", 1e-6);
  so.dist_tol = cfg.value("dist_tol", 1.0);
  so.init_half_width = cfg.value("init_half_width", 0.5);
  so.seed = ctx.seed;
  so.threads = ctx.threads;
  const auto rows = step_sweep(g, mc.eta_sgn, detail::grid_or(cfg, "multipliers", grids::multipliers()),
                               {PolicyMethod::npg, PolicyMethod::epg}, so);
  {
    CsvWriter csv(ctx.path("sweep.csv"), {"multiplier", "method", "fraction"});
    for (const auto& r : rows) csv.row() << r.multiplier << to_string(r.method) << r.fraction;
  }
  write_manifest(ctx, {"markov_certificate.json", "npg.csv", "sweep.csv"}, {{"eta", eta}});
  return kExitOk;
}

inline int cmd_markov_band(const RunContext& ctx) {
  const MarkovGameSpec g = markov_spec(ctx.config);
  const auto mc = markov_certificate(ctx, g);
  const auto ratios = detail::grid_or(ctx.config, "r_grid", grids::markov_ratios());
  const auto alphas = markov_timescale_band(mc.bounds, ratios);
  CsvWriter csv(ctx.path("markov_band.csv"), {"r", "alpha_star"});
  for (std::size_t k = 0; k < ratios.size(); ++k) csv.row() << ratios[k] << alphas[k];
  write_json(ctx.path("markov_certificate.json"), to_json(mc));
  write_manifest(ctx, {"markov_band.csv", "markov_certificate.json"});
  return kExitOk;
}

}  // namespace sgn
