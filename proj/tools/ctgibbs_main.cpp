// Command-line harness: configuration-driven experiments over the library.
// Subcommands: validate, heat-kernel, eigen, gibbs, thermo, simulate,
// skorokhod. Every run writes its outputs plus a manifest into a directory
// named by the config hash, so identical configs land in identical places.
//
// Exit codes: 0 pass, 1 validation/assertion failure, 2 I/O or parse
// failure, 3 numerical non-convergence.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include "ctgibbs/errors.hpp"
#include "ctgibbs/gibbs.hpp"
#include "ctgibbs/grid.hpp"
#include "ctgibbs/io.hpp"
#include "ctgibbs/kernel.hpp"
#include "ctgibbs/paths.hpp"
#include "ctgibbs/semigroup.hpp"
#include "ctgibbs/spectral.hpp"
#include "ctgibbs/thermo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitIo = 2;
constexpr int kExitNoConvergence = 3;

constexpr const char* kToolVersion = "0.1.0";

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  long long seed_override = -1;
  int grid_override = 0;
};

struct RunContext {
  ctgibbs::ExperimentConfig cfg;
  ctgibbs::Grid grid;
  ctgibbs::KernelModel kernel;
  ctgibbs::GridFunction potential;
  std::filesystem::path run_dir;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

RunContext make_context(const CommonOpts& opts) {
  RunContext ctx{ctgibbs::ExperimentConfig::load(opts.config_path),
                 ctgibbs::Grid::uniform(2),
                 ctgibbs::KernelModel::cosine(),
                 {},
                 {}};
  if (opts.seed_override >= 0) {
    ctx.cfg.raw["mc"]["seed"] = std::uint64_t(opts.seed_override);
    ctx.cfg.seed = std::uint64_t(opts.seed_override);
  }
  if (opts.grid_override > 0) {
    ctx.cfg.raw["grid_n"] = opts.grid_override;
    ctx.cfg.grid_n = opts.grid_override;
  }
  if (!opts.out_override.empty()) ctx.cfg.out_dir = opts.out_override;
  ctx.grid = ctgibbs::Grid::uniform(ctx.cfg.grid_n);
  ctx.kernel = ctx.cfg.make_kernel();
  ctx.potential = ctx.cfg.make_potential(ctx.kernel, ctx.grid);
  ctx.run_dir = std::filesystem::path(ctx.cfg.out_dir) / ctx.cfg.hash().substr(0, 12);
  std::filesystem::create_directories(ctx.run_dir);
  return ctx;
}

void write_manifest(const RunContext& ctx, const std::string& command, int exit_code) {
  auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - ctx.start)
                  .count();
  ctgibbs::json manifest = {{"tool", "ctgibbs"},
                            {"version", kToolVersion},
                            {"command", command},
                            {"config_hash", ctx.cfg.hash()},
                            {"wall_ms", wall},
                            {"exit_code", exit_code}};
  ctgibbs::write_json_file(ctx.run_dir / "manifest.json", manifest);
}

// Potential as an exact callable; analytic kinds avoid interpolation bias.
std::function<double(double)> potential_fn(const RunContext& ctx) {
  const ctgibbs::json& raw = ctx.cfg.raw;
  if (!raw.contains("potential")) return [](double) { return 0.0; };
  const ctgibbs::json& p = raw["potential"];
  std::string kind = p.value("kind", "constant");
  if (kind == "constant") {
    double b = p.value("b", 0.0);
    return [b](double) { return b; };
  }
  if (kind == "matched_quadratic") {
    double b = p.value("b", 0.0);
    double a0 = ctx.kernel.a0;
    return [b, a0](double x) { return b + (1.0 - a0) * x * (1.0 - x); };
  }
  if (kind == "trig") {
    double c0 = p.value("c0", 0.0);
    std::vector<double> cc = p.contains("cos") ? p["cos"].get<std::vector<double>>()
                                               : std::vector<double>{};
    std::vector<double> ss = p.contains("sin") ? p["sin"].get<std::vector<double>>()
                                               : std::vector<double>{};
    return [c0, cc, ss](double x) {
      constexpr double two_pi = 2.0 * std::numbers::pi;
      double v = c0;
      for (std::size_t m = 0; m < cc.size(); ++m) v += cc[m] * std::cos(two_pi * (m + 1) * x);
      for (std::size_t m = 0; m < ss.size(); ++m) v += ss[m] * std::sin(two_pi * (m + 1) * x);
      return v;
    };
  }
  ctgibbs::Grid g = ctx.grid;
  ctgibbs::GridFunction v = ctx.potential;
  return [g, v](double x) { return ctgibbs::interp_periodic(g, v, x); };
}

int cmd_validate(const CommonOpts& opts) {
  RunContext ctx = make_context(opts);
  auto rep = ctgibbs::validate_kernel(ctx.kernel, ctx.grid, ctx.cfg.tol_validate);
  ctgibbs::json out = {{"config_hash", ctx.cfg.hash()},
                       {"kernel", ctgibbs::to_string(ctx.kernel.kind)},
                       {"grid_n", ctx.grid.n},
                       {"max_col_dev", rep.max_col_dev},
                       {"max_row_dev", rep.max_row_dev},
                       {"min_value", rep.min_value},
                       {"symmetry_dev", rep.symmetry_dev},
                       {"symmetric_flag_consistent", rep.symmetric_flag_consistent},
                       {"kernel_pass", rep.pass}};
  bool pass = rep.pass;
  if (rep.min_value > 0.0) {
    ctgibbs::GridFunction theta = ctgibbs::invariant_density(ctx.kernel, ctx.grid);
    Eigen::MatrixXd adj = ctgibbs::adjoint_operator_matrix(ctx.kernel, ctx.grid);
    double resid = (adj * theta - theta).cwiseAbs().maxCoeff();
    out["theta_residual"] = resid;
    out["theta_min"] = theta.minCoeff();
    out["theta_integral"] = ctgibbs::integrate(ctx.grid, theta);
    ctgibbs::save_vector_csv(ctx.run_dir / "theta.csv", theta);
    pass = pass && resid < 1e-9;
  } else {
    out["theta_residual"] = nullptr;
  }
  out["pass"] = pass;
  ctgibbs::write_json_file(ctx.run_dir / "validate.json", out);
  std::cout << out.dump(2) << "\n";
  int code = pass ? kExitOk : kExitCheckFailed;
  write_manifest(ctx, "validate", code);
  return code;
}

int cmd_heat_kernel(const CommonOpts& opts) {
  RunContext ctx = make_context(opts);
  ctgibbs::json reports = ctgibbs::json::array();
  for (double t : ctx.cfg.times) {
    ctgibbs::HeatSeriesInfo info;
    ctgibbs::GridOperator op =
        ctgibbs::heat_kernel(ctx.kernel, ctx.grid, t, ctx.cfg.tol_series, 200, &info);
    ctgibbs::GridFunction ones = ctgibbs::constant(ctx.grid, 1.0);
    double markov_dev = (op.apply(ones).array() - 1.0).abs().maxCoeff();
    ctgibbs::GridOperator oracle = ctgibbs::feynman_kac_operator(
        ctx.kernel, ctgibbs::GridFunction::Zero(ctx.grid.n), ctx.grid, t);
    double oracle_gap =
        (op.kernel_values() - oracle.kernel_values()).cwiseAbs().maxCoeff();
    std::string tag = "t" + std::to_string(t);
    ctgibbs::save_matrix_csv(ctx.run_dir / ("heat_kernel_" + tag + ".csv"),
                             op.kernel_values());
    ctgibbs::save_vector_csv(ctx.run_dir / ("heat_atomic_" + tag + ".csv"),
                             op.atomic_diag());
    reports.push_back({{"t", t},
                       {"series_terms", info.terms},
                       {"last_term_norm", info.last_term_norm},
                       {"markov_dev", markov_dev},
                       {"oracle_gap", oracle_gap}});
  }
  ctgibbs::json out = {{"config_hash", ctx.cfg.hash()},
                       {"kernel", ctgibbs::to_string(ctx.kernel.kind)},
                       {"reports", reports}};
  ctgibbs::write_json_file(ctx.run_dir / "heat_kernel.json", out);
  std::cout << out.dump(2) << "\n";
  write_manifest(ctx, "heat-kernel", kExitOk);
  return kExitOk;
}

int cmd_eigen(const CommonOpts& opts) {
  RunContext ctx = make_context(opts);
  ctgibbs::json out;
  int code = kExitOk;
  try {
    ctgibbs::SpectralTriple triple =
        ctgibbs::principal_eigenpair(ctx.kernel, ctx.potential, ctx.grid);
    Eigen::MatrixXd A =
        ctgibbs::operator_matrix(ctx.kernel, ctx.grid, triple.wrap_slave);
    A -= Eigen::MatrixXd::Identity(ctx.grid.n, ctx.grid.n);
    A.diagonal() += ctx.potential;
    double res_r = (A * triple.right - triple.lambda * triple.right).cwiseAbs().maxCoeff();
    double res_l =
        (A.transpose() * triple.left - triple.lambda * triple.left).cwiseAbs().maxCoeff();
    out = {{"status", "ok"},
           {"config_hash", ctx.cfg.hash()},
           {"lambda", triple.lambda},
           {"residual_right", res_r},
           {"residual_left", res_l},
           {"norm_left", ctgibbs::integrate(ctx.grid, triple.left)},
           {"norm_pair",
            ctgibbs::integrate(ctx.grid, triple.right.cwiseProduct(triple.left))}};
    if (ctx.cfg.raw.contains("potential") &&
        ctx.cfg.raw["potential"].value("kind", "") == "matched_quadratic") {
      auto cf = ctgibbs::quadratic_closed_form(ctx.kernel.a0,
                                               ctx.cfg.raw["potential"].value("b", 0.0));
      out["closed_form_lambda"] = cf.lambda_plus;
      out["closed_form_gap"] = std::abs(triple.lambda - cf.lambda_plus);
    }
    ctgibbs::save_vector_csv(ctx.run_dir / "eigen_right.csv", triple.right);
    ctgibbs::save_vector_csv(ctx.run_dir / "eigen_left.csv", triple.left);
  } catch (const ctgibbs::ConvergenceError& e) {
    out = {{"status", "no_eigenpair"},
           {"config_hash", ctx.cfg.hash()},
           {"error", e.what()},
           {"iterations", e.iterations}};
    code = kExitNoConvergence;
  }
  ctgibbs::write_json_file(ctx.run_dir / "eigen.json", out);
  std::cout << out.dump(2) << "\n";
  write_manifest(ctx, "eigen", code);
  return code;
}

int cmd_gibbs(const CommonOpts& opts) {
  RunContext ctx = make_context(opts);
  ctgibbs::SpectralTriple triple =
      ctgibbs::principal_eigenpair(ctx.kernel, ctx.potential, ctx.grid);
  ctgibbs::GibbsModel gm = ctgibbs::gibbs_model(ctx.kernel, ctx.potential, triple, ctx.grid);

  double q_row_dev = (ctgibbs::gibbs_row_integrals(gm).array() - 1.0).abs().maxCoeff();
  double dual_pi = ctgibbs::gibbs_dual_apply(gm, gm.pi).cwiseAbs().maxCoeff();
  ctgibbs::GridOperator sg = ctgibbs::gibbs_semigroup(gm, 1.0);
  double stat_dev = (sg.adjoint().apply(gm.pi) - gm.pi).cwiseAbs().maxCoeff();
  double markov_dev =
      (sg.apply(ctgibbs::constant(ctx.grid, 1.0)).array() - 1.0).abs().maxCoeff();

  ctgibbs::save_vector_csv(ctx.run_dir / "gamma.csv", gm.gamma);
  ctgibbs::save_vector_csv(ctx.run_dir / "pi.csv", gm.pi);
  ctgibbs::save_matrix_csv(ctx.run_dir / "q_kernel.csv", gm.q_values);

  bool pass = q_row_dev < 1e-9 && dual_pi < 1e-9 && stat_dev < 1e-9 && markov_dev < 1e-9;
  ctgibbs::json out = {{"config_hash", ctx.cfg.hash()},
                       {"lambda", triple.lambda},
                       {"q_row_dev", q_row_dev},
                       {"dual_pi_sup", dual_pi},
                       {"stationarity_dev", stat_dev},
                       {"semigroup_markov_dev", markov_dev},
                       {"pass", pass}};
  ctgibbs::write_json_file(ctx.run_dir / "gibbs.json", out);
  std::cout << out.dump(2) << "\n";
  int code = pass ? kExitOk : kExitCheckFailed;
  write_manifest(ctx, "gibbs", code);
  return code;
}

int cmd_thermo(const CommonOpts& opts) {
  RunContext ctx = make_context(opts);
  ctgibbs::GridFunction theta = ctgibbs::invariant_density(ctx.kernel, ctx.grid);
  auto [ep, ep_star] = ctgibbs::reversal_invariance_check(ctx.kernel, theta, ctx.grid);

  ctgibbs::SpectralTriple triple =
      ctgibbs::principal_eigenpair(ctx.kernel, ctx.potential, ctx.grid);
  ctgibbs::PressureResult pr = ctgibbs::pressure(ctx.kernel, ctx.potential, ctx.grid);

  bool pass = std::abs(ep - ep_star) < 1e-9 && std::abs(pr.value - triple.lambda) < 1e-4;
  ctgibbs::json out = {{"config_hash", ctx.cfg.hash()},
                       {"ep", ep},
                       {"ep_star", ep_star},
                       {"ep_gap", std::abs(ep - ep_star)},
                       {"pressure", pr.value},
                       {"lambda", triple.lambda},
                       {"pressure_gap", std::abs(pr.value - triple.lambda)},
                       {"pressure_iterations", pr.iterations},
                       {"pressure_converged", pr.converged},
                       {"pass", pass}};

  if (ctx.kernel.kind == ctgibbs::KernelKind::sine_asym && ctx.cfg.raw.contains("sweep_a")) {
    std::ofstream sweep(ctx.run_dir / "ep_sweep.csv");
    sweep << "a,ep\n" << std::setprecision(17);
    for (double a : ctx.cfg.raw["sweep_a"].get<std::vector<double>>()) {
      ctgibbs::KernelModel k = ctgibbs::KernelModel::sine_asym(a);
      ctgibbs::GridFunction th = ctgibbs::invariant_density(k, ctx.grid);
      sweep << a << "," << ctgibbs::entropy_production_rate(k, th, ctx.grid) << "\n";
    }
    out["ep_sweep"] = "ep_sweep.csv";
  }

  if (ctx.cfg.raw.contains("sweep_quadratic")) {
    std::ofstream sweep(ctx.run_dir / "quadratic_sweep.csv");
    sweep << "a0,b,lambda,pressure,gap\n" << std::setprecision(17);
    for (const auto& row : ctx.cfg.raw["sweep_quadratic"]) {
      double a0 = row.at(0).get<double>();
      double b = row.at(1).get<double>();
      ctgibbs::KernelModel k = ctgibbs::KernelModel::polynomial_g(a0);
      ctgibbs::GridFunction Vq =
          (b + (1.0 - a0) * (ctx.grid.nodes.array() * (1.0 - ctx.grid.nodes.array())))
              .matrix();
      double lam = ctgibbs::principal_eigenpair(k, Vq, ctx.grid).lambda;
      double prv = ctgibbs::pressure(k, Vq, ctx.grid).value;
      sweep << a0 << "," << b << "," << lam << "," << prv << "," << std::abs(prv - lam)
            << "\n";
    }
    out["quadratic_sweep"] = "quadratic_sweep.csv";
  }

  ctgibbs::write_json_file(ctx.run_dir / "thermo.json", out);
  std::cout << out.dump(2) << "\n";
  int code = pass ? kExitOk : kExitCheckFailed;
  write_manifest(ctx, "thermo", code);
  return code;
}

int cmd_simulate(const CommonOpts& opts) {
  RunContext ctx = make_context(opts);
  ctgibbs::JumpProcess proc = ctgibbs::apriori_process(ctx.kernel);
  ctgibbs::GridFunction theta = ctgibbs::invariant_density(ctx.kernel, ctx.grid);

  for (int k = 0; k < 3; ++k) {
    ctgibbs::CounterRng rng = ctgibbs::CounterRng::for_path(ctx.cfg.seed, std::uint64_t(k));
    double x0 = ctgibbs::sample_density(ctx.grid, theta, rng);
    ctgibbs::CadlagPath p = ctgibbs::simulate(proc, x0, ctx.cfg.mc_T, rng);
    ctgibbs::save_path_csv(ctx.run_dir / ("path_" + std::to_string(k) + ".csv"), p);
  }

  // Feynman-Kac: Monte Carlo against the grid operator at a probe node.
  auto Vfn = potential_fn(ctx);
  double t = ctx.cfg.times.empty() ? 1.0 : ctx.cfg.times.front();
  int probe = ctx.grid.n / 3;
  ctgibbs::McResult fk = ctgibbs::mc_feynman_kac(
      proc, Vfn, [](double) { return 1.0; }, ctx.grid.nodes[probe], t,
      std::max(100L, ctx.cfg.mc_paths), ctx.cfg.seed);
  ctgibbs::GridOperator op =
      ctgibbs::feynman_kac_operator(ctx.kernel, ctx.potential, ctx.grid, t);
  double grid_value = op.apply(ctgibbs::constant(ctx.grid, 1.0))[probe];
  double fk_sigmas = fk.std_error > 0.0 ? std::abs(fk.estimate - grid_value) / fk.std_error
                                        : 0.0;

  ctgibbs::json out = {{"config_hash", ctx.cfg.hash()},
                       {"seed", ctx.cfg.seed},
                       {"feynman_kac",
                        {{"t", t},
                         {"probe_node", probe},
                         {"grid_value", grid_value},
                         {"mc_estimate", fk.estimate},
                         {"mc_std_error", fk.std_error},
                         {"sigmas", fk_sigmas},
                         {"n_paths", fk.n_paths}}}};

  // Pathwise entropy production against the quadrature value (positive
  // kernels only).
  if (ctgibbs::kernel_values(ctx.kernel, ctx.grid).minCoeff() > 0.0) {
    double ep_quad = ctgibbs::entropy_production_rate(ctx.kernel, theta, ctx.grid);
    ctgibbs::McResult ep = ctgibbs::mc_entropy_production(
        ctx.kernel, theta, ctx.grid, ctx.cfg.mc_T, ctx.cfg.mc_paths, ctx.cfg.seed);
    double sig = ep.std_error > 0.0 ? std::abs(ep.estimate - ep_quad) / ep.std_error : 0.0;
    out["entropy_production"] = {{"quadrature", ep_quad},
                                 {"mc_estimate", ep.estimate},
                                 {"mc_std_error", ep.std_error},
                                 {"sigmas", sig},
                                 {"T", ctx.cfg.mc_T},
                                 {"n_paths", ep.n_paths}};
  }

  ctgibbs::write_json_file(ctx.run_dir / "simulate.json", out);
  std::cout << out.dump(2) << "\n";
  write_manifest(ctx, "simulate", kExitOk);
  return kExitOk;
}

int cmd_skorokhod(const CommonOpts& opts) {
  RunContext ctx = make_context(opts);
  ctgibbs::JumpProcess proc = ctgibbs::apriori_process(ctx.kernel);
  long triples = ctx.cfg.raw.value("triples", 100L);
  std::vector<double> ts = ctx.cfg.raw.contains("expansiveness_times")
                               ? ctx.cfg.raw["expansiveness_times"].get<std::vector<double>>()
                               : std::vector<double>{0.5, 1.0, 2.0, 4.0};
  long passes = 0, total = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (long k = 0; k < triples; ++k) {
    ctgibbs::CounterRng rng = ctgibbs::CounterRng::for_path(ctx.cfg.seed, std::uint64_t(k));
    ctgibbs::PastPath w1 = ctgibbs::random_past_path(proc, 4.0, rng);
    ctgibbs::CadlagPath w2 = ctgibbs::simulate(proc, rng.uniform(), 6.0, rng);
    ctgibbs::CadlagPath w2p = ctgibbs::simulate(proc, rng.uniform(), 6.0, rng);
    for (double t : ts) {
      auto res = ctgibbs::expansiveness_check(w1, w2, w2p, t);
      passes += res.pass ? 1 : 0;
      ++total;
      worst_margin = std::min(worst_margin, std::exp(-t) - res.bound);
    }
  }

  // Demonstration distance bound between two independent paths.
  ctgibbs::CounterRng rng = ctgibbs::CounterRng::for_path(ctx.cfg.seed, 0xABCDULL);
  ctgibbs::CadlagPath a = ctgibbs::simulate(proc, rng.uniform(), 5.0, rng);
  ctgibbs::CadlagPath b = ctgibbs::simulate(proc, rng.uniform(), 5.0, rng);
  double demo = ctgibbs::skorokhod_upper(a, b, ctgibbs::match_candidates(a, b));

  bool all_pass = passes == total;
  ctgibbs::json out = {{"config_hash", ctx.cfg.hash()},
                       {"seed", ctx.cfg.seed},
                       {"expansiveness_pass", passes},
                       {"expansiveness_total", total},
                       {"all_pass", all_pass},
                       {"worst_margin", worst_margin},
                       {"demo_pair_bound", demo}};
  ctgibbs::write_json_file(ctx.run_dir / "skorokhod.json", out);
  std::cout << out.dump(2) << "\n";
  int code = all_pass ? kExitOk : kExitCheckFailed;
  write_manifest(ctx, "skorokhod", code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-time jump-process thermodynamics toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", opts.seed_override, "override the Monte Carlo seed");
    sub->add_option("--out", opts.out_override, "override the output directory");
    sub->add_option("--grid", opts.grid_override, "override the grid size");
  };

  CLI::App* validate = app.add_subcommand("validate", "kernel and stationary-density checks");
  CLI::App* heat = app.add_subcommand("heat-kernel", "series heat kernels at the config times");
  CLI::App* eigen = app.add_subcommand("eigen", "principal eigenpair of L + V");
  CLI::App* gibbs = app.add_subcommand("gibbs", "normalised process and its identities");
  CLI::App* thermo = app.add_subcommand("thermo", "entropy production and pressure");
  CLI::App* simulate = app.add_subcommand("simulate", "trajectories and Monte Carlo checks");
  CLI::App* skorokhod = app.add_subcommand("skorokhod", "path distances and expansiveness");
  for (CLI::App* sub : {validate, heat, eigen, gibbs, thermo, simulate, skorokhod}) {
    add_common(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(opts);
    if (heat->parsed()) return cmd_heat_kernel(opts);
    if (eigen->parsed()) return cmd_eigen(opts);
    if (gibbs->parsed()) return cmd_gibbs(opts);
    if (thermo->parsed()) return cmd_thermo(opts);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (skorokhod->parsed()) return cmd_skorokhod(opts);
  } catch (const ctgibbs::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ctgibbs::ConvergenceError& e) {
    std::cerr << "did not converge: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const ctgibbs::TruncationError& e) {
    std::cerr << "series truncation: " << e.what()
              << " (achieved " << e.achieved_bound << ")\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}
