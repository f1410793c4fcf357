// Acceptance suite: runs every top-level numerical contract at its stated
// tolerance and prints one pass/fail line per criterion. Exits with the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ctgibbs/gibbs.hpp"
#include "ctgibbs/grid.hpp"
#include "ctgibbs/kernel.hpp"
#include "ctgibbs/paths.hpp"
#include "ctgibbs/semigroup.hpp"
#include "ctgibbs/spectral.hpp"
#include "ctgibbs/thermo.hpp"

using namespace ctgibbs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
  double budget_s;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double ep_bruteforce(const KernelModel& m, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = double(i) / n;
    for (int j = 0; j < n; ++j) {
      double y = double(j) / n;
      acc += std::log(m(x, y) / m(y, x)) * m(x, y);
    }
  }
  return acc / double(n) / double(n);
}

bool criterion_cosine_heat(std::string& detail) {
  Grid g = Grid::uniform(64);
  KernelModel m = KernelModel::cosine();
  double worst = 0.0;
  for (double t : {0.1, 1.0, 5.0}) {
    Eigen::MatrixXd got = heat_kernel(m, g, t).kernel_values();
    double amp = std::exp(-0.75 * t) - std::exp(-t);
    double base = 1.0 - std::exp(-t);
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        double expect = 2.0 * std::cos(kTwoPi * (g.nodes[i] - g.nodes[j])) * amp + base;
        worst = std::max(worst, std::abs(got(i, j) - expect));
      }
    }
  }
  detail = fmt("max closed-form deviation %.3e (tol 1e-8)", worst);
  return worst < 1e-8;
}

bool criterion_quadratic_closed_form(std::string& detail) {
  Grid g = Grid::uniform(128);
  struct Cfg {
    double a0, b, c1;
  };
  double worst_l = 0.0, worst_f = 0.0;
  for (Cfg c : {Cfg{0.5, 0.2, 1.0}, Cfg{0.7, -0.3, 1.0}, Cfg{1.5, 0.0, -1.0}}) {
    KernelModel m = KernelModel::polynomial_g(c.a0);
    GridFunction V = quadratic_matched_potential(c.a0, c.b, g);
    SpectralTriple t = principal_eigenpair(m, V, g);
    auto cf = quadratic_closed_form(c.a0, c.b, c.c1);
    worst_l = std::max(worst_l, std::abs(t.lambda - cf.lambda_plus));
    GridFunction exact(g.n);
    for (int i = 0; i < g.n; ++i) exact[i] = cf.f_plus(g.nodes[i]);
    exact /= integrate(g, exact);
    GridFunction got = t.right / integrate(g, t.right);
    worst_f = std::max(worst_f, (got - exact).cwiseAbs().maxCoeff());
  }
  detail = fmt("lambda dev %.3e, eigenfunction sup dev %.3e (tol 1e-6)", worst_l, worst_f);
  return worst_l < 1e-6 && worst_f < 1e-6;
}

bool criterion_gibbs_identities(std::string& detail) {
  Grid g = Grid::uniform(128);
  KernelModel m = KernelModel::polynomial_g(0.5);
  GridFunction V = quadratic_matched_potential(0.5, 0.2, g);
  SpectralTriple t = principal_eigenpair(m, V, g);
  GibbsModel gm = gibbs_model(m, V, t, g);
  double row_dev = (gibbs_row_integrals(gm).array() - 1.0).abs().maxCoeff();
  double dual_sup = gibbs_dual_apply(gm, gm.pi).cwiseAbs().maxCoeff();
  GridOperator sg = gibbs_semigroup(gm, 1.0);
  double stat_dev = (sg.adjoint().apply(gm.pi) - gm.pi).cwiseAbs().maxCoeff();
  detail = fmt("Q row dev %.3e, dual(pi) sup %.3e, stationarity dev %.3e (tol 1e-9)",
               row_dev, dual_sup, stat_dev);
  return row_dev < 1e-9 && dual_sup < 1e-9 && stat_dev < 1e-9;
}

bool criterion_generator_limit(std::string& detail) {
  Grid g = Grid::uniform(64);
  KernelModel m = KernelModel::polynomial_g(0.5);
  GridFunction V = quadratic_matched_potential(0.5, 0.2, g);
  SpectralTriple t = principal_eigenpair(m, V, g);
  GibbsModel gm = gibbs_model(m, V, t, g);

  std::vector<GridFunction> probes;
  probes.push_back((kTwoPi * g.nodes.array()).cos().matrix());
  probes.push_back((2.0 * kTwoPi * g.nodes.array()).sin().matrix());
  probes.push_back((1.0 + 0.3 * (kTwoPi * g.nodes.array()).cos()).matrix());

  double worst_order_lo = 2.0, worst_order_hi = 0.0;
  for (const GridFunction& f : probes) {
    GridFunction lf = gibbs_generator_apply(gm, f);
    std::vector<double> ts = {1e-2, 1e-3, 1e-4};
    std::vector<double> errs;
    for (double t_small : ts) {
      GridFunction diff = (gibbs_semigroup(gm, t_small).apply(f) - f) / t_small - lf;
      errs.push_back(diff.cwiseAbs().maxCoeff());
    }
    // least-squares slope of log err against log t
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double x = std::log(ts[i]), y = std::log(errs[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
    worst_order_lo = std::min(worst_order_lo, slope);
    worst_order_hi = std::max(worst_order_hi, slope);
  }
  detail = fmt("observed order in [%.4f, %.4f] (need within [0.8, 1.2])", worst_order_lo,
               worst_order_hi);
  return worst_order_lo >= 0.8 && worst_order_hi <= 1.2;
}

bool criterion_pressure(std::string& detail) {
  Grid g = Grid::uniform(64);
  KernelModel m = KernelModel::polynomial_g(0.5);
  GridFunction V = quadratic_matched_potential(0.5, 0.2, g);
  SpectralTriple t = principal_eigenpair(m, V, g);
  PressureResult pr = pressure(m, V, g);
  double gap = std::abs(pr.value - t.lambda);

  CounterRng rng(2024);
  double worst_excess = -1e9;
  for (int k = 0; k < 50; ++k) {
    GridFunction u = GridFunction::Zero(g.n);
    for (int freq = 1; freq <= 3; ++freq) {
      double ac = (rng.uniform() - 0.5) * 0.8 / freq;
      double as = (rng.uniform() - 0.5) * 0.8 / freq;
      u.array() += ac * (kTwoPi * freq * g.nodes.array()).cos() +
                   as * (kTwoPi * freq * g.nodes.array()).sin();
    }
    GridFunction phi = u.array().exp();
    AdmissibleModel am = admissible_model(m, phi, g);
    double obj = relative_entropy(am) + integrate(g, V.cwiseProduct(am.mu_tilde));
    worst_excess = std::max(worst_excess, obj - t.lambda);
  }
  detail = fmt("optimizer gap %.3e (tol 1e-4), max probe excess %.3e (tol 1e-6)", gap,
               worst_excess);
  return gap < 1e-4 && worst_excess < 1e-6;
}

bool criterion_entropy_production(std::string& detail) {
  Grid g = Grid::uniform(64);
  double worst_sym = 0.0;
  for (const KernelModel& m : {KernelModel::cosine(), KernelModel::polynomial_g(0.5)}) {
    GridFunction theta = invariant_density(m, g);
    worst_sym = std::max(worst_sym, std::abs(entropy_production_rate(m, theta, g)));
  }

  KernelModel sine = KernelModel::sine_asym(0.5);
  GridFunction theta = invariant_density(sine, g);
  double ep = entropy_production_rate(sine, theta, g);
  double oracle_gap = std::abs(ep - ep_bruteforce(sine, 4 * g.n));

  double worst_rev = 0.0;
  {
    auto [e, es] = reversal_invariance_check(sine, theta, g);
    worst_rev = std::abs(e - es);
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    KernelModel m = sinkhorn_kernel(g, seed);
    GridFunction th = invariant_density(m, g);
    auto [e, es] = reversal_invariance_check(m, th, g);
    worst_rev = std::max(worst_rev, std::abs(e - es));
  }
  detail = fmt("|ep| on symmetric %.3e (tol 1e-12); sine ep %.6f, oracle gap %.3e "
               "(tol 1e-8); max |ep-ep*| %.3e (tol 1e-9)",
               worst_sym, ep, oracle_gap, worst_rev);
  return worst_sym < 1e-12 && ep > 0.0 && oracle_gap < 1e-8 && worst_rev < 1e-9;
}

bool criterion_pathwise(std::string& detail) {
  Grid g = Grid::uniform(64);

  // Monte Carlo entropy production against the quadrature value.
  KernelModel sine = KernelModel::sine_asym(0.5);
  GridFunction theta = invariant_density(sine, g);
  double ep_quad = entropy_production_rate(sine, theta, g);
  McResult ep = mc_entropy_production(sine, theta, g, 50.0, 10000, 424242);
  double ep_sig = std::abs(ep.estimate - ep_quad) / ep.std_error;

  // Monte Carlo Feynman-Kac against the grid operator at five probe nodes.
  KernelModel cos_k = KernelModel::cosine();
  GridFunction V = (0.3 * (kTwoPi * g.nodes.array()).cos()).matrix();
  double t = 1.0;
  GridOperator op = feynman_kac_operator(cos_k, V, g, t);
  GridFunction grid_vals = op.apply(constant(g, 1.0));
  JumpProcess proc = apriori_process(cos_k);
  double worst_fk_sig = 0.0;
  for (int node : {5, 18, 31, 44, 57}) {
    McResult r = mc_feynman_kac(
        proc, [](double x) { return 0.3 * std::cos(kTwoPi * x); },
        [](double) { return 1.0; }, g.nodes[node], t, 100000,
        900 + std::uint64_t(node));
    worst_fk_sig = std::max(worst_fk_sig, std::abs(r.estimate - grid_vals[node]) / r.std_error);
  }
  detail = fmt("ep deviation %.2f sigma; worst FK deviation %.2f sigma (need < 3)", ep_sig,
               worst_fk_sig);
  return ep_sig < 3.0 && worst_fk_sig < 3.0;
}

bool criterion_expansiveness(std::string& detail) {
  JumpProcess proc = apriori_process(KernelModel::sine_asym(0.5));
  int pass = 0, total = 0;
  double worst_margin = 1e9;
  for (std::uint64_t k = 0; k < 100; ++k) {
    CounterRng rng = CounterRng::for_path(777, k);
    PastPath w1 = random_past_path(proc, 4.0, rng);
    CadlagPath w2 = simulate(proc, rng.uniform(), 6.0, rng);
    CadlagPath w2p = simulate(proc, rng.uniform(), 6.0, rng);
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      auto res = expansiveness_check(w1, w2, w2p, t);
      pass += res.pass ? 1 : 0;
      ++total;
      worst_margin = std::min(worst_margin, std::exp(-t) + 1e-12 - res.bound);
    }
  }
  detail = fmt("%d/%d splice pairs within e^{-t}, worst margin %.3e", pass, total,
               worst_margin);
  return pass == total;
}

bool criterion_identity_suite(std::string& detail) {
  Grid g = Grid::uniform(64);
  double comp_cos = composition_residual(KernelModel::cosine(), g, 0.3, 0.9);
  double comp_sine = composition_residual(KernelModel::sine_asym(0.5), g, 0.3, 0.9);

  auto [fc, bc] = kolmogorov_residual(KernelModel::cosine(), g, 1.0, 1e-4);
  auto [fs, bs] = kolmogorov_residual(KernelModel::sine_asym(0.5), g, 1.0, 1e-4);
  double kol = std::max({fc, bc, fs, bs});

  GridFunction ones = constant(g, 1.0);
  GridFunction V = (0.3 * (kTwoPi * g.nodes.array()).cos()).matrix();
  double sa_cos = selfadjoint_residual(KernelModel::cosine(), V, g, 1.0, ones);
  double sa_pg = selfadjoint_residual(KernelModel::polynomial_g(0.5), V, g, 1.0, ones);
  double sa_sine =
      selfadjoint_residual(KernelModel::sine_asym(0.5), GridFunction::Zero(g.n), g, 1.0, ones);

  detail = fmt("composition %.3e (tol 1e-8); Kolmogorov %.3e (tol 1e-5); self-adjoint "
               "sym %.3e (tol 1e-9), asym %.3e (need > 1e-3)",
               std::max(comp_cos, comp_sine), kol, std::max(sa_cos, sa_pg), sa_sine);
  return comp_cos < 1e-8 && comp_sine < 1e-8 && kol < 1e-5 && sa_cos < 1e-9 &&
         sa_pg < 1e-9 && sa_sine > 1e-3;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"1. cosine heat-kernel closed form (t in {0.1,1,5}, n=64)", criterion_cosine_heat, 5.0},
      {"2. quadratic-family eigenpair closed form (n=128)", criterion_quadratic_closed_form,
       30.0},
      {"3. normalised-process identities (rows, dual, stationarity)",
       criterion_gibbs_identities, 60.0},
      {"4. semigroup generator limit, first order in t", criterion_generator_limit, 60.0},
      {"5. pressure optimum equals the principal eigenvalue", criterion_pressure, 120.0},
      {"6. entropy production: symmetric zero, oracle match, reversal invariance",
       criterion_entropy_production, 60.0},
      {"7. pathwise Monte Carlo consistency (ep and Feynman-Kac)", criterion_pathwise, 180.0},
      {"8. expansiveness bound on 100 spliced triples", criterion_expansiveness, 60.0},
      {"9. identity suite (composition, Kolmogorov, self-adjointness)",
       criterion_identity_suite, 60.0},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_budget = secs < c.budget_s;
    bool pass = ok && in_budget;
    failures += pass ? 0 : 1;
    std::printf("[%s] %s: %s (%.2fs of %.0fs budget)\n", pass ? "PASS" : "FAIL",
                c.name.c_str(), detail.c_str(), secs, c.budget_s);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures;
}
