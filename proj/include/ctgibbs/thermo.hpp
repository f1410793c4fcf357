#ifndef CTGIBBS_THERMO_HPP
#define CTGIBBS_THERMO_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctgibbs/errors.hpp"
#include "ctgibbs/grid.hpp"
#include "ctgibbs/kernel.hpp"
#include "ctgibbs/quadrature.hpp"
#include "ctgibbs/rng.hpp"

namespace ctgibbs {

/*
 * Tilted ("admissible") jump process defined by a positive function phi:
 * rate gamma~(x) = (1/phi(x)) int phi(y) P(x,y) dy, kernel
 * Q~(x,y) = phi(y) P(x,y) / (phi(x) gamma~(x)), and invariant density
 * mu~ proportional to phi * l~ where l~ solves
 * int l~(y) P(y,x) dy = gamma~(x) l~(x).
 */
struct AdmissibleModel {
  Grid grid;
  GridFunction phi;
  GridFunction gamma_tilde;
  GridFunction l_tilde;      // dual fixed point, integrates to 1
  GridFunction mu_tilde;     // invariant density phi * l~, normalised
  Eigen::MatrixXd q_values;  // Q~(x_i, y_j)
  Eigen::MatrixXd op;        // operator matrix used for the tilt
};

namespace detail {

// Dual fixed point  l <- C^T l / gamma~, normalised each sweep. The map
// preserves the pairing against gamma~ phi > 0, so its dominant eigenvalue
// is exactly 1 and the iteration converges for positive kernels.
inline GridFunction dual_fixed_point(const Grid& g, const Eigen::MatrixXd& op,
                                     const GridFunction& gamma, double tol = 1e-14,
                                     long max_iter = 200000,
                                     const GridFunction* warm = nullptr) {
  GridFunction l = warm ? *warm : constant(g, 1.0);
  double change = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    GridFunction next = (op.transpose() * l).cwiseQuotient(gamma);
    next /= next.sum();
    change = (next - l).cwiseAbs().maxCoeff();
    l = next;
    if (change < tol) {
      return l / integrate(g, l);
    }
  }
  throw ConvergenceError("admissible_model: dual fixed point did not converge", max_iter,
                         change);
}

}  // namespace detail

inline AdmissibleModel admissible_model(const KernelModel& m, const GridFunction& phi,
                                        const Grid& g) {
  if (phi.size() != g.n) throw std::invalid_argument("admissible_model: phi size mismatch");
  if (phi.minCoeff() <= 0.0) {
    throw std::domain_error("admissible_model: phi must be positive at every node");
  }
  AdmissibleModel am;
  am.grid = g;
  am.phi = phi;

  // Operand-kink gauge read off phi. The raw stencil estimate is then
  // refined through the rate function: since C phi is smooth across the
  // wrap, gamma~ = (C phi)/phi kinks exactly opposite to phi, and its jump
  // is a much cleaner read (the stencil on phi itself is polluted when phi
  // carries discretisation wiggles near the wrap).
  double slave = 0.0;
  double jump = estimated_wrap_jump(g, phi);
  if (jump != 0.0) slave = jump / phi[0];
  am.op = operator_matrix(m, g, slave);
  am.gamma_tilde = (am.op * phi).cwiseQuotient(phi);
  if (slave != 0.0) {
    for (int round = 0; round < 2; ++round) {
      double jg = estimated_wrap_jump(g, am.gamma_tilde);
      if (jg == 0.0) break;
      double refined = -jg / am.gamma_tilde[0];
      if (std::abs(refined - slave) < 1e-13 * std::max(1.0, std::abs(refined))) break;
      slave = refined;
      am.op = operator_matrix(m, g, slave);
      am.gamma_tilde = (am.op * phi).cwiseQuotient(phi);
    }
  }
  am.l_tilde = detail::dual_fixed_point(g, am.op, am.gamma_tilde);
  am.mu_tilde = phi.cwiseProduct(am.l_tilde);
  am.mu_tilde /= integrate(g, am.mu_tilde);

  Eigen::MatrixXd P = kernel_values(m, g);
  am.q_values.resize(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    am.q_values.row(i) = P.row(i).cwiseProduct(phi.transpose()) / (phi[i] * am.gamma_tilde[i]);
  }
  return am;
}

inline GridFunction admissible_row_integrals(const AdmissibleModel& am) {
  GridFunction cphi = am.op * am.phi;
  return cphi.cwiseQuotient(am.phi.cwiseProduct(am.gamma_tilde));
}

// Relative entropy rate of the tilted path law against the reference one,
// H = int (gamma~ - 1) d(mu~); reported exactly as this signed integral.
inline double relative_entropy(const AdmissibleModel& am) {
  return integrate(am.grid,
                   (am.gamma_tilde.array() - 1.0).matrix().cwiseProduct(am.mu_tilde));
}

struct PressureOptions {
  long max_iter = 20000;
  double grad_tol = 1e-8;
  double step0 = 1.0;
};

struct PressureResult {
  double value = 0.0;
  GridFunction maximizer;
  long iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

namespace detail {

struct PressureEval {
  double value;
  GridFunction l_tilde;
};

// Internal ascent objective in plain-dot form, J = <l, (L+V) phi> / <l, phi>,
// algebraically identical to H(tilt) + int V d(mu~) on the discrete level
// and exactly consistent with the adjoint gradient below.
inline PressureEval pressure_objective(const Grid& g, const Eigen::MatrixXd& op,
                                       const GridFunction& V, const GridFunction& phi,
                                       const GridFunction* warm = nullptr) {
  GridFunction gamma = (op * phi).cwiseQuotient(phi);
  GridFunction l = dual_fixed_point(g, op, gamma, 1e-14, 200000, warm);
  GridFunction lv_phi = op * phi - phi + V.cwiseProduct(phi);
  double val = l.dot(lv_phi) / l.dot(phi);
  return {val, l};
}

// Gradient of the objective J(phi) = <l(phi), A phi> / <l(phi), phi> where
// l(phi) solves C^T l = gamma~(phi) l. The implicit dependence on l is
// handled by one adjoint solve of the (singular) matrix C - diag(gamma~);
// the minimum-norm least-squares solution is enough since the null
// direction drops out of the gradient.
inline GridFunction pressure_gradient(const Grid& g, const Eigen::MatrixXd& op,
                                      const GridFunction& V, const GridFunction& phi,
                                      const GridFunction& l, double J) {
  const int n = g.n;
  GridFunction gamma = (op * phi).cwiseQuotient(phi);
  Eigen::MatrixXd A = op - Eigen::MatrixXd::Identity(n, n);
  A.diagonal() += V;

  double lphi = l.dot(phi);
  GridFunction r = (A * phi - J * phi) / lphi;
  double kappa = -l.dot(r) / l.sum();
  GridFunction rhs = r.array() + kappa;

  Eigen::MatrixXd B = op - Eigen::MatrixXd(gamma.asDiagonal());
  GridFunction q = B.completeOrthogonalDecomposition().solve(rhs);

  GridFunction expl = (A.transpose() * l - J * l) / lphi;
  GridFunction impl = B.transpose() * (q.cwiseProduct(l).cwiseQuotient(phi));
  return expl + impl;
}

}  // namespace detail

/*
 * Pressure: maximise H(tilt) + int V d(mu~) over positive tilts phi.
 * Gradient ascent in log(phi) (positivity for free) with backtracking and
 * adjoint-computed gradients, seeded at phi = 1. The value equals the
 * principal eigenvalue of L + V at the optimum.
 *
 * A potential with a wrap kink imprints the same kink on the maximising
 * tilt; the operator gauge for it depends weakly on the optimal value, so
 * the ascent is restarted under a refined gauge until both settle.
 */
inline PressureResult pressure(const KernelModel& m, const GridFunction& V, const Grid& g,
                               const PressureOptions& opts = {}) {
  double v_jump = estimated_wrap_jump(g, V);
  double slave = 0.0;

  PressureResult res;
  GridFunction u = GridFunction::Zero(g.n);  // log phi

  for (int gauge_round = 0; gauge_round < 4; ++gauge_round) {
    Eigen::MatrixXd op = operator_matrix(m, g, slave);
    GridFunction warm = constant(g, 1.0);
    auto eval = detail::pressure_objective(g, op, V, u.array().exp(), &warm);
    warm = eval.l_tilde;
    double J = eval.value;
    double step = opts.step0;

    for (long it = 0; it < opts.max_iter; ++it) {
      GridFunction phi = u.array().exp();
      GridFunction grad = detail::pressure_gradient(g, op, V, phi, warm, J);
      GridFunction gu = grad.cwiseProduct(phi);  // chain rule to log space
      res.grad_norm = gu.cwiseAbs().maxCoeff();
      res.iterations = it;
      if (res.grad_norm < opts.grad_tol) {
        res.converged = true;
        break;
      }
      double g2 = gu.squaredNorm();
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        GridFunction u_try = u + step * gu;
        u_try.array() -= u_try.mean();  // scale invariance: pin the gauge
        auto trial = detail::pressure_objective(g, op, V, u_try.array().exp(), &warm);
        if (trial.value >= J + 0.3 * step * g2) {
          u = u_try;
          J = trial.value;
          warm = trial.l_tilde;
          step = std::min(step * 1.7, 1e4);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // stalled line search: keep the best so far
    }
    res.value = J;

    if (v_jump == 0.0) break;
    double gamma0 = 1.0 + res.value - V[0];
    if (!(gamma0 > 1e-12)) break;
    double next = v_jump / gamma0;
    if (std::abs(next - slave) < 1e-10 * std::max(1.0, std::abs(next))) break;
    slave = next;
    res.converged = false;  // the refined gauge gets its own ascent
  }
  res.maximizer = u.array().exp();
  return res;
}

/*
 * Entropy production rate of the stationary jump process,
 *   ep = int int log(P(x,y)/P(y,x)) P(x,y) dy theta(x) dx,
 * zero exactly for symmetric kernels and nonnegative in general.
 */
inline double entropy_production_rate(const KernelModel& m, const GridFunction& theta,
                                      const Grid& g) {
  Eigen::MatrixXd P = kernel_values(m, g);
  if (P.minCoeff() <= 0.0) {
    throw std::domain_error("entropy_production_rate: kernel must be strictly positive");
  }
  double h = g.spacing();
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) {
    double inner = 0.0;
    for (int j = 0; j < g.n; ++j) {
      double pij = P(i, j);
      double pji = P(j, i);
      if (pij != pji) inner += std::log(pij / pji) * pij;
    }
    acc += inner * h * theta[i];
  }
  return acc * h;
}

// Time reversal: tabulated kernel P*(x,y) = theta(y) P(y,x) / theta(x).
// Row integrals are 1 by the invariance of theta.
inline KernelModel time_reversal_kernel(const KernelModel& m, const GridFunction& theta,
                                        const Grid& g) {
  if (theta.minCoeff() <= 0.0) {
    throw std::domain_error("time_reversal_kernel: theta must be positive");
  }
  Eigen::MatrixXd P = kernel_values(m, g);
  Eigen::MatrixXd rev(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      rev(i, j) = theta[j] * P(j, i) / theta[i];
    }
  }
  return KernelModel::tabulated(std::move(rev));
}

// ep computed on the process and on its time reversal (with the reversal's
// own stationary density); the two agree.
inline std::pair<double, double> reversal_invariance_check(const KernelModel& m,
                                                           const GridFunction& theta,
                                                           const Grid& g) {
  double ep = entropy_production_rate(m, theta, g);
  KernelModel rev = time_reversal_kernel(m, theta, g);
  GridFunction theta_rev = invariant_density(rev, g);
  double ep_star = entropy_production_rate(rev, theta_rev, g);
  return {ep, ep_star};
}

// Random doubly stochastic positive kernel: uniform entries over
// [floor, 1 + floor], then Sinkhorn sweeps normalising row and column
// integrals in the quadrature sense.
inline KernelModel sinkhorn_kernel(const Grid& g, std::uint64_t seed, int iterations = 200,
                                   double floor = 0.05) {
  CounterRng rng(seed, 0xD5ULL);
  Eigen::MatrixXd M(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      M(i, j) = floor + rng.uniform();
    }
  }
  double h = g.spacing();
  for (int it = 0; it < iterations; ++it) {
    for (int i = 0; i < g.n; ++i) M.row(i) /= M.row(i).sum() * h;
    for (int j = 0; j < g.n; ++j) M.col(j) /= M.col(j).sum() * h;
  }
  return KernelModel::tabulated(std::move(M));
}

}  // namespace ctgibbs

#endif  // CTGIBBS_THERMO_HPP
