#ifndef CTGIBBS_SEMIGROUP_HPP
#define CTGIBBS_SEMIGROUP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "ctgibbs/errors.hpp"
#include "ctgibbs/expm.hpp"
#include "ctgibbs/grid.hpp"
#include "ctgibbs/kernel.hpp"

namespace ctgibbs {

/*
 * An integral-plus-atomic operator on grid functions,
 *
 *   (O f)(x) = int K(x,y) f(y) dy + atomic(x) f(x),
 *
 * stored through its full application matrix so that
 * apply(f) = kernel_values * (weights o f) + atomic o f holds exactly.
 * The atomic channel is the no-jump part, e.g. e^{-t} for e^{tL} and
 * e^{t(V(x)-1)} for e^{t(L+V)}.
 */
class GridOperator {
 public:
  GridOperator(Grid grid, Eigen::MatrixXd full, GridFunction atomic)
      : grid_(std::move(grid)), full_(std::move(full)), atomic_(std::move(atomic)) {}

  static GridOperator identity(const Grid& g) {
    return GridOperator(g, Eigen::MatrixXd::Identity(g.n, g.n), constant(g, 1.0));
  }

  GridFunction apply(const GridFunction& f) const { return full_ * f; }

  const Eigen::MatrixXd& full_matrix() const { return full_; }
  const GridFunction& atomic_diag() const { return atomic_; }
  const Grid& grid() const { return grid_; }

  // Kernel values K(x_i, y_j): the full matrix minus the atomic diagonal,
  // with the quadrature weights divided out of the columns.
  Eigen::MatrixXd kernel_values() const {
    Eigen::MatrixXd K = full_;
    K.diagonal() -= atomic_;
    return K * grid_.n;
  }

  // Adjoint with respect to <f,g> = sum w f g; with uniform weights this is
  // the matrix transpose. The atomic channel is self-adjoint.
  GridOperator adjoint() const { return GridOperator(grid_, full_.transpose(), atomic_); }

  // this o other (apply `other` first). Atomic channels multiply; all cross
  // terms land in the kernel part of the product matrix.
  GridOperator compose(const GridOperator& other) const {
    return GridOperator(grid_, full_ * other.full_, atomic_.cwiseProduct(other.atomic_));
  }

 private:
  Grid grid_;
  Eigen::MatrixXd full_;
  GridFunction atomic_;
};

struct HeatSeriesInfo {
  int terms = 0;
  double last_term_norm = 0.0;
};

/*
 * Q_k is the kernel of L^k without its atomic part:
 * (L^k f)(x) = (-1)^k f(x) + int Q_k(x,y) f(y) dy. Rather than summing the
 * alternating binomial combination of kernel powers directly (which cancels
 * catastrophically for large k), use the algebraically identical recursion
 *
 *   Q_1 = P,   Q_{k+1} = (-1)^k P + (P o Q_k) - Q_k,
 *
 * here in operator-matrix form with M = operator_matrix(P).
 */
inline Eigen::MatrixXd q_k_matrix(const KernelModel& m, const Grid& g, int k) {
  if (k < 1) throw std::invalid_argument("q_k_matrix: k must be >= 1");
  Eigen::MatrixXd M = operator_matrix(m, g);
  Eigen::MatrixXd Q = M;
  double sign = -1.0;  // (-1)^k for k = 1
  for (int i = 1; i < k; ++i) {
    Q = sign * M + M * Q - Q;
    sign = -sign;
  }
  return Q * g.n;  // kernel values
}

/*
 * Series heat kernel: e^{tL} = e^{-t} atom + integral part with kernel
 * K_t = sum_{k>=1} t^k/k! Q_k, truncated when the added term drops below
 * tol in kernel-value max norm (never before k exceeds t, where the terms
 * peak). Times beyond 10 are split by the semigroup law to keep the term
 * growth bounded.
 */
inline GridOperator heat_kernel(const KernelModel& m, const Grid& g, double t,
                                double tol = 1e-12, int k_max = 200,
                                HeatSeriesInfo* info = nullptr) {
  if (t < 0.0) throw std::invalid_argument("heat_kernel: t must be >= 0");
  if (t > 10.0) {
    GridOperator half = heat_kernel(m, g, t / 2.0, tol, k_max, info);
    return half.compose(half);
  }
  if (t == 0.0) return GridOperator::identity(g);

  Eigen::MatrixXd M = operator_matrix(m, g);
  Eigen::MatrixXd Q = M;
  Eigen::MatrixXd sum = t * Q;  // k = 1 term
  double factor = t;            // t^k / k!
  double sign = -1.0;
  double term_norm = factor * Q.cwiseAbs().maxCoeff() * g.n;
  int k = 1;
  while (k < k_max) {
    if (term_norm < tol && k >= t) break;
    Q = sign * M + M * Q - Q;
    sign = -sign;
    ++k;
    factor *= t / k;
    Eigen::MatrixXd term = factor * Q;
    sum += term;
    term_norm = term.cwiseAbs().maxCoeff() * g.n;
  }
  if (info) {
    info->terms = k;
    info->last_term_norm = term_norm;
  }
  if (term_norm >= tol && k >= k_max) {
    throw TruncationError("heat_kernel: series not below tolerance", k, term_norm);
  }
  double atom = std::exp(-t);
  Eigen::MatrixXd full = atom * Eigen::MatrixXd::Identity(g.n, g.n) + sum;
  return GridOperator(g, std::move(full), constant(g, atom));
}

// e^{t(L+V)} through the matrix exponential of the assembled generator.
// The atomic channel is e^{t(V(x)-1)}; everything else is the integral part.
// wrap_slave propagates the operand-kink gauge of the eigenproblem flows.
inline GridOperator feynman_kac_operator(const KernelModel& m, const GridFunction& V,
                                         const Grid& g, double t, double wrap_slave = 0.0) {
  if (t < 0.0) throw std::invalid_argument("feynman_kac_operator: t must be >= 0");
  Eigen::MatrixXd A = operator_matrix(m, g, wrap_slave);
  A -= Eigen::MatrixXd::Identity(g.n, g.n);
  A.diagonal() += V;
  Eigen::MatrixXd full = expm(t * A);
  GridFunction atomic = (t * (V.array() - 1.0)).exp();
  return GridOperator(g, std::move(full), std::move(atomic));
}

// Max-norm residual of the two-time composition identity
// K_{s+t}(x,y) = e^{-t} K_s(x,y) + e^{-s} K_t(x,y) + int K_t(x,z) K_s(z,y) dz.
inline double composition_residual(const KernelModel& m, const Grid& g, double s, double t,
                                   double tol = 1e-12) {
  Eigen::MatrixXd Ks = heat_kernel(m, g, s, tol).kernel_values();
  Eigen::MatrixXd Kt = heat_kernel(m, g, t, tol).kernel_values();
  Eigen::MatrixXd Kst = heat_kernel(m, g, s + t, tol).kernel_values();
  Eigen::MatrixXd rhs =
      std::exp(-t) * Ks + std::exp(-s) * Kt + Kt * Ks * g.spacing();
  return (Kst - rhs).cwiseAbs().maxCoeff();
}

/*
 * Residuals of the two evolution equations of K_t,
 *   d/dt K_t(x,y) = L(K_t(.,y))(x) + e^{-t} P(x,y)      (generator in x)
 *   d/dt K_t(x,y) = L*(K_t(x,.))(y) + e^{-t} P(x,y)     (dual in y)
 * with the time derivative replaced by a central difference at step h.
 */
inline std::pair<double, double> kolmogorov_residual(const KernelModel& m, const Grid& g,
                                                     double t, double h_step,
                                                     double tol = 1e-12) {
  if (!(t > h_step && h_step > 0.0)) {
    throw std::invalid_argument("kolmogorov_residual: need t > h > 0");
  }
  Eigen::MatrixXd Kp = heat_kernel(m, g, t + h_step, tol).kernel_values();
  Eigen::MatrixXd Km = heat_kernel(m, g, t - h_step, tol).kernel_values();
  Eigen::MatrixXd K = heat_kernel(m, g, t, tol).kernel_values();
  Eigen::MatrixXd dK = (Kp - Km) / (2.0 * h_step);

  Eigen::MatrixXd P = kernel_values(m, g);
  Eigen::MatrixXd M = operator_matrix(m, g);
  double atom = std::exp(-t);
  // forward: L acts on the x argument (columns of K are functions of x)
  Eigen::MatrixXd fwd = M * K - K + atom * P;
  // backward: L* acts on the y argument (rows of K are functions of y)
  Eigen::MatrixXd bwd = K * adjoint_operator_matrix(m, g).transpose() - K + atom * P;
  double rf = (dK - fwd).cwiseAbs().maxCoeff();
  double rb = (dK - bwd).cwiseAbs().maxCoeff();
  return {rf, rb};
}

// Max over low-order trigonometric probes of
// |<P_t^V f, g>_mu - <f, P_t^V g>_mu| with d(mu) = theta dx.
inline double selfadjoint_residual(const KernelModel& m, const GridFunction& V, const Grid& g,
                                   double t, const GridFunction& theta) {
  GridOperator op = feynman_kac_operator(m, V, g, t);
  std::vector<GridFunction> probes;
  probes.push_back(constant(g, 1.0));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int freq = 1; freq <= 2; ++freq) {
    probes.push_back((two_pi * freq * g.nodes.array()).cos());
    probes.push_back((two_pi * freq * g.nodes.array()).sin());
  }
  double worst = 0.0;
  for (const auto& f : probes) {
    GridFunction of = op.apply(f);
    for (const auto& p : probes) {
      GridFunction og = op.apply(p);
      double lhs = (g.weights.array() * of.array() * p.array() * theta.array()).sum();
      double rhs = (g.weights.array() * f.array() * og.array() * theta.array()).sum();
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

}  // namespace ctgibbs

#endif  // CTGIBBS_SEMIGROUP_HPP
