#ifndef CTGIBBS_KERNEL_HPP
#define CTGIBBS_KERNEL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ctgibbs/errors.hpp"
#include "ctgibbs/grid.hpp"
#include "ctgibbs/quadrature.hpp"

namespace ctgibbs {

enum class KernelKind { cosine, polynomial_g, sine_asym, tabulated };

inline std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::cosine: return "cosine";
    case KernelKind::polynomial_g: return "polynomial_g";
    case KernelKind::sine_asym: return "sine_asym";
    case KernelKind::tabulated: return "tabulated";
  }
  return "?";
}

/*
 * Jump kernel P(x,y) on the circle: the density in y of the post-jump state
 * given the pre-jump state x. Built-in families:
 *
 *   cosine        P(x,y) = cos(2pi(x-y))/2 + 1
 *   polynomial_g  P(x,y) = g((x+y) mod 1), g(u) = a0 + 6(1-a0) u(1-u)
 *   sine_asym     P(x,y) = 1 + a sin(2pi(y-x)),  |a| < 1
 *   tabulated     values at grid node pairs, row = source point
 *
 * All built-ins integrate to 1 in each argument. polynomial_g is continuous
 * but has a derivative kink across the fold line x + y = 1 (mod 1); the
 * operator assembly below carries explicit corrections for it.
 */
class KernelModel {
 public:
  KernelKind kind = KernelKind::cosine;
  double a0 = 0.0;         // polynomial_g: g(0)
  double amp = 0.0;        // sine_asym amplitude
  Eigen::MatrixXd table;   // tabulated node values
  bool symmetric = true;

  static KernelModel cosine() {
    KernelModel m;
    m.kind = KernelKind::cosine;
    m.symmetric = true;
    return m;
  }

  static KernelModel polynomial_g(double a0) {
    if (!(a0 > 0.0)) {
      throw std::invalid_argument("polynomial_g: a0 must be positive");
    }
    if (a0 == 1.0) {
      throw std::invalid_argument("polynomial_g: a0 = 1 degenerates to the flat kernel");
    }
    KernelModel m;
    m.kind = KernelKind::polynomial_g;
    m.a0 = a0;
    m.symmetric = true;
    return m;
  }

  static KernelModel sine_asym(double a) {
    if (!(std::abs(a) < 1.0)) {
      throw std::invalid_argument("sine_asym: need |a| < 1");
    }
    KernelModel m;
    m.kind = KernelKind::sine_asym;
    m.amp = a;
    m.symmetric = (a == 0.0);
    return m;
  }

  static KernelModel tabulated(Eigen::MatrixXd values) {
    if (values.rows() != values.cols() || values.rows() < 2) {
      throw std::invalid_argument("tabulated: need a square matrix, at least 2x2");
    }
    KernelModel m;
    m.kind = KernelKind::tabulated;
    m.table = std::move(values);
    m.symmetric = (m.table - m.table.transpose()).cwiseAbs().maxCoeff() < 1e-12;
    return m;
  }

  double g_of(double u) const { return a0 + 6.0 * (1.0 - a0) * u * (1.0 - u); }

  double operator()(double x, double y) const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (kind) {
      case KernelKind::cosine:
        return 0.5 * std::cos(two_pi * (x - y)) + 1.0;
      case KernelKind::polynomial_g: {
        double s = x + y;
        if (s >= 1.0) s -= 1.0;
        return g_of(s);
      }
      case KernelKind::sine_asym:
        return 1.0 + amp * std::sin(two_pi * (y - x));
      case KernelKind::tabulated: {
        int n = int(table.rows());
        double xi = x * n;
        double yi = y * n;
        int i = int(std::lround(xi));
        int j = int(std::lround(yi));
        if (std::abs(xi - i) > 1e-9 * n || std::abs(yi - j) > 1e-9 * n) {
          throw std::domain_error("tabulated kernel: off-grid evaluation unsupported");
        }
        return table(((i % n) + n) % n, ((j % n) + n) % n);
      }
    }
    return 0.0;
  }

  // Global sup of P, used as the rejection-sampling envelope.
  double sup_value() const {
    switch (kind) {
      case KernelKind::cosine: return 1.5;
      case KernelKind::polynomial_g: return std::max(a0, 1.5 - 0.5 * a0);
      case KernelKind::sine_asym: return 1.0 + std::abs(amp);
      case KernelKind::tabulated: return table.maxCoeff();
    }
    return 0.0;
  }

  // Derivative kink of y -> P(x,y) across the fold line y = 1 - x.
  bool has_fold() const { return kind == KernelKind::polynomial_g; }
  double fold_jump() const { return 12.0 * (1.0 - a0); }
};

inline Eigen::MatrixXd kernel_values(const KernelModel& m, const Grid& g) {
  if (m.kind == KernelKind::tabulated) {
    if (m.table.rows() != g.n) {
      throw std::invalid_argument("tabulated kernel size does not match grid");
    }
    return m.table;
  }
  Eigen::MatrixXd vals(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      vals(i, j) = m(g.nodes[i], g.nodes[j]);
    }
  }
  return vals;
}

/*
 * Application matrix C of the integral operator f -> int P(.,y) f(y) dy.
 *
 * Base rule: C = h * P at node pairs. For the polynomial_g kernel the fold
 * kink contributes Euler-Maclaurin jump terms; they are added as local
 * matrix entries (h^2 antidiagonal term plus a symmetrised h^4 stencil), so
 * the row rule is exact for piecewise-quartic operands that are smooth away
 * from the fold and the wrap.
 *
 * wrap_slave handles operands with a derivative kink across the wrap whose
 * jump is proportional to the operand value there: jump = wrap_slave * f(0).
 * Eigenfunctions of L + V inherit exactly such a kink from a potential with
 * a wrap kink, with wrap_slave = jump(V') / gamma(0); smooth operands have
 * wrap_slave = 0. The column form keeps the matrix entrywise nonnegative
 * and leaves Perron structure intact.
 */
inline Eigen::MatrixXd operator_matrix(const KernelModel& m, const Grid& g,
                                       double wrap_slave = 0.0) {
  double h = g.spacing();
  Eigen::MatrixXd vals = kernel_values(m, g);
  Eigen::MatrixXd C = vals * h;
  if (m.has_fold()) {
    double J = m.fold_jump();
    for (int z = 0; z < g.n; ++z) {
      C(z, (g.n - z) % g.n) += h * h / 12.0 * J;
    }
    // h^4 fold term: -(h^4/720) * 3J * f''(y*), with f'' taken by the central
    // stencil. Written as a band around the antidiagonal z + j = 0 (mod n)
    // it is symmetric with zero row and column sums, so the Markov and dual
    // structure of the matrix is preserved exactly.
    double c4 = h * h * 3.0 * J / 720.0;
    for (int z = 0; z < g.n; ++z) {
      int js = (g.n - z) % g.n;
      C(z, (js - 1 + g.n) % g.n) -= c4;
      C(z, js) += 2.0 * c4;
      C(z, (js + 1) % g.n) -= c4;
    }
  }
  if (wrap_slave != 0.0) {
    C.col(0) += (h * h / 12.0) * wrap_slave * vals.col(0);
  }
  return C;
}

// Discretisation of the adjoint integral g -> int P(z,.) g(z) dz with the
// same corrections. Coincides with operator_matrix for symmetric kernels.
inline Eigen::MatrixXd adjoint_operator_matrix(const KernelModel& m, const Grid& g) {
  if (m.symmetric) return operator_matrix(m, g);
  return operator_matrix(m, g).transpose();
}

struct KernelValidation {
  double max_col_dev = 0.0;   // deviation of int P(x,y) dx from 1
  double max_row_dev = 0.0;   // deviation of int P(x,y) dy from 1
  double min_value = 0.0;
  double symmetry_dev = 0.0;
  bool symmetric_flag_consistent = true;
  bool pass = false;
};

inline KernelValidation validate_kernel(const KernelModel& m, const Grid& g, double tol) {
  Eigen::MatrixXd vals = kernel_values(m, g);
  KernelValidation rep;
  rep.min_value = vals.minCoeff();
  rep.symmetry_dev = (vals - vals.transpose()).cwiseAbs().maxCoeff();
  rep.symmetric_flag_consistent = m.symmetric == (rep.symmetry_dev < 1e-12);
  for (int j = 0; j < g.n; ++j) {
    // the fold kink of kernel sections has a known derivative jump
    std::vector<KinkJump> kinks;
    if (m.has_fold()) kinks.push_back({(g.n - j) % g.n, m.fold_jump(), 0.0});
    double col = integrate_with_jumps(g, vals.col(j), kinks);
    double row = integrate_with_jumps(g, vals.row(j).transpose(), kinks);
    rep.max_col_dev = std::max(rep.max_col_dev, std::abs(col - 1.0));
    rep.max_row_dev = std::max(rep.max_row_dev, std::abs(row - 1.0));
  }
  rep.pass = rep.max_col_dev < tol && rep.min_value >= 0.0 && rep.symmetric_flag_consistent;
  return rep;
}

/*
 * Stationary density: the positive normalised solution of
 * int theta(y) P(y,x) dy = theta(x), by power iteration on the adjoint
 * operator matrix. Requires a strictly positive kernel for uniqueness.
 */
inline GridFunction invariant_density(const KernelModel& m, const Grid& g, double tol = 1e-12,
                                      long max_iter = 100000) {
  Eigen::MatrixXd adj = adjoint_operator_matrix(m, g);
  GridFunction theta = constant(g, 1.0);
  double res = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    GridFunction next = adj * theta;
    next /= integrate(g, next);
    res = (next - theta).cwiseAbs().maxCoeff() / next.cwiseAbs().maxCoeff();
    theta = next;
    if (res < tol) {
      if (theta.minCoeff() <= 0.0) {
        throw SpectralAnomalyError("invariant_density: converged density not positive");
      }
      return theta;
    }
  }
  throw ConvergenceError("invariant_density: power iteration did not converge", max_iter, res);
}

// k-fold kernel power by discrete convolution with the grid weights:
// P^{k+1}(x,y) = sum_z w_z P^k(x,z) P(z,y). Returns kernel values.
inline Eigen::MatrixXd kernel_power(const KernelModel& m, const Grid& g, int k) {
  if (k < 1) throw std::invalid_argument("kernel_power: k must be >= 1");
  Eigen::MatrixXd base = kernel_values(m, g);
  Eigen::MatrixXd acc = base;
  for (int i = 1; i < k; ++i) {
    acc = acc * base * g.spacing();
  }
  return acc;
}

}  // namespace ctgibbs

#endif  // CTGIBBS_KERNEL_HPP
