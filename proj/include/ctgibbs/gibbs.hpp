#ifndef CTGIBBS_GIBBS_HPP
#define CTGIBBS_GIBBS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "ctgibbs/grid.hpp"
#include "ctgibbs/kernel.hpp"
#include "ctgibbs/semigroup.hpp"
#include "ctgibbs/spectral.hpp"

namespace ctgibbs {

/*
 * Normalised jump process built from a principal eigenpair: jump rate
 * gamma(x) = 1 + lambda - V(x), kernel Q(x,y) = P(x,y) r(y) / (r(x) gamma(x)),
 * stationary density pi = r l. The stored operator matrix is the exact one
 * the eigenpair was solved in, so the defining identities (unit row
 * integrals of Q, stationarity of pi) hold at solver precision.
 */
struct GibbsModel {
  Grid grid;
  KernelModel kernel;
  GridFunction potential;
  SpectralTriple triple;
  GridFunction gamma;       // jump rate
  Eigen::MatrixXd q_values; // Q(x_i, y_j)
  GridFunction pi;          // stationary density, integrates to 1
  Eigen::MatrixXd op;       // operator matrix C of f -> int P(.,y) f dy
};

inline GibbsModel gibbs_model(const KernelModel& m, const GridFunction& V,
                              const SpectralTriple& triple, const Grid& g) {
  GibbsModel gm;
  gm.grid = g;
  gm.kernel = m;
  gm.potential = V;
  gm.triple = triple;
  gm.gamma = (1.0 + triple.lambda - V.array()).matrix();
  if (gm.gamma.minCoeff() <= 0.0) {
    throw std::domain_error("gibbs_model: jump rate 1 + lambda - V must be positive");
  }
  Eigen::MatrixXd P = kernel_values(m, g);
  gm.q_values.resize(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    gm.q_values.row(i) =
        P.row(i).cwiseProduct(triple.right.transpose()) / (triple.right[i] * gm.gamma[i]);
  }
  gm.pi = triple.right.cwiseProduct(triple.left);
  gm.pi /= integrate(g, gm.pi);
  gm.op = operator_matrix(m, g, triple.wrap_slave);
  return gm;
}

// Row integrals of Q, evaluated through the stored operator matrix; equal
// to 1 at solver precision by the eigen-equation.
inline GridFunction gibbs_row_integrals(const GibbsModel& gm) {
  GridFunction cr = gm.op * gm.triple.right;
  return cr.cwiseQuotient(gm.triple.right.cwiseProduct(gm.gamma));
}

// (L_V f)(x) = gamma(x) int [f(y) - f(x)] Q(x,y) dy
//            = (C(r f))(x)/r(x) - gamma(x) f(x).
inline GridFunction gibbs_generator_apply(const GibbsModel& gm, const GridFunction& f) {
  GridFunction rf = gm.triple.right.cwiseProduct(f);
  return (gm.op * rf).cwiseQuotient(gm.triple.right) - gm.gamma.cwiseProduct(f);
}

// Normalised semigroup by the Doob transform of the Feynman-Kac operator:
// (P_t^V f)(x) = e^{t(L+V)}(r f)(x) / (e^{lambda t} r(x)).
// The atomic channel e^{t(V-1-lambda)} = e^{-t gamma} is the no-jump weight.
inline GridOperator gibbs_semigroup(const GibbsModel& gm, double t) {
  if (t < 0.0) throw std::invalid_argument("gibbs_semigroup: t must be >= 0");
  const Grid& g = gm.grid;
  Eigen::MatrixXd A = gm.op - Eigen::MatrixXd::Identity(g.n, g.n);
  A.diagonal() += gm.potential;
  Eigen::MatrixXd E = expm(t * A);
  double scale = std::exp(-gm.triple.lambda * t);
  Eigen::MatrixXd full = scale * gm.triple.right.cwiseInverse().asDiagonal() * E *
                         gm.triple.right.asDiagonal();
  GridFunction atomic = (-t * gm.gamma.array()).exp();
  return GridOperator(g, std::move(full), std::move(atomic));
}

// Dual in L^2(dx): (L_V* g)(x) = int gamma(y) g(y) Q(y,x) dy - gamma(x) g(x)
//                              = r(x) (C^T (g/r))(x) - gamma(x) g(x).
// Annihilates pi exactly, since l = pi/r is a left eigenfunction of C.
inline GridFunction gibbs_dual_apply(const GibbsModel& gm, const GridFunction& gfun) {
  GridFunction ratio = gfun.cwiseQuotient(gm.triple.right);
  return gm.triple.right.cwiseProduct(gm.op.transpose() * ratio) -
         gm.gamma.cwiseProduct(gfun);
}

}  // namespace ctgibbs

#endif  // CTGIBBS_GIBBS_HPP
