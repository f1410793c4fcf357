#ifndef CTGIBBS_GRID_HPP
#define CTGIBBS_GRID_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace ctgibbs {

// Grid functions are value vectors aligned with Grid::nodes.
using GridFunction = Eigen::VectorXd;

// Uniform periodic grid on [0,1): nodes at k/n, all weights 1/n.
// The endpoint 1 is identified with 0, so every integral taken with these
// weights is an integral over the circle.
struct Grid {
  int n = 0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  static Grid uniform(int n) {
    if (n < 2) {
      throw std::invalid_argument("Grid::uniform: need at least 2 nodes");
    }
    Grid g;
    g.n = n;
    g.nodes = Eigen::VectorXd::LinSpaced(n, 0.0, double(n - 1) / n);
    g.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
    return g;
  }

  double spacing() const { return 1.0 / n; }
};

inline GridFunction constant(const Grid& g, double value) {
  return GridFunction::Constant(g.n, value);
}

// Plain weighted inner product  <f,g> = sum_i w_i f_i g_i  ~  int f g dx.
inline double dot_dx(const Grid& g, const GridFunction& f, const GridFunction& h) {
  return (g.weights.array() * f.array() * h.array()).sum();
}

inline double wrap01(double x) {
  double y = x - std::floor(x);
  return (y == 1.0) ? 0.0 : y;
}

// Periodic piecewise-linear interpolation of a grid function.
inline double interp_periodic(const Grid& g, const GridFunction& f, double x) {
  double y = wrap01(x) * g.n;
  int k = int(std::floor(y));
  double frac = y - k;
  int k0 = k % g.n;
  int k1 = (k + 1) % g.n;
  return (1.0 - frac) * f[k0] + frac * f[k1];
}

}  // namespace ctgibbs

#endif  // CTGIBBS_GRID_HPP
