#ifndef CTGIBBS_ERRORS_HPP
#define CTGIBBS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ctgibbs {

// An iterative solver ran out of iterations before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, long iterations, double residual)
      : std::runtime_error(what), iterations(iterations), residual(residual) {}
  long iterations;
  double residual;
};

// A series was truncated before the term norm dropped below tolerance.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, int terms, double achieved_bound)
      : std::runtime_error(what), terms(terms), achieved_bound(achieved_bound) {}
  int terms;
  double achieved_bound;
};

// Rejection sampling exceeded its proposal cap.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A converged eigenvector failed the positivity check.
class SpectralAnomalyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctgibbs

#endif  // CTGIBBS_ERRORS_HPP
