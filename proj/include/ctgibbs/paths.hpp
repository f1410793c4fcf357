#ifndef CTGIBBS_PATHS_HPP
#define CTGIBBS_PATHS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <thread>
#include <vector>

#include "ctgibbs/errors.hpp"
#include "ctgibbs/gibbs.hpp"
#include "ctgibbs/grid.hpp"
#include "ctgibbs/kernel.hpp"
#include "ctgibbs/rng.hpp"

namespace ctgibbs {

/*
 * Piecewise-constant cadlag trajectory on [0, horizon]: right-continuous,
 * value x0 before the first jump, states[k] from jump_times[k] onwards.
 * Evaluation past the horizon freezes at the final state.
 */
struct CadlagPath {
  double x0 = 0.0;
  std::vector<double> jump_times;  // strictly increasing, in (0, horizon]
  std::vector<double> states;      // one per jump
  double horizon = 0.0;

  double operator()(double s) const {
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), s);
    if (it == jump_times.begin()) return x0;
    return states[std::size_t(it - jump_times.begin()) - 1];
  }

  std::size_t jump_count() const { return jump_times.size(); }
};

// Past trajectory on (-inf, 0], left-continuous with right limits: value
// `initial` up to and including the first jump time, states[k] on
// (jump_times[k], jump_times[k+1]].
struct PastPath {
  double initial = 0.0;
  std::vector<double> jump_times;  // strictly increasing, <= 0
  std::vector<double> states;

  double operator()(double s) const {
    auto it = std::lower_bound(jump_times.begin(), jump_times.end(), s);
    if (it == jump_times.begin()) return initial;
    return states[std::size_t(it - jump_times.begin()) - 1];
  }

  double right_limit(double s) const {
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), s);
    if (it == jump_times.begin()) return initial;
    return states[std::size_t(it - jump_times.begin()) - 1];
  }
};

/*
 * Concatenation (w1 |^t w2)(s) = w1(s-t) for s < t, w2(s-t) for s >= t,
 * re-expressed as a cadlag path (the output is right-continuous also at the
 * copied w1 jumps; the two conventions differ only at the jump instants
 * themselves). Both spliced paths built from the same w1 share their prefix
 * on [0, t) exactly.
 */
inline CadlagPath splice(const PastPath& w1, const CadlagPath& w2, double t) {
  if (t < 0.0) throw std::invalid_argument("splice: t must be >= 0");
  if (t == 0.0) return w2;
  CadlagPath out;
  out.horizon = t + w2.horizon;
  out.x0 = w1.right_limit(-t);
  double last = out.x0;
  for (std::size_t k = 0; k < w1.jump_times.size(); ++k) {
    double tau = w1.jump_times[k];
    if (tau <= -t || tau >= 0.0) continue;
    out.jump_times.push_back(t + tau);
    out.states.push_back(w1.states[k]);
    last = w1.states[k];
  }
  if (w2.x0 != last) {
    out.jump_times.push_back(t);
    out.states.push_back(w2.x0);
  }
  for (std::size_t k = 0; k < w2.jump_times.size(); ++k) {
    out.jump_times.push_back(t + w2.jump_times[k]);
    out.states.push_back(w2.states[k]);
  }
  return out;
}

// Strictly increasing piecewise-linear time change on [0, inf) with
// lambda(0) = 0; slope 1 beyond the last breakpoint.
class TimeChange {
 public:
  TimeChange(std::vector<double> xs, std::vector<double> ys, double tail_slope = 1.0)
      : xs_(std::move(xs)), ys_(std::move(ys)), tail_(tail_slope) {
    if (xs_.empty() || xs_[0] != 0.0 || ys_[0] != 0.0 || xs_.size() != ys_.size()) {
      throw std::invalid_argument("TimeChange: breakpoints must start at (0,0)");
    }
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (!(xs_[i] > xs_[i - 1] && ys_[i] > ys_[i - 1])) {
        throw std::invalid_argument("TimeChange: breakpoints must be strictly increasing");
      }
    }
    if (!(tail_ > 0.0)) throw std::invalid_argument("TimeChange: tail slope must be positive");
  }

  static TimeChange identity() { return TimeChange({0.0}, {0.0}, 1.0); }

  // Maps a -> b linearly on [0, a], then continues with slope 1.
  static TimeChange single_match(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("single_match: need a, b > 0");
    return TimeChange({0.0, a}, {0.0, b}, 1.0);
  }

  double operator()(double s) const {
    std::size_t i = segment(xs_, s);
    if (i + 1 >= xs_.size()) return ys_.back() + tail_ * (s - xs_.back());
    double sl = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    return ys_[i] + sl * (s - xs_[i]);
  }

  double inverse(double u) const {
    std::size_t i = segment(ys_, u);
    if (i + 1 >= ys_.size()) return xs_.back() + (u - ys_.back()) / tail_;
    double sl = (xs_[i + 1] - xs_[i]) / (ys_[i + 1] - ys_[i]);
    return xs_[i] + sl * (u - ys_[i]);
  }

  // gamma = sup |log slope|.
  double gamma() const {
    double worst = std::abs(std::log(tail_));
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
      double sl = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
      worst = std::max(worst, std::abs(std::log(sl)));
    }
    return worst;
  }

  const std::vector<double>& breakpoints() const { return xs_; }
  const std::vector<double>& values() const { return ys_; }

 private:
  static std::size_t segment(const std::vector<double>& v, double s) {
    auto it = std::upper_bound(v.begin(), v.end(), s);
    if (it == v.begin()) return 0;
    return std::size_t(it - v.begin()) - 1;
  }
  std::vector<double> xs_, ys_;
  double tail_;
};

namespace detail {

inline double capped_metric(double a, double b) { return std::min(std::abs(a - b), 1.0); }

// d(x, y, lambda, u) = sup_s q(x(s ^ u), y(lambda(s) ^ u)). Both arguments
// are piecewise constant in s, so the sup is attained on the merged
// breakpoint skeleton.
inline double truncated_sup(const CadlagPath& x, const CadlagPath& y, const TimeChange& lam,
                            double u) {
  std::vector<double> pts;
  pts.push_back(0.0);
  pts.push_back(u);
  pts.push_back(lam.inverse(u));
  for (double t : x.jump_times) pts.push_back(t);
  for (double t : y.jump_times) pts.push_back(lam.inverse(t));
  for (double t : lam.breakpoints()) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(), [](double s) { return s < 0.0; }),
            pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  auto eval = [&](double s) {
    double a = x(std::min(s, u));
    double b = y(std::min(lam(s), u));
    return capped_metric(a, b);
  };
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    best = std::max(best, eval(0.5 * (pts[i] + pts[i + 1])));
  }
  best = std::max(best, eval(pts.back() + 0.5));
  return best;
}

}  // namespace detail

struct SkorokhodOptions {
  double u_max = 30.0;
  int u_cells = 2048;
};

/*
 * Upper bound on the Skorokhod distance
 *   d(x,y) = inf_lambda [ gamma(lambda) v int_0^inf e^{-u} d(x,y,lambda,u) du ]
 * over the supplied candidates. The u-integral is evaluated on a grid
 * merged with every structural breakpoint (jump times and their images
 * under the time change), taking the largest sampled d on each cell, and
 * the tail beyond u_max is bounded by e^{-u_max}; the result is a true
 * upper bound for the candidate set.
 */
inline double skorokhod_upper(const CadlagPath& x, const CadlagPath& y,
                              const std::vector<TimeChange>& candidates,
                              const SkorokhodOptions& opts = {}) {
  if (candidates.empty()) {
    throw std::invalid_argument("skorokhod_upper: need at least one candidate (identity)");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const TimeChange& lam : candidates) {
    std::vector<double> cuts;
    cuts.reserve(std::size_t(opts.u_cells) + 64);
    for (int i = 0; i <= opts.u_cells; ++i) {
      cuts.push_back(opts.u_max * double(i) / opts.u_cells);
    }
    auto add = [&](double u) {
      if (u > 0.0 && u < opts.u_max) cuts.push_back(u);
    };
    for (double t : x.jump_times) {
      add(t);
      add(lam(t));
      add(lam.inverse(t));
    }
    for (double t : y.jump_times) {
      add(t);
      add(lam(t));
      add(lam.inverse(t));
    }
    for (double t : lam.breakpoints()) {
      add(t);
      add(lam(t));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      double a = cuts[i], b = cuts[i + 1];
      double d = std::max({detail::truncated_sup(x, y, lam, a),
                           detail::truncated_sup(x, y, lam, 0.5 * (a + b)),
                           detail::truncated_sup(x, y, lam, b)});
      integral += d * (std::exp(-a) - std::exp(-b));
    }
    integral += std::exp(-opts.u_max);  // d <= 1 tail
    best = std::min(best, std::max(lam.gamma(), integral));
  }
  return best;
}

// Identity plus pairwise jump-time matches within a window, closed under
// inversion, capped in count. Exact optimisation over all time changes is
// not attempted; the bounds only ever need good candidates.
inline std::vector<TimeChange> match_candidates(const CadlagPath& x, const CadlagPath& y,
                                                double window = 0.5, int cap = 64) {
  std::vector<TimeChange> out;
  out.push_back(TimeChange::identity());
  for (double tx : x.jump_times) {
    for (double ty : y.jump_times) {
      if (int(out.size()) + 2 > cap) return out;
      if (tx > 0.0 && ty > 0.0 && std::abs(tx - ty) <= window && tx != ty) {
        out.push_back(TimeChange::single_match(tx, ty));
        out.push_back(TimeChange::single_match(ty, tx));
      }
    }
  }
  return out;
}

struct ExpansivenessResult {
  double bound = 0.0;
  bool pass = false;
};

// Paths agreeing up to time t are at Skorokhod distance at most e^{-t};
// checked with the identity time change, which already realises the bound.
inline ExpansivenessResult expansiveness_check(const PastPath& w1, const CadlagPath& w2,
                                               const CadlagPath& w2p, double t) {
  CadlagPath a = splice(w1, w2, t);
  CadlagPath b = splice(w1, w2p, t);
  double bound = skorokhod_upper(a, b, {TimeChange::identity()});
  return {bound, bound <= std::exp(-t) + 1e-12};
}

/*
 * Jump-process simulation. A process is its rate function, its jump density
 * and a sampler for the post-jump state; `density` must evaluate anywhere
 * the sampler can land.
 */
struct JumpProcess {
  std::function<double(double)> rate;
  std::function<double(double, double)> density;           // (from, to)
  std::function<double(double, CounterRng&)> sample_next;  // draws `to` given `from`
};

// Rejection sampler against a constant envelope.
inline double rejection_sample(const std::function<double(double, double)>& density,
                               double sup, double from, CounterRng& rng,
                               long cap = 1000000) {
  for (long k = 0; k < cap; ++k) {
    double y = rng.uniform();
    if (rng.uniform() * sup <= density(from, y)) return y;
  }
  throw SamplingError("rejection_sample: proposal cap exceeded (kernel too peaked)");
}

// Unit-rate process with the model's own kernel. Tabulated kernels are read
// as piecewise-constant densities on the grid cells.
inline JumpProcess apriori_process(const KernelModel& m) {
  JumpProcess p;
  p.rate = [](double) { return 1.0; };
  if (m.kind == KernelKind::tabulated) {
    Eigen::MatrixXd table = m.table;
    int n = int(table.rows());
    auto cell = [n](double x) { return std::min(int(x * n), n - 1); };
    p.density = [table, cell](double x, double y) { return table(cell(x), cell(y)); };
    p.sample_next = [table, cell, n](double x, CounterRng& rng) {
      int row = cell(x);
      double target = rng.uniform() * table.row(row).sum();
      double acc = 0.0;
      int j = 0;
      for (; j < n - 1; ++j) {
        acc += table(row, j);
        if (acc >= target) break;
      }
      return (j + rng.uniform()) / n;
    };
  } else {
    double sup = m.sup_value();
    p.density = [m](double x, double y) { return m(x, y); };
    p.sample_next = [m, sup](double x, CounterRng& rng) {
      return rejection_sample([&m](double a, double b) { return m(a, b); }, sup, x, rng);
    };
  }
  return p;
}

// Gibbs process sampled through periodic interpolation of the grid data.
inline JumpProcess gibbs_jump_process(const GibbsModel& gm) {
  JumpProcess p;
  Grid g = gm.grid;
  KernelModel kernel = gm.kernel;
  GridFunction gamma = gm.gamma;
  GridFunction r = gm.triple.right;
  p.rate = [g, gamma](double x) { return interp_periodic(g, gamma, x); };
  p.density = [g, kernel, gamma, r](double x, double y) {
    return kernel(x, y) * interp_periodic(g, r, y) /
           (interp_periodic(g, r, x) * interp_periodic(g, gamma, x));
  };
  double env = kernel.sup_value() * r.maxCoeff();
  p.sample_next = [g, kernel, r, env](double x, CounterRng& rng) {
    auto numer = [&](double a, double b) {
      return kernel(a, b) * interp_periodic(g, r, b);
    };
    return rejection_sample(numer, env, x, rng);
  };
  return p;
}

// Holding times are exponential at the current state's rate; the post-jump
// state comes from the sampler. Deterministic given the rng stream.
inline CadlagPath simulate(const JumpProcess& p, double x0, double T, CounterRng& rng) {
  if (!(T > 0.0)) throw std::invalid_argument("simulate: need T > 0");
  CadlagPath path;
  path.x0 = x0;
  path.horizon = T;
  double s = 0.0;
  double x = x0;
  while (true) {
    s += rng.exponential(p.rate(x));
    if (s > T) break;
    x = p.sample_next(x, rng);
    path.jump_times.push_back(s);
    path.states.push_back(x);
  }
  return path;
}

// A past trajectory drawn from the process, supported on [-T_back, 0].
inline PastPath random_past_path(const JumpProcess& p, double T_back, CounterRng& rng) {
  CadlagPath fwd = simulate(p, rng.uniform(), T_back, rng);
  PastPath past;
  past.initial = fwd.x0;
  for (std::size_t k = 0; k < fwd.jump_times.size(); ++k) {
    past.jump_times.push_back(fwd.jump_times[k] - T_back);
    past.states.push_back(fwd.states[k]);
  }
  return past;
}

// Draws from a grid density treated as piecewise constant on the cells.
inline double sample_density(const Grid& g, const GridFunction& density, CounterRng& rng) {
  double target = rng.uniform() * density.sum();
  double acc = 0.0;
  int j = 0;
  for (; j < g.n - 1; ++j) {
    acc += density[j];
    if (acc >= target) break;
  }
  return (j + rng.uniform()) / g.n;
}

/*
 * log of the Radon-Nikodym derivative of the path law of `num` against
 * `den` on [0, T]: the rate-difference integral plus the sum over jumps of
 * the log rate-and-kernel ratios,
 *
 *   int_0^T (rate_den - rate_num)(w_s) ds
 *   + sum_{jumps} log( rate_num(w_-) q_num(w_-, w) / (rate_den(w_-) q_den(w_-, w)) ).
 */
inline double path_log_rn(const CadlagPath& path, const JumpProcess& num,
                          const JumpProcess& den) {
  double acc = 0.0;
  double prev_t = 0.0;
  double state = path.x0;
  for (std::size_t k = 0; k <= path.jump_times.size(); ++k) {
    double t_next = (k < path.jump_times.size()) ? path.jump_times[k] : path.horizon;
    acc += (den.rate(state) - num.rate(state)) * (t_next - prev_t);
    if (k < path.jump_times.size()) {
      double to = path.states[k];
      double top = num.rate(state) * num.density(state, to);
      double bot = den.rate(state) * den.density(state, to);
      if (!(top > 0.0) || !(bot > 0.0)) {
        throw std::domain_error("path_log_rn: zero kernel or rate along the path");
      }
      acc += std::log(top / bot);
      state = to;
    }
    prev_t = t_next;
  }
  return acc;
}

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
};

namespace detail {

template <typename Fn>
inline std::vector<double> per_path_values(long n_paths, Fn&& fn) {
  std::vector<double> vals(static_cast<std::size_t>(n_paths));
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  long chunk = (n_paths + workers - 1) / workers;
  std::vector<std::future<void>> futs;
  for (unsigned w = 0; w < workers; ++w) {
    long lo = w * chunk;
    long hi = std::min(n_paths, lo + chunk);
    if (lo >= hi) break;
    futs.push_back(std::async(std::launch::async, [lo, hi, &vals, &fn] {
      for (long i = lo; i < hi; ++i) vals[std::size_t(i)] = fn(i);
    }));
  }
  for (auto& f : futs) f.get();
  return vals;
}

inline McResult summarize(const std::vector<double>& vals) {
  McResult r;
  r.n_paths = long(vals.size());
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= double(vals.size());
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var = vals.size() > 1 ? var / double(vals.size() - 1) : 0.0;
  r.estimate = mean;
  r.std_error = std::sqrt(var / double(vals.size()));
  return r;
}

}  // namespace detail

// Monte Carlo Feynman-Kac functional E_x[ e^{int_0^t V(X_s) ds} f(X_t) ]
// under the a-priori process. The potential integral along a piecewise
// constant path is an exact finite sum.
inline McResult mc_feynman_kac(const JumpProcess& proc, const std::function<double(double)>& V,
                               const std::function<double(double)>& f, double x0, double t,
                               long n_paths, std::uint64_t seed) {
  if (n_paths < 100) throw std::invalid_argument("mc_feynman_kac: need at least 100 paths");
  auto vals = detail::per_path_values(n_paths, [&](long idx) {
    CounterRng rng = CounterRng::for_path(seed, std::uint64_t(idx));
    CadlagPath path = simulate(proc, x0, t, rng);
    double acc = 0.0;
    double prev = 0.0;
    double state = path.x0;
    for (std::size_t k = 0; k <= path.jump_times.size(); ++k) {
      double t_next = (k < path.jump_times.size()) ? path.jump_times[k] : t;
      acc += V(state) * (t_next - prev);
      if (k < path.jump_times.size()) state = path.states[k];
      prev = t_next;
    }
    return std::exp(acc) * f(path(t));
  });
  return detail::summarize(vals);
}

// Pathwise entropy production estimate: paths start from the stationary
// density, each contributes (1/T) sum over jumps of log(P(a,b)/P(b,a)).
inline McResult mc_entropy_production(const KernelModel& m, const GridFunction& theta,
                                      const Grid& g, double T, long n_paths,
                                      std::uint64_t seed) {
  JumpProcess proc = apriori_process(m);
  auto vals = detail::per_path_values(n_paths, [&](long idx) {
    CounterRng rng = CounterRng::for_path(seed, std::uint64_t(idx));
    double x0 = sample_density(g, theta, rng);
    CadlagPath path = simulate(proc, x0, T, rng);
    double acc = 0.0;
    double state = path.x0;
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
      double to = path.states[k];
      double fwd = proc.density(state, to);
      double bwd = proc.density(to, state);
      if (!(fwd > 0.0) || !(bwd > 0.0)) {
        throw std::domain_error("mc_entropy_production: kernel vanishes along a jump");
      }
      acc += std::log(fwd / bwd);
      state = to;
    }
    return acc / T;
  });
  return detail::summarize(vals);
}

}  // namespace ctgibbs

#endif  // CTGIBBS_PATHS_HPP
