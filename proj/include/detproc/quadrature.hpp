#pragma once

#include <functional>

#include "detproc/rng.hpp"
#include "detproc/symbol.hpp"

namespace detproc {

struct QuadParams {
  double tol = 1e-10;     // per-quantity refinement target (1e-8 default for d=2)
  int min_level = 6;      // first grid is 2^min_level points per axis
  int max_level_1d = 21;
  int max_level_2d = 12;
  long long mc_points = 10'000'000;  // d >= 3
  uint64_t mc_seed = 0x5eed;

  static QuadParams for_dim(int d) {
    QuadParams q;
    if (d >= 2) q.tol = 1e-8;
    return q;
  }
};

struct QuadResult {
  double value = 0.0;
  double err = 0.0;   // estimated absolute error (last extrapolation delta / MC se)
  bool converged = false;
  int level = 0;      // last grid level used (or 0 for MC)
};

namespace detail {

/**
 * Richardson tableau over grid doublings, eliminating error terms
 * N^-1, N^-2, ... in order. Midpoint sums of periodic integrands whose
 * singularities sit at grid-symmetric points have expansions of this form;
 * smooth periodic integrands converge faster than any power and pass
 * through unchanged.
 */
class RichardsonTable {
 public:
  void push(double v) {
    raw_.push_back(v);
    rebuild();
  }

  /// Best extrapolated value: the deepest diagonal entry.
  double best() const { return diag_.empty() ? 0.0 : diag_.back(); }

  /// Distance between the last two diagonal entries (NaN with < 2 rows).
  double delta() const {
    if (diag_.size() < 2) return std::nan("");
    return std::fabs(diag_[diag_.size() - 1] - diag_[diag_.size() - 2]);
  }

  /**
   * Value with a guarded error estimate. A clean power-law error leaves the
   * extrapolated value within about twice the last raw refinement step;
   * oscillating error coefficients (non-dyadic jump locations) make the deep
   * columns agree spuriously while drifting away from the data, in which case
   * the raw sum is the better estimate and the raw step the honest error.
   */
  std::pair<double, double> estimate() const {
    double b = best();
    if (raw_.size() >= 2) {
      double step = std::fabs(raw_.back() - raw_[raw_.size() - 2]);
      if (std::fabs(b - raw_.back()) > 4 * step)
        return {raw_.back(), std::max(step, delta())};
    }
    return {b, delta()};
  }

  size_t depth() const { return raw_.size(); }
  double raw_back() const { return raw_.back(); }
  double raw_prev() const { return raw_[raw_.size() - 2]; }

  /**
   * Logarithmically divergent integrands produce raw midpoint sums that keep
   * moving by a near-constant step per refinement (the singular mass between
   * grid scales is scale-invariant). True when the last `span` raw steps all
   * have the given sign and barely decay: integrable power singularities decay
   * by 2^(alpha-1) per level, so a ratio floor of 0.95 separates them.
   */
  bool log_divergence(int sign, size_t span = 4) const {
    if (raw_.size() < span + 1) return false;
    double prev_step = 0;
    for (size_t i = raw_.size() - span; i < raw_.size(); ++i) {
      double step = (raw_[i] - raw_[i - 1]) * sign;
      if (step <= 0) return false;
      if (prev_step > 0 && step < 0.95 * prev_step) return false;
      prev_step = step;
    }
    return std::fabs(raw_.back()) > 1.0;
  }

 private:
  void rebuild() {
    // T[0] = raw; T[j][i] = (2^j T[j-1][i+1] - T[j-1][i]) / (2^j - 1).
    // diag_[i] = T[i].back() for the tableau built from raw_[0..i].
    std::vector<double> row = raw_;
    diag_.assign(1, row[0]);
    std::vector<double> prev = row;
    for (size_t j = 1; j < raw_.size(); ++j) {
      double fac = std::pow(2.0, double(j));
      std::vector<double> next(prev.size() - 1);
      for (size_t i = 0; i + 1 < prev.size(); ++i)
        next[i] = (fac * prev[i + 1] - prev[i]) / (fac - 1);
      diag_.push_back(next.back());
      prev = std::move(next);
    }
  }

  std::vector<double> raw_;
  std::vector<double> diag_;
};

}  // namespace detail

/// Midpoint sum of g over the level-m dyadic grid of T^1.
inline double midpoint_sum_1d(const std::function<double(double)>& g, int level) {
  const size_t n = size_t(1) << level;
  std::vector<double> vals(n);
  const double h = 1.0 / double(n);
  for (size_t j = 0; j < n; ++j) vals[j] = g((double(j) + 0.5) * h);
  return pairwise_sum(vals) * h;
}

inline double midpoint_sum_2d(const std::function<double(double, double)>& g, int level) {
  const size_t n = size_t(1) << level;
  const double h = 1.0 / double(n);
  std::vector<double> rows(n);
  std::vector<double> vals(n);
  for (size_t i = 0; i < n; ++i) {
    double x = (double(i) + 0.5) * h;
    for (size_t j = 0; j < n; ++j) vals[j] = g(x, (double(j) + 0.5) * h);
    rows[i] = pairwise_sum(vals) * h;
  }
  return pairwise_sum(rows) * h;
}

/**
 * Refine midpoint grids until the Richardson diagonal moves by less than tol.
 * Non-convergent refinements report the last delta with converged = false.
 */
inline QuadResult integrate_periodic_1d(const std::function<double(double)>& g,
                                        const QuadParams& q) {
  detail::RichardsonTable table;
  QuadResult r;
  int settled = 0;
  for (int m = q.min_level; m <= q.max_level_1d; ++m) {
    table.push(midpoint_sum_1d(g, m));
    r.level = m;
    double d = table.delta();
    if (!std::isnan(d)) {
      r.err = d;
      // two consecutive small steps: a single one can be an accident of
      // oscillating error coefficients (non-dyadic jump locations)
      settled = d < q.tol ? settled + 1 : 0;
      if (settled >= 2 && table.depth() >= 4) {
        r.converged = true;
        break;
      }
    }
  }
  std::tie(r.value, r.err) = table.estimate();
  return r;
}

inline QuadResult integrate_periodic_2d(const std::function<double(double, double)>& g,
                                        const QuadParams& q) {
  detail::RichardsonTable table;
  QuadResult r;
  int settled = 0;
  for (int m = std::min(q.min_level, q.max_level_2d); m <= q.max_level_2d; ++m) {
    table.push(midpoint_sum_2d(g, m));
    r.level = m;
    double d = table.delta();
    if (!std::isnan(d)) {
      r.err = d;
      settled = d < q.tol ? settled + 1 : 0;
      if (settled >= 2 && table.depth() >= 4) {
        r.converged = true;
        break;
      }
    }
  }
  std::tie(r.value, r.err) = table.estimate();
  return r;
}

/// Plain Monte Carlo on T^d with the counter generator; returns mean and
/// standard error of the mean.
inline QuadResult integrate_mc(const std::function<double(const double*)>& g, int d,
                               const QuadParams& q) {
  CounterRng rng(q.mc_seed, 7771);
  double x[8];
  double sum = 0, sumsq = 0;
  const long long n = q.mc_points;
  for (long long i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x[j] = rng.next_double();
    double v = g(x);
    sum += v;
    sumsq += v * v;
  }
  QuadResult r;
  r.value = sum / double(n);
  double var = std::max(0.0, sumsq / double(n) - r.value * r.value);
  r.err = std::sqrt(var / double(n));
  r.converged = true;
  return r;
}

/// Point-evaluation adapter reusing one coordinate buffer.
class SymbolEvaluator {
 public:
  explicit SymbolEvaluator(const SymbolSpec& spec) : spec_(spec), pt_{std::vector<double>(spec.dim, 0.0)} {}

  double operator()(double x) {
    pt_.x[0] = x;
    return eval_symbol(spec_, pt_);
  }
  double operator()(double x, double y) {
    pt_.x[0] = x;
    pt_.x[1] = y;
    return eval_symbol(spec_, pt_);
  }
  double at(const double* x) {
    std::copy(x, x + spec_.dim, pt_.x.begin());
    return eval_symbol(spec_, pt_);
  }

 private:
  SymbolSpec spec_;
  Point pt_;
};

// ---------------------------------------------------------------------------
// FFT (radix-2, in place) for coefficient tables
// ---------------------------------------------------------------------------

/// In-place decimation-in-time radix-2 FFT computing X[k] = sum_j x[j] w^{jk}
/// with w = e^{-2 pi i / n}; n must be a power of two.
inline void fft_pow2(std::vector<cplx>& a) {
  const size_t n = a.size();
  if (n < 2) return;
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2 * kPi / double(len);
    cplx wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        cplx u = a[i + j];
        cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

/**
 * Fourier coefficients c_k = (1/n) sum_j v_j e^{-2 pi i k (j+1/2)/n} of
 * midpoint samples v_j = f((j+1/2)/n), for k = -kmax..kmax. This is the
 * midpoint quadrature of f-hat(k) on the level grid.
 */
inline std::vector<cplx> midpoint_coeffs_1d(std::vector<cplx> samples, int kmax) {
  const size_t n = samples.size();
  fft_pow2(samples);
  std::vector<cplx> out(2 * kmax + 1);
  for (int k = -kmax; k <= kmax; ++k) {
    size_t idx = size_t((k % long(n) + long(n)) % long(n));
    double ang = -kPi * double(k) / double(n);  // midpoint phase e^{-i pi k / n}
    out[size_t(k + kmax)] = samples[idx] * cplx(std::cos(ang), std::sin(ang)) / double(n);
  }
  return out;
}

}  // namespace detproc
