#pragma once

#include "detproc/kernel.hpp"
#include "detproc/rng.hpp"

namespace detproc {

/// One finite configuration over an ordered window.
struct Pattern {
  std::vector<Site> window;
  std::vector<uint8_t> bits;
};

/// Samples over a common window, one RNG stream per sample index.
struct SampleBatch {
  std::vector<Site> window;
  std::vector<std::vector<uint8_t>> patterns;
  uint64_t seed = 0;
};

namespace detail {

inline std::vector<Site> sorted_lex(std::vector<Site> window) {
  std::sort(window.begin(), window.end());
  return window;
}

/**
 * Sequential sampler for one window. Visits sites in the given order; at each
 * step draws a 1 with probability P[1 | pattern so far]. The conditional is
 * the next diagonal pivot of an unpivoted LU factorization of the
 * inclusion-exclusion matrix, grown one row/column per step; when a pivot
 * becomes too small for comfort the step falls back to full pivoted
 * determinants.
 */
class SequentialSampler {
 public:
  SequentialSampler(const CoeffTable& table, std::vector<Site> window)
      : table_(table), window_(std::move(window)), n_(window_.size()) {
    D_.resize(n_, n_);
    for (size_t i = 0; i < n_; ++i)
      for (size_t j = 0; j < n_; ++j)
        D_(long(i), long(j)) = table_.at(window_[j] - window_[i]);
  }

  std::vector<uint8_t> draw(CounterRng& rng) {
    std::vector<uint8_t> bits(n_);
    L_.setZero(n_, n_);
    U_.setZero(n_, n_);
    unstable_ = false;
    rebuild_requested_ = false;
    for (size_t t = 0; t < n_; ++t) {
      double p1 = pivot_for_bit(bits, t, 1);
      if (!(p1 >= -1e-9 && p1 <= 1 + 1e-9) || unstable_) {
        p1 = conditional_by_ratio(bits, t);
        rebuild_requested_ = true;
      }
      p1 = clamp01(p1);
      bits[t] = rng.bernoulli(p1) ? 1 : 0;
      finalize_row(bits, t);
      if (rebuild_requested_) {
        rebuild(bits, t + 1);
        rebuild_requested_ = false;
      }
    }
    return bits;
  }

  /// Reference path: conditionals from full pivoted determinants.
  std::vector<uint8_t> draw_reference(CounterRng& rng) {
    std::vector<uint8_t> bits(n_);
    for (size_t t = 0; t < n_; ++t) {
      double p1 = conditional_by_ratio(bits, t);
      bits[t] = rng.bernoulli(clamp01(p1)) ? 1 : 0;
    }
    return bits;
  }

 private:
  // Row i of the event matrix for a given assigned bit at site i:
  // ones rows carry Q, zero rows carry delta - Q.
  cplx entry(const std::vector<uint8_t>& bits, size_t i, size_t j) const {
    cplx q = D_(long(i), long(j));
    if (i < bits.size() && !bits[i]) {
      cplx v = -q;
      if (i == j) v += 1.0;
      return v;
    }
    return q;
  }

  /// Next unpivoted-LU pivot when row t is set to `bit`; equals the
  /// conditional probability of that bit given rows 0..t-1. Column t above
  /// the diagonal does not depend on bits[t]; row t and the pivot do.
  double pivot_for_bit(std::vector<uint8_t>& bits, size_t t, uint8_t bit) {
    bits[t] = bit;
    for (size_t i = 0; i < t; ++i) {
      cplx s = entry(bits, i, t);
      for (size_t k = 0; k < i; ++k) s -= L_(long(i), long(k)) * U_(long(k), long(t));
      U_(long(i), long(t)) = s;
    }
    for (size_t j = 0; j < t; ++j) {
      cplx s = entry(bits, t, j);
      for (size_t k = 0; k < j; ++k) s -= L_(long(t), long(k)) * U_(long(k), long(j));
      cplx piv = U_(long(j), long(j));
      if (std::abs(piv) < 1e-12) {
        unstable_ = true;
        return -1;
      }
      L_(long(t), long(j)) = s / piv;
    }
    cplx s = entry(bits, t, t);
    for (size_t k = 0; k < t; ++k) s -= L_(long(t), long(k)) * U_(long(k), long(t));
    U_(long(t), long(t)) = s;
    if (std::fabs(s.imag()) > 1e-8) unstable_ = true;
    // a pivot of the +1 matrix is P[bit = 1 | assigned]; for bit = 0 it is
    // the complement, so we always probe with bit = 1
    return s.real();
  }

  /// Commit row/column t for the assigned bit (recompute with actual bit).
  void finalize_row(std::vector<uint8_t>& bits, size_t t) {
    if (rebuild_requested_) return;
    double ignored = pivot_for_bit(bits, t, bits[t]);
    (void)ignored;
    L_(long(t), long(t)) = 1.0;
  }

  void rebuild(const std::vector<uint8_t>& bits, size_t upto) {
    // refactor the leading upto x upto block without pivoting; if that fails
    // (tiny pivot) keep requesting ratio fallbacks for subsequent steps
    unstable_ = false;
    std::vector<uint8_t> assigned(bits.begin(), bits.begin() + long(upto));
    assigned.resize(bits.size());
    for (size_t t = 0; t < upto; ++t) {
      double ignored = pivot_for_bit(assigned, t, bits[t]);
      (void)ignored;
      if (unstable_) return;
      L_(long(t), long(t)) = 1.0;
    }
  }

  /// Full pivoted-determinant conditional (correctness reference).
  double conditional_by_ratio(const std::vector<uint8_t>& bits, size_t t) {
    Eigen::MatrixXcd M(t, t);
    std::vector<uint8_t> cur(bits.begin(), bits.begin() + long(t));
    for (size_t i = 0; i < t; ++i)
      for (size_t j = 0; j < t; ++j) M(long(i), long(j)) = entry(cur, i, j);
    double den = t == 0 ? 1.0 : M.partialPivLu().determinant().real();
    if (den < 1e-250) throw DegenerateConditioning("sampling reached a negligible branch");
    Eigen::MatrixXcd M1(t + 1, t + 1);
    std::vector<uint8_t> with = cur;
    with.push_back(1);
    for (size_t i = 0; i <= t; ++i)
      for (size_t j = 0; j <= t; ++j) M1(long(i), long(j)) = entry(with, i, j);
    double num = M1.partialPivLu().determinant().real();
    return num / den;
  }

  const CoeffTable& table_;
  std::vector<Site> window_;
  size_t n_;
  Eigen::MatrixXcd D_, L_, U_;
  bool unstable_ = false;
  bool rebuild_requested_ = false;
};

}  // namespace detail

/**
 * Exact sample of P^f restricted to a window (<= 4096 sites), visiting sites
 * in lexicographic order and drawing each bit from its conditional given the
 * assigned prefix. Deterministic given (seed, stream).
 */
inline Pattern sample_window(const CoeffTable& table, std::vector<Site> window,
                             uint64_t seed, uint64_t stream = 0, bool reference = false) {
  if (window.size() > 4096) throw DetprocError("sample_window: window exceeds 4096 sites");
  std::vector<Site> w = detail::sorted_lex(std::move(window));
  detail::SequentialSampler s(table, w);
  CounterRng rng(seed, stream);
  Pattern out;
  out.window = w;
  out.bits = reference ? s.draw_reference(rng) : s.draw(rng);
  return out;
}

/// Batch of independent samples; sample i uses RNG stream i.
inline SampleBatch sample_batch(const CoeffTable& table, std::vector<Site> window,
                                size_t n_samples, uint64_t seed) {
  std::vector<Site> w = detail::sorted_lex(std::move(window));
  detail::SequentialSampler s(table, w);
  SampleBatch batch;
  batch.window = w;
  batch.seed = seed;
  batch.patterns.reserve(n_samples);
  for (size_t i = 0; i < n_samples; ++i) {
    CounterRng rng(seed, i);
    batch.patterns.push_back(s.draw(rng));
  }
  return batch;
}

/// Independently keep each 1 with probability p (stream offset keeps the
/// thinning draws decoupled from the sampling draws).
inline SampleBatch thin(const SampleBatch& batch, double p, uint64_t seed) {
  if (p < 0 || p > 1) throw DetprocError("thin: p must lie in [0,1]");
  SampleBatch out = batch;
  for (size_t i = 0; i < out.patterns.size(); ++i) {
    CounterRng rng(seed, (uint64_t(1) << 40) + i);
    for (uint8_t& b : out.patterns[i])
      if (b && !rng.bernoulli(p)) b = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Empirical statistics
// ---------------------------------------------------------------------------

struct LagCovariance {
  Site lag;
  double covariance = 0.0;
  double stderr_jackknife = 0.0;
};

struct EmpiricalStats {
  std::vector<double> site_frequency;      // per window position
  std::vector<LagCovariance> covariances;  // requested lags
  std::map<uint32_t, size_t> pattern_counts;
};

/// Frequencies, lagged covariances (averaged over all in-window lag pairs,
/// with delete-one-sample jackknife errors), and pattern counts.
inline EmpiricalStats empirical_stats(const SampleBatch& batch,
                                      const std::vector<Site>& lags = {}) {
  const size_t ns = batch.patterns.size();
  if (ns == 0) throw DetprocError("empirical_stats: empty batch");
  const size_t n = batch.window.size();
  EmpiricalStats st;
  st.site_frequency.assign(n, 0.0);
  for (const auto& pat : batch.patterns)
    for (size_t j = 0; j < n; ++j) st.site_frequency[j] += pat[j];
  for (double& v : st.site_frequency) v /= double(ns);

  if (n <= 24) {
    for (const auto& pat : batch.patterns) {
      uint32_t key = 0;
      for (size_t j = 0; j < n; ++j)
        if (pat[j]) key |= uint32_t(1) << j;
      ++st.pattern_counts[key];
    }
  }

  std::map<Site, std::vector<std::pair<size_t, size_t>>> lag_pairs;
  for (const Site& lag : lags) {
    auto& pairs = lag_pairs[lag];
    for (size_t a = 0; a < n; ++a)
      for (size_t b = 0; b < n; ++b)
        if (batch.window[b] - batch.window[a] == lag) pairs.emplace_back(a, b);
  }

  for (const Site& lag : lags) {
    const auto& pairs = lag_pairs[lag];
    if (pairs.empty()) continue;
    // per-sample averages of x_a x_b, x_a, x_b over the available pairs
    std::vector<double> xy(ns), xa(ns), xb(ns);
    for (size_t i = 0; i < ns; ++i) {
      double sxy = 0, sa = 0, sb = 0;
      for (auto [a, b] : pairs) {
        sxy += double(batch.patterns[i][a]) * double(batch.patterns[i][b]);
        sa += batch.patterns[i][a];
        sb += batch.patterns[i][b];
      }
      xy[i] = sxy / double(pairs.size());
      xa[i] = sa / double(pairs.size());
      xb[i] = sb / double(pairs.size());
    }
    double Sxy = pairwise_sum(xy), Sa = pairwise_sum(xa), Sb = pairwise_sum(xb);
    double cov = Sxy / double(ns) - (Sa / double(ns)) * (Sb / double(ns));
    // delete-one jackknife
    std::vector<double> theta(ns);
    for (size_t i = 0; i < ns; ++i) {
      double m = double(ns - 1);
      theta[i] = (Sxy - xy[i]) / m - ((Sa - xa[i]) / m) * ((Sb - xb[i]) / m);
    }
    double tbar = pairwise_sum(theta) / double(ns);
    double ss = 0;
    for (double t : theta) ss += (t - tbar) * (t - tbar);
    double se = std::sqrt(double(ns - 1) / double(ns) * ss);
    st.covariances.push_back({lag, cov, se});
  }
  return st;
}

/// Total-variation distance between the batch's empirical pattern pmf and an
/// exact pmf over the same window.
inline double empirical_tv(const SampleBatch& batch, const Pmf& exact) {
  if (batch.window != exact.window) throw DetprocError("empirical_tv: window mismatch");
  std::vector<double> emp(exact.p.size(), 0.0);
  for (const auto& pat : batch.patterns) {
    uint32_t key = 0;
    for (size_t j = 0; j < pat.size(); ++j)
      if (pat[j]) key |= uint32_t(1) << j;
    emp[key] += 1.0;
  }
  double tv = 0;
  for (size_t i = 0; i < emp.size(); ++i)
    tv += std::fabs(emp[i] / double(batch.patterns.size()) - exact.p[i]);
  return tv / 2;
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

inline void write_batch_csv(const SampleBatch& batch, std::ostream& out) {
  for (size_t j = 0; j < batch.window.size(); ++j) {
    if (j) out << ',';
    out << 's';
    for (size_t c = 0; c < batch.window[j].size(); ++c)
      out << (c ? "_" : "") << batch.window[j][c];
  }
  out << "\n";
  for (const auto& pat : batch.patterns) {
    for (size_t j = 0; j < pat.size(); ++j) {
      if (j) out << ',';
      out << int(pat[j]);
    }
    out << "\n";
  }
}

}  // namespace detproc
