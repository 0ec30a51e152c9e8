#pragma once

#include "detproc/kernel.hpp"

namespace detproc {

/// H[p] = -p log p - (1-p) log(1-p) in nats; H[0] = H[1] = 0.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1 - p) * std::log(1 - p);
}

/// Certified entropy bounds [lo, hi] in nats with the method that made them.
struct EntropyInterval {
  double lo = 0.0;
  double hi = kLog2;
  std::string method;
  int depth = 0;
  double pruned_mass = 0.0;
  bool uninformative = false;  // refined method with GM(f) = GM(1-f) = 0
};

// ---------------------------------------------------------------------------
// Simple bounds
// ---------------------------------------------------------------------------

/// min{ H[GM(f)], H[GM(1-f)] }; a valid lower bound on H(P^f).
inline double gm_lower_bound(const MeansReport& m) {
  double a = m.gm.divergent ? 0.0 : m.gm.value;
  double b = m.gm_complement.divergent ? 0.0 : m.gm_complement.value;
  return std::min(binary_entropy(a), binary_entropy(b));
}

/**
 * Conditional block entropy upper bound. For d = 1 this is
 * H(window m) - H(window m-1) over consecutive sites; for d = 2 over an
 * m1 x m2 box it is (H(box) - H(box minus last row)) / m1. Both are
 * nonincreasing in the block size and never below the entropy.
 */
inline double block_upper_bound(const CoeffTable& table, const std::vector<int>& box) {
  if (table.dim == 1) {
    int m = box.at(0);
    if (m < 1) throw DetprocError("block_upper_bound: m must be >= 1");
    std::vector<Site> window;
    for (int i = 0; i < m; ++i) window.push_back(Site{i});
    Pmf pm = joint_pmf(table, window);
    if (m == 1) return pmf_entropy(pm);
    std::vector<int> keep(size_t(m - 1));
    std::iota(keep.begin(), keep.end(), 0);
    return pmf_entropy(pm) - pmf_entropy(pmf_marginal(pm, keep));
  }
  if (table.dim == 2) {
    int m1 = box.at(0), m2 = box.at(1);
    if (m1 < 1 || m2 < 1) throw DetprocError("block_upper_bound: box sides must be >= 1");
    if (m1 * m2 > 16) throw DetprocError("block_upper_bound: 2-d box capped at 16 sites");
    std::vector<Site> window;
    for (int j = 0; j < m2; ++j)
      for (int i = 0; i < m1; ++i) window.push_back(Site{i, j});
    Pmf pm = joint_pmf(table, window);
    double H = pmf_entropy(pm);
    if (m2 == 1) return H / m1;
    std::vector<int> keep(size_t(m1 * (m2 - 1)));
    std::iota(keep.begin(), keep.end(), 0);
    double Hprev = pmf_entropy(pmf_marginal(pm, keep));
    return (H - Hprev) / m1;
  }
  throw DetprocError("block_upper_bound supports d <= 2");
}

// ---------------------------------------------------------------------------
// Refined bounds through the nu kernels
// ---------------------------------------------------------------------------

/**
 * Refined certified interval for H(P^f), d = 1.
 *
 * For each word w on positions -m..-1 the conditional probability of a 1 at 0
 * given w and the remote past lies between
 *   L(w): remote past all 1s  -> nu_f ratio, and
 *   U(w): remote past all 0s  -> 1 - nu_{1-f} ratio on the complemented word
 * (conditioning on more 1s can only lower the conditional). Integrating the
 * extremes of H over [L(w), U(w)] against the word weights gives [lo, hi].
 * Words whose nu denominators degenerate are pruned; their mass enters hi at
 * log 2 and lo at 0 and is reported.
 */
inline EntropyInterval refined_bounds(const SymbolSpec& spec, int m, const QuadParams& quad) {
  if (spec.dim != 1) throw DetprocError("refined_bounds requires d = 1");
  if (m < 1 || m > 20) throw DetprocError("refined_bounds: m must lie in 1..20");

  EntropyInterval out;
  out.method = "refined";
  out.depth = m;

  OuterSeries phi_f = outer_coeffs(spec, m + 1, quad);
  OuterSeries phi_c = outer_coeffs(complement(spec), m + 1, quad);
  if (phi_f.gm_source == 0.0 && phi_c.gm_source == 0.0) {
    out.lo = 0.0;
    out.hi = kLog2;
    out.uninformative = true;
    return out;
  }

  CoeffTable table = fourier_coeffs(spec, m + 1, quad);
  std::vector<Site> window;
  for (int i = 0; i < m; ++i) window.push_back(Site{i});
  Pmf weights = joint_pmf(table, window);

  NuKernel Kf = nu_kernel(phi_f, m);
  NuKernel Kc = nu_kernel(phi_c, m);

  const uint32_t n_words = uint32_t(1) << m;
  std::vector<double> lo_terms(n_words, 0.0), hi_terms(n_words, 0.0);
  double pruned = 0.0;

  std::vector<int> ones, zeros;
  for (uint32_t w = 0; w < n_words; ++w) {
    const double P = weights.p[w];
    if (P <= 0.0) continue;

    // word position -m+i maps to nu index i; the target site 0 to index m
    ones.clear();
    zeros.clear();
    for (int i = 0; i < m; ++i)
      (w >> i & 1 ? ones : zeros).push_back(i);

    double den_f = nu_cylinder(Kf, ones, zeros);
    ones.push_back(m);
    double num_f = nu_cylinder(Kf, ones, zeros);
    ones.pop_back();

    // complement kernel: complemented word, target 1 at index m
    double den_c = nu_cylinder(Kc, zeros, ones);
    std::vector<int> czones = zeros;
    czones.push_back(m);
    double num_c = nu_cylinder(Kc, czones, ones);

    const double floor_f = 1e-13, floor_c = 1e-13;
    bool f_ok = den_f > floor_f, c_ok = den_c > floor_c;
    if (!f_ok && phi_f.gm_source > 0.0 && !c_ok && phi_c.gm_source > 0.0) {
      pruned += P;
      continue;
    }
    double L = (phi_f.gm_source == 0.0) ? 0.0
               : (f_ok ? clamp01(num_f / den_f) : -1.0);
    double U = (phi_c.gm_source == 0.0) ? 1.0
               : (c_ok ? 1.0 - clamp01(num_c / den_c) : -1.0);
    if (L < 0 || U < 0) {
      pruned += P;
      continue;
    }
    if (U < L - 1e-9)
      throw DetprocError("refined_bounds: interval inverted (U < L) for a word");
    if (U < L) U = L;

    double hL = binary_entropy(L), hU = binary_entropy(U);
    lo_terms[w] = P * std::min(hL, hU);
    hi_terms[w] = P * ((L <= 0.5 && 0.5 <= U) ? kLog2 : std::max(hL, hU));
  }

  out.lo = pairwise_sum(lo_terms);
  out.hi = pairwise_sum(hi_terms) + pruned * kLog2;
  out.pruned_mass = pruned;
  out.lo = std::max(0.0, out.lo);
  out.hi = std::min(kLog2, out.hi);
  return out;
}

// ---------------------------------------------------------------------------
// Exact renewal entropy
// ---------------------------------------------------------------------------

/**
 * Exact entropy of the renewal process with parameter a, by the series over
 * the time N since the last 1: P[N = n] = (1-a)(n - (n-1)a) a^{n-1} / (1+a)
 * and P[1 | N = n] = (1-a)^2 n / (n - (n-1)a); the sum telescopes into
 * three x log x terms per n. Summed until the geometric tail is below tol.
 */
inline double renewal_entropy(double a, double tol = 1e-14) {
  if (!(a > 0 && a < 1)) throw DetprocError("renewal_entropy: a must lie in (0,1)");
  auto xlogx = [](double t) { return t <= 0 ? 0.0 : t * std::log(t); };
  const double c = (1 - a) / (1 + a);
  double sum = 0.0;
  double apow = 1.0;  // a^{n-1}
  for (int n = 1;; ++n) {
    double term = -xlogx((1 - a) * (1 - a) * n) - xlogx(a * (1 - a) * n + a) +
                  xlogx((1 - a) * n + a);
    sum += apow * term;
    apow *= a;
    // |term| grows like log n; geometric tail bound
    double tail = apow / (1 - a) * (std::fabs(term) + std::log(double(n) + 2) + 2);
    if (n > 16 && tail < tol) break;
    if (n > 100000) break;
  }
  return c * sum;
}

// ---------------------------------------------------------------------------
// Perturbation transfer
// ---------------------------------------------------------------------------

/**
 * Transfer an interval for H(P^g) to H(P^f): the entropies differ by at most
 * H[dbar] and dbar <= int |f - g|. Requires int |f - g| < 1/2.
 */
inline EntropyInterval perturbation_transfer(const EntropyInterval& for_g,
                                             const SymbolSpec& f, const SymbolSpec& g,
                                             const QuadParams& quad) {
  if (f.dim != g.dim) throw DetprocError("perturbation_transfer: dimension mismatch");
  SymbolEvaluator ef(f), eg(g);
  QuadResult l1;
  if (f.dim == 1)
    l1 = integrate_periodic_1d([&](double x) { return std::fabs(ef(x) - eg(x)); }, quad);
  else if (f.dim == 2)
    l1 = integrate_periodic_2d([&](double x, double y) { return std::fabs(ef(x, y) - eg(x, y)); }, quad);
  else
    l1 = integrate_mc([&](const double* x) { return std::fabs(ef.at(x) - eg.at(x)); }, f.dim, quad);
  double delta = std::max(0.0, l1.value);
  if (delta >= 0.5)
    throw DetprocError("perturbation_transfer: L1 distance " + std::to_string(delta) + " >= 1/2");
  double widen = binary_entropy(delta);
  EntropyInterval out;
  out.method = "perturbation";
  out.depth = for_g.depth;
  out.pruned_mass = for_g.pruned_mass;
  out.lo = std::max(0.0, for_g.lo - widen);
  out.hi = std::min(kLog2, for_g.hi + widen);
  return out;
}

// ---------------------------------------------------------------------------
// Sandwich bounds for processes trapped between product measures
// ---------------------------------------------------------------------------

/// The two explicit entropy lower bounds for a stationary process with
/// mu_p <= mu <= mu_{1-p}; max{a_p, b_p} > 0 for p in (0, 1/2].
inline std::pair<double, double> hoffman_bounds(double p) {
  if (!(p > 0 && p <= 0.5)) throw DetprocError("hoffman_bounds: p must lie in (0, 1/2]");
  auto xlog1over = [](double t) { return t <= 0 ? 0.0 : t * std::log(1.0 / t); };
  double ap = xlog1over(1 - p) - xlog1over(1 - 2 * p) / 2;
  double bp = 2 * xlog1over(1 - p) - xlog1over(1 - 2 * p) - (1 - 2 * p) * kLog2;
  return {ap, bp};
}

}  // namespace detproc
