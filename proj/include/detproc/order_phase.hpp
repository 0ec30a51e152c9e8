#pragma once

#include "detproc/entropy.hpp"
#include "detproc/sampling.hpp"

namespace detproc {

// ---------------------------------------------------------------------------
// Domination constants
// ---------------------------------------------------------------------------

/**
 * Optimal product-measure sandwich constants:
 * mu_p <= P^f iff p <= GM(f) (strong domination likewise), P^f <= mu_q iff
 * q >= 1 - GM(1-f); the full (insertion/deletion) versions replace GM by HM.
 */
struct DominationReport {
  double p_strong = 0, q_strong = 1;  // GM(f), 1 - GM(1-f)
  double p_full = 0, q_full = 1;      // HM(f), 1 - HM(1-f)
  bool gm_divergent = false, gm_complement_divergent = false;
  bool hm_divergent = false, hm_complement_divergent = false;
  double err = 0;
};

inline DominationReport domination_report(const MeansReport& m) {
  DominationReport r;
  r.p_strong = m.gm.divergent ? 0.0 : m.gm.value;
  r.q_strong = 1 - (m.gm_complement.divergent ? 0.0 : m.gm_complement.value);
  r.p_full = m.hm.divergent ? 0.0 : m.hm.value;
  r.q_full = 1 - (m.hm_complement.divergent ? 0.0 : m.hm_complement.value);
  r.gm_divergent = m.gm.divergent;
  r.gm_complement_divergent = m.gm_complement.divergent;
  r.hm_divergent = m.hm.divergent;
  r.hm_complement_divergent = m.hm_complement.divergent;
  r.err = std::max({m.gm.err, m.hm.err, m.gm_complement.err, m.hm_complement.err});
  return r;
}

// ---------------------------------------------------------------------------
// Phase classification
// ---------------------------------------------------------------------------

enum class Verdict { Yes, No, Unknown };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    default: return "unknown";
  }
}

struct StrongKVerdict {
  Verdict verdict = Verdict::Unknown;
  double gm = 0, gm_complement = 0;
  bool provable = false;  // divergence flags are closed-form, not numeric
};

/// One-sided phase uniqueness (d=1): holds iff GM(f) GM(1-f) > 0.
inline StrongKVerdict strong_k(const MeansReport& m) {
  StrongKVerdict v;
  v.gm = m.gm.divergent ? 0.0 : m.gm.value;
  v.gm_complement = m.gm_complement.divergent ? 0.0 : m.gm_complement.value;
  v.verdict = (v.gm > 0 && v.gm_complement > 0) ? Verdict::Yes : Verdict::No;
  v.provable = m.gm.provable && m.gm_complement.provable;
  return v;
}

enum class SfkJustification {
  FiniteOrderZerosD1,
  PositiveMeasureZeroSet,
  FlatZero,
  AlgebraicVarietyD2,
  NonAlgebraicCurveD2,
  NoProfile
};

inline const char* justification_name(SfkJustification j) {
  switch (j) {
    case SfkJustification::FiniteOrderZerosD1: return "finite-order-zeros-d1";
    case SfkJustification::PositiveMeasureZeroSet: return "positive-measure-zero-set";
    case SfkJustification::FlatZero: return "flat-zero";
    case SfkJustification::AlgebraicVarietyD2: return "algebraic-variety-d2";
    case SfkJustification::NonAlgebraicCurveD2: return "non-algebraic-curve-d2";
    case SfkJustification::NoProfile: return "no-profile";
  }
  return "?";
}

struct StrongFullKVerdict {
  Verdict verdict = Verdict::Unknown;
  SfkJustification justification = SfkJustification::NoProfile;
};

/**
 * Two-sided phase uniqueness, decided from the declared zero structure:
 * some nonzero trigonometric polynomial T must have |T|^2 / (f(1-f))
 * integrable. Positive-measure zero sets and flat zeros rule it out in any
 * dimension; isolated finite-order zeros suffice for d = 1; for d = 2 the
 * zero sets must lie in algebraic varieties. Everything else is Unknown.
 */
inline StrongFullKVerdict strong_full_k(const SymbolSpec& spec) {
  StrongFullKVerdict v;
  if (!spec.zero_profile) return v;

  for (const ZeroEntry& z : *spec.zero_profile) {
    if (z.kind == ZeroKind::PositiveMeasure) {
      v.verdict = Verdict::No;
      v.justification = SfkJustification::PositiveMeasureZeroSet;
      return v;
    }
    if (z.flat) {
      v.verdict = Verdict::No;
      v.justification = SfkJustification::FlatZero;
      return v;
    }
  }
  if (spec.dim == 2) {
    for (const ZeroEntry& z : *spec.zero_profile)
      if (z.kind == ZeroKind::NonAlgebraicCurve) {
        v.verdict = Verdict::No;
        v.justification = SfkJustification::NonAlgebraicCurveD2;
        return v;
      }
  }
  if (spec.dim == 1) {
    for (const ZeroEntry& z : *spec.zero_profile)
      if (z.kind != ZeroKind::IsolatedPoint) return v;  // curves cannot occur in T^1
    v.verdict = Verdict::Yes;
    v.justification = SfkJustification::FiniteOrderZerosD1;
    return v;
  }
  if (spec.dim == 2) {
    for (const ZeroEntry& z : *spec.zero_profile)
      if (!(z.kind == ZeroKind::IsolatedPoint || z.kind == ZeroKind::AlgebraicCurve))
        return v;
    v.verdict = Verdict::Yes;
    v.justification = SfkJustification::AlgebraicVarietyD2;
    return v;
  }
  return v;  // d >= 3: no decision table
}

struct PhaseVerdict {
  StrongKVerdict strong;
  StrongFullKVerdict strong_full;
  double one_sided_plus_mass = 0;   // sum |phi_f|^2 over 0..N
  double one_sided_minus_mass = 0;  // same for 1-f
  int mass_terms = 0;
};

/// Partial one-sided mass sum_{l<=N} |phi-hat(l)|^2; tends to f-hat(0) when
/// GM(f) > 0 and stays 0 when the one-sided limit collapses to delta_0.
inline double one_sided_mass(const OuterSeries& outer, int N) {
  if (N >= outer.n_terms) throw DetprocError("one_sided_mass: N beyond series length");
  std::vector<double> terms(size_t(N) + 1);
  for (int l = 0; l <= N; ++l) terms[size_t(l)] = std::norm(outer.at(l));
  return pairwise_sum(terms);
}

inline PhaseVerdict phase_verdict(const SymbolSpec& spec, int N, const QuadParams& quad) {
  PhaseVerdict v;
  MeansReport m = means(spec, quad);
  v.strong = strong_k(m);
  v.strong_full = strong_full_k(spec);
  if (spec.dim == 1) {
    OuterSeries of = outer_coeffs(spec, N, quad);
    OuterSeries oc = outer_coeffs(complement(spec), N, quad);
    v.one_sided_plus_mass = one_sided_mass(of, N);
    v.one_sided_minus_mass = one_sided_mass(oc, N);
    v.mass_terms = N;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Annulus probe
// ---------------------------------------------------------------------------

/**
 * P[eta(0) = 1 | eta = 1 on the annulus n <= |k| <= N] as a Szego infimum;
 * the small-n large-N trend probes the all-ones boundary-condition limit.
 */
inline double annulus_probe(const CoeffTable& table, int n, int N) {
  if (n < 1 || n > N) throw DetprocError("annulus_probe: need 1 <= n <= N");
  std::vector<Site> B;
  if (table.dim == 1) {
    // Gram entries span differences up to 2N
    if (2 * N > table.kmax[0]) throw DetprocError("annulus_probe: table radius must be >= 2N");
    for (int k = n; k <= N; ++k) {
      B.push_back(Site{k});
      B.push_back(Site{-k});
    }
  } else if (table.dim == 2) {
    if (2 * N > std::min(table.kmax[0], table.kmax[1]))
      throw DetprocError("annulus_probe: table radius must be >= 2N");
    for (int a = -N; a <= N; ++a)
      for (int b = -N; b <= N; ++b) {
        int r = std::max(std::abs(a), std::abs(b));
        if (r >= n && r <= N) B.push_back(Site{a, b});
      }
  } else {
    throw DetprocError("annulus_probe supports d <= 2");
  }
  return szego_inf(table, B);
}

// ---------------------------------------------------------------------------
// Regeneration
// ---------------------------------------------------------------------------

struct RegenerationReport {
  double max_residual = 0;
  size_t pruned_words = 0;
  int run_length = 0;
  int halo = 0;
};

/**
 * Tests conditional independence of past and future given a run of `n` ones:
 * over all past patterns a on {-h..-1} and future patterns b on {n..n+h-1},
 * residual = max |P[b | run, a] - P[b | run]|. Reciprocals of trigonometric
 * polynomials of degree n give residuals at rounding level.
 */
inline RegenerationReport regeneration_test(const CoeffTable& table, int n, int h) {
  if (table.dim != 1) throw DetprocError("regeneration_test requires d = 1");
  if (h < 1 || h > 6) throw DetprocError("regeneration_test: halo must lie in 1..6");
  std::vector<Site> window;
  for (int i = -h; i < n + h; ++i) window.push_back(Site{i});
  Pmf pm = joint_pmf(table, window);
  const size_t nb = window.size();

  // indices in the window
  auto bit = [&](int pos) {
    return uint32_t(pos + h);
  };
  uint32_t run_mask = 0;
  for (int i = 0; i < n; ++i) run_mask |= uint32_t(1) << bit(i);

  RegenerationReport rep;
  rep.run_length = n;
  rep.halo = h;

  const uint32_t n_past = uint32_t(1) << h, n_future = uint32_t(1) << h;
  // P[run, a] and P[run, a, b] from the joint pmf by summation
  std::vector<double> p_run_a(n_past, 0.0);
  std::vector<double> p_run_ab(size_t(n_past) * n_future, 0.0);
  double p_run = 0;
  for (uint32_t pat = 0; pat < (uint32_t(1) << nb); ++pat) {
    if ((pat & run_mask) != run_mask) continue;
    double P = pm.p[pat];
    uint32_t a = pat & (n_past - 1);  // low h bits are positions -h..-1
    uint32_t b = (pat >> (h + n)) & (n_future - 1);
    p_run += P;
    p_run_a[a] += P;
    p_run_ab[size_t(a) * n_future + b] += P;
  }
  if (p_run <= 0) throw DegenerateConditioning("regeneration_test: run has zero probability");

  // P[b | run]
  std::vector<double> p_b_run(n_future, 0.0);
  for (uint32_t a = 0; a < n_past; ++a)
    for (uint32_t b = 0; b < n_future; ++b) p_b_run[b] += p_run_ab[size_t(a) * n_future + b];
  for (double& v : p_b_run) v /= p_run;

  for (uint32_t a = 0; a < n_past; ++a) {
    if (p_run_a[a] < 1e-13 * p_run) {
      ++rep.pruned_words;
      continue;
    }
    for (uint32_t b = 0; b < n_future; ++b) {
      double cond = p_run_ab[size_t(a) * n_future + b] / p_run_a[a];
      rep.max_residual = std::max(rep.max_residual, std::fabs(cond - p_b_run[b]));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Renewal verification
// ---------------------------------------------------------------------------

struct RenewalChecks {
  double coeff_residual = 0;        // quadrature table vs closed form
  double interrenewal_residual = 0; // P[0^{n-1} 1 | 1 at 0] vs n (1-a)^2 a^{n-1}
  double conditional_residual = 0;  // P[eta_j = 1 | eta_{-1} = 1] vs closed form
  double convolution_residual = 0;  // the renewal convolution identity
  bool pass(double tol = 1e-9) const {
    return coeff_residual < tol && interrenewal_residual < tol &&
           conditional_residual < tol && convolution_residual < tol;
  }
};

inline RenewalChecks renewal_checks(double a, const QuadParams& quad) {
  if (!(a > 0 && a < 1)) throw DetprocError("renewal_checks: a must lie in (0,1)");
  RenewalChecks rc;
  SymbolSpec spec = make_builtin(Builtin::Renewal, {a});

  // (i) closed-form coefficients vs quadrature of the closed-form expression
  SymbolSpec expr = parse_symbol(builtin_expression_text(spec), 1);
  const int K = 8;
  CoeffTable tq = fourier_coeffs(expr, K, quad);
  CoeffTable tc = fourier_coeffs(spec, K, quad);
  for (int k = -K; k <= K; ++k)
    rc.coeff_residual = std::max(rc.coeff_residual, std::abs(tq.at1(k) - tc.at1(k)));

  // (ii) interrenewal law: P[eta_1..eta_{n-1} = 0, eta_n = 1 | eta_0 = 1]
  CoeffTable t = fourier_coeffs(spec, 10, quad);
  double p1 = prob_ones(t, {Site{0}});
  for (int n = 1; n <= 8; ++n) {
    CylinderEvent ev;
    ev.ones = {Site{0}, Site{n}};
    for (int i = 1; i < n; ++i) ev.zeros.push_back(Site{i});
    double lhs = prob_cylinder(t, ev) / p1;
    double rhs = double(n) * (1 - a) * (1 - a) * std::pow(a, n - 1);
    rc.interrenewal_residual = std::max(rc.interrenewal_residual, std::fabs(lhs - rhs));
  }

  // (iii) P[eta_j = 1 | eta_{-1} = 1] = (1-a)/(1+a) (1 - a^{2j+2})
  for (int j = 0; j <= 8; ++j) {
    double lhs = prob_ones(t, {Site{-1}, Site{j}}) / p1;
    double rhs = (1 - a) / (1 + a) * (1 - std::pow(a, 2 * j + 2));
    rc.conditional_residual = std::max(rc.conditional_residual, std::fabs(lhs - rhs));
  }

  // (iv) the convolution identity relating (ii) and (iii)
  for (int j = 0; j <= 8; ++j) {
    double lhs = (1 - a) / (1 + a) * (1 - std::pow(a, 2 * j + 2));
    double rhs = double(j + 1) * (1 - a) * (1 - a) * std::pow(a, j);
    for (int k = 1; k <= j; ++k)
      rhs += (1 - a) / (1 + a) * double(k) * (1 - a) * (1 - a) * std::pow(a, k - 1) *
             (1 - std::pow(a, 2 * (j - k) + 2));
    rc.convolution_residual = std::max(rc.convolution_residual, std::fabs(lhs - rhs));
  }
  return rc;
}

}  // namespace detproc
