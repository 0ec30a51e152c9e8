#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iomanip>

#include "detproc/quadrature.hpp"

namespace detproc {

// ---------------------------------------------------------------------------
// CoeffTable
// ---------------------------------------------------------------------------

/**
 * Truncated table of Fourier coefficients f-hat(k) on the box |k_j| <= kmax_j.
 * Entries satisfy f-hat(-k) = conj(f-hat(k)) exactly (enforced by averaging)
 * and f-hat(0) is real in [0,1].
 */
struct CoeffTable {
  int dim = 1;
  std::vector<int> kmax;      // per-axis radius
  std::vector<cplx> entries;  // row-major over k+kmax in prod(2 kmax_j + 1)
  std::string provenance;     // "closed-form" or "quadrature(...)"
  double err = 0.0;           // estimated absolute error per entry

  size_t index(const Site& k) const {
    size_t idx = 0;
    for (int j = 0; j < dim; ++j) {
      if (std::abs(k[j]) > kmax[j]) throw DetprocError("coefficient out of table range");
      idx = idx * size_t(2 * kmax[j] + 1) + size_t(k[j] + kmax[j]);
    }
    return idx;
  }

  bool in_range(const Site& k) const {
    for (int j = 0; j < dim; ++j)
      if (std::abs(k[j]) > kmax[j]) return false;
    return true;
  }

  cplx at(const Site& k) const { return entries[index(k)]; }
  cplx& at_mut(const Site& k) { return entries[index(k)]; }

  /// 1-d convenience accessor.
  cplx at1(int k) const { return at(Site{k}); }

  size_t size() const {
    size_t n = 1;
    for (int j = 0; j < dim; ++j) n *= size_t(2 * kmax[j] + 1);
    return n;
  }

  static CoeffTable zeros(int dim, std::vector<int> kmax) {
    CoeffTable t;
    t.dim = dim;
    t.kmax = std::move(kmax);
    t.entries.assign(t.size(), cplx(0));
    return t;
  }

  void enforce_hermitian() {
    std::vector<Site> ks = all_sites();
    for (const Site& k : ks) {
      Site nk(k.size());
      for (size_t j = 0; j < k.size(); ++j) nk[j] = -k[j];
      cplx a = at(k), b = std::conj(at(nk));
      cplx avg = (a + b) / 2.0;
      at_mut(k) = avg;
      at_mut(nk) = std::conj(avg);
    }
    Site zero(dim, 0);
    at_mut(zero) = cplx(clamp01(at(zero).real()), 0.0);
  }

  std::vector<Site> all_sites() const {
    std::vector<Site> out;
    out.reserve(size());
    Site k(dim);
    for (int j = 0; j < dim; ++j) k[j] = -kmax[j];
    for (;;) {
      out.push_back(k);
      int j = dim - 1;
      for (; j >= 0; --j) {
        if (++k[j] <= kmax[j]) break;
        k[j] = -kmax[j];
      }
      if (j < 0) break;
    }
    return out;
  }
};

/// Table of 1 - f from a table of f.
inline CoeffTable complement_table(const CoeffTable& t) {
  CoeffTable r = t;
  for (cplx& e : r.entries) e = -e;
  Site zero(t.dim, 0);
  r.at_mut(zero) = cplx(1.0 - t.at(zero).real(), 0.0);
  return r;
}

/// Restriction to the sublattice rZ^d: out(k) = in(r .* k).
inline CoeffTable subsample(const CoeffTable& t, const std::vector<int>& r) {
  if (int(r.size()) != t.dim) throw DetprocError("subsample: rate dimension mismatch");
  CoeffTable out;
  out.dim = t.dim;
  out.kmax.resize(t.dim);
  for (int j = 0; j < t.dim; ++j) {
    if (r[j] < 1) throw DetprocError("subsample: rate must be positive");
    out.kmax[j] = t.kmax[j] / r[j];
  }
  out = CoeffTable::zeros(t.dim, out.kmax);
  out.provenance = t.provenance;
  out.err = t.err;
  for (const Site& k : out.all_sites()) {
    Site rk(k.size());
    for (size_t j = 0; j < k.size(); ++j) rk[j] = k[j] * r[j];
    out.at_mut(k) = t.at(rk);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form coefficient tables
// ---------------------------------------------------------------------------

namespace detail {

inline cplx arc_coeff(double a, double b, int k) {
  if (k == 0) return cplx(b - a, 0);
  cplx ea = std::exp(cplx(0, -2 * kPi * k * a));
  cplx eb = std::exp(cplx(0, -2 * kPi * k * b));
  return (ea - eb) / cplx(0, 2 * kPi * k);
}

inline double zigzag_coeff(int k) {
  k = std::abs(k);
  if (k == 0) return 0.5;
  if (k % 2 == 0) return 0.0;
  int j = (k - 1) / 2;
  double s = 0;
  for (int i = 0; i <= j; ++i) s += ((i % 2) ? -1.0 : 1.0) / double(2 * i + 1);
  double lead = ((j % 2) ? -1.0 : 1.0) * (-0.5 + (2.0 / kPi) * s);
  return lead - 1.0 / (kPi * double(k));
}

/// Coefficients of f = 1/T for a positive trigonometric polynomial
/// T = c0 + sum_k 2 c_k cos(2 pi k x), via the convolution identity
/// (T * f-hat)(k) = delta_{k,0} solved on a window wide enough that the
/// geometric decay of f-hat makes truncation negligible.
inline std::vector<double> recip_trig_coeffs(const std::vector<double>& c, int kmax) {
  const int n = int(c.size()) - 1;
  const int pad = std::max(64, 8 * n);
  const int K = kmax + pad;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2 * K + 1, 2 * K + 1);
  for (int row = -K; row <= K; ++row)
    for (int j = -n; j <= n; ++j) {
      int col = row - j;
      if (std::abs(col) > K) continue;
      T(row + K, col + K) += c[size_t(std::abs(j))];
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * K + 1);
  rhs(K) = 1.0;
  Eigen::VectorXd sol = T.partialPivLu().solve(rhs);
  std::vector<double> out(size_t(2 * kmax + 1));
  for (int k = -kmax; k <= kmax; ++k) out[size_t(k + kmax)] = sol(k + K);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// fourier_coeffs
// ---------------------------------------------------------------------------

namespace detail {

/// Closed-form table for the plain builtin, or nullopt.
inline std::optional<CoeffTable> closed_table(const BuiltinCall& b, const std::vector<int>& kmax) {
  CoeffTable t = CoeffTable::zeros(1, kmax);
  t.provenance = "closed-form";
  const int K = kmax[0];
  switch (b.tag) {
    case Builtin::Const:
      t.at_mut(Site{0}) = b.params[0];
      return t;
    case Builtin::ArcInd:
      for (int k = -K; k <= K; ++k) t.at_mut(Site{k}) = arc_coeff(b.params[0], b.params[1], k);
      return t;
    case Builtin::Sin2:
      t.at_mut(Site{0}) = 0.5;
      if (K >= 1) { t.at_mut(Site{1}) = -0.25; t.at_mut(Site{-1}) = -0.25; }
      return t;
    case Builtin::Sin2Half:
      for (int k = -K; k <= K; ++k) {
        if (k == 0) t.at_mut(Site{0}) = 0.5;
        else t.at_mut(Site{k}) = cplx(0, 2.0 * k / (double(2 * k - 1) * double(2 * k + 1) * kPi));
      }
      return t;
    case Builtin::Renewal: {
      double a = b.params[0];
      for (int k = -K; k <= K; ++k)
        t.at_mut(Site{k}) = (1 - a) / (1 + a) * std::pow(a, std::abs(k));
      return t;
    }
    case Builtin::Zigzag:
      for (int k = -K; k <= K; ++k) t.at_mut(Site{k}) = zigzag_coeff(k);
      return t;
    case Builtin::Poly3:
      t.at_mut(Site{0}) = 3.0 / 9.0;
      if (K >= 1) { t.at_mut(Site{1}) = 2.0 / 9.0; t.at_mut(Site{-1}) = 2.0 / 9.0; }
      if (K >= 2) { t.at_mut(Site{2}) = 1.0 / 9.0; t.at_mut(Site{-2}) = 1.0 / 9.0; }
      return t;
    case Builtin::RecipTrig: {
      std::vector<double> v = recip_trig_coeffs(b.params, K);
      for (int k = -K; k <= K; ++k) t.at_mut(Site{k}) = v[size_t(k + K)];
      return t;
    }
    default:
      return std::nullopt;
  }
}

/// One quadrature pass of the full 1-d table at the given level.
inline std::vector<cplx> table_pass_1d(SymbolEvaluator& f, int level, int kmax) {
  size_t n = size_t(1) << level;
  std::vector<cplx> samples(n);
  for (size_t j = 0; j < n; ++j) samples[j] = f((double(j) + 0.5) / double(n));
  return midpoint_coeffs_1d(std::move(samples), kmax);
}

/// One quadrature pass of the full 2-d table: FFT along y per row of x,
/// then FFT along x per retained y-frequency.
inline std::vector<cplx> table_pass_2d(SymbolEvaluator& f, int level, int k1, int k2) {
  const size_t n = size_t(1) << level;
  const int m2 = 2 * k2 + 1;
  std::vector<std::vector<cplx>> partial(size_t(m2), std::vector<cplx>(n, cplx(0)));
  std::vector<cplx> row(n);
  for (size_t i = 0; i < n; ++i) {
    double x = (double(i) + 0.5) / double(n);
    for (size_t j = 0; j < n; ++j) row[j] = f(x, (double(j) + 0.5) / double(n));
    std::vector<cplx> c = midpoint_coeffs_1d(row, k2);
    for (int l = 0; l < m2; ++l) partial[size_t(l)][i] = c[size_t(l)];
  }
  const int m1 = 2 * k1 + 1;
  std::vector<cplx> out(size_t(m1) * size_t(m2));
  for (int l = 0; l < m2; ++l) {
    std::vector<cplx> c = midpoint_coeffs_1d(partial[size_t(l)], k1);
    for (int k = 0; k < m1; ++k) out[size_t(k) * size_t(m2) + size_t(l)] = c[size_t(k)];
  }
  return out;
}

/// Per-entry Richardson over levels; returns extrapolated entries and the
/// largest final delta.
struct TablePasses {
  std::vector<std::vector<cplx>> raw;  // raw[level_index][entry]

  std::pair<std::vector<cplx>, double> extrapolate() const {
    size_t nlev = raw.size(), nent = raw[0].size();
    std::vector<cplx> out(nent);
    double worst = 0;
    for (size_t e = 0; e < nent; ++e) {
      RichardsonTable tr, ti;
      for (size_t l = 0; l < nlev; ++l) {
        tr.push(raw[l][e].real());
        ti.push(raw[l][e].imag());
      }
      auto [re, re_err] = tr.estimate();
      auto [im, im_err] = ti.estimate();
      out[e] = cplx(re, im);
      if (nlev >= 2) worst = std::max({worst, re_err, im_err});
    }
    return {out, worst};
  }
};

}  // namespace detail

/**
 * Fourier coefficient table of a symbol. Builtins with stated closed forms
 * use them directly (const, arc, sin2, sin2half, renewal, zigzag, poly3,
 * recip_trig); everything else runs tensor midpoint quadrature with
 * Richardson refinement until successive refinements differ by < quad.tol.
 */
inline CoeffTable fourier_coeffs(const SymbolSpec& spec, std::vector<int> kmax,
                                 const QuadParams& quad) {
  if (int(kmax.size()) != spec.dim) throw DetprocError("kmax dimension mismatch");

  // transforms reduce to the base table
  if (spec.arg_scale != 1) {
    SymbolSpec base = spec;
    base.arg_scale = 1;
    const int n = spec.arg_scale;
    std::vector<int> base_kmax{kmax[0] / n};
    CoeffTable bt = fourier_coeffs(base, base_kmax, quad);
    CoeffTable t = CoeffTable::zeros(1, kmax);
    t.provenance = bt.provenance;
    t.err = bt.err;
    for (int k = -kmax[0]; k <= kmax[0]; ++k)
      t.at_mut(Site{k}) = (k % n == 0) ? bt.at(Site{k / n}) : cplx(0);
    return t;
  }
  if (spec.complemented) {
    SymbolSpec base = spec;
    base.complemented = false;
    return complement_table(fourier_coeffs(base, kmax, quad));
  }

  if (spec.is_builtin()) {
    if (auto t = detail::closed_table(*spec.builtin(), kmax)) return *t;
  }

  SymbolEvaluator f(spec);
  detail::TablePasses passes;
  QuadResult meta;
  int settled = 0;
  if (spec.dim == 1) {
    int minl = quad.min_level;
    while ((1 << minl) < 4 * (kmax[0] + 1)) ++minl;
    for (int m = minl; m <= quad.max_level_1d; ++m) {
      passes.raw.push_back(detail::table_pass_1d(f, m, kmax[0]));
      meta.level = m;
      if (passes.raw.size() >= 3) {
        auto [vals, delta] = passes.extrapolate();
        meta.err = delta;
        settled = delta < quad.tol ? settled + 1 : 0;
        if (settled >= 2) { meta.converged = true; break; }
      }
    }
  } else if (spec.dim == 2) {
    int minl = std::min(quad.min_level, quad.max_level_2d);
    while ((1 << minl) < 4 * (std::max(kmax[0], kmax[1]) + 1)) ++minl;
    for (int m = minl; m <= quad.max_level_2d; ++m) {
      passes.raw.push_back(detail::table_pass_2d(f, m, kmax[0], kmax[1]));
      meta.level = m;
      if (passes.raw.size() >= 3) {
        auto [vals, delta] = passes.extrapolate();
        meta.err = delta;
        settled = delta < quad.tol ? settled + 1 : 0;
        if (settled >= 2) { meta.converged = true; break; }
      }
    }
  } else {
    throw DetprocError("coefficient quadrature supports d <= 2; use closed-form builtins beyond");
  }
  if (!meta.converged && passes.raw.size() < 3)
    throw DetprocError("quadrature could not run enough refinements");

  auto [vals, delta] = passes.extrapolate();
  CoeffTable t;
  t.dim = spec.dim;
  t.kmax = kmax;
  t.entries = vals;
  t.err = delta;
  {
    std::ostringstream p;
    p << "quadrature(level=" << meta.level << ",delta=" << std::scientific
      << std::setprecision(2) << delta << (meta.converged ? "" : ",nonconverged") << ")";
    t.provenance = p.str();
  }
  t.enforce_hermitian();
  if (!meta.converged && delta > 100 * quad.tol)
    throw DetprocError("non-convergent coefficient refinement, last delta " + std::to_string(delta));
  return t;
}

inline CoeffTable fourier_coeffs(const SymbolSpec& spec, int kmax, const QuadParams& quad) {
  return fourier_coeffs(spec, std::vector<int>(size_t(spec.dim), kmax), quad);
}

// ---------------------------------------------------------------------------
// Means
// ---------------------------------------------------------------------------

struct MeanEntry {
  double value = 0.0;
  double err = 0.0;
  bool divergent = false;  // gm: log f non-integrable; hm: 1/f non-integrable
  bool provable = false;   // closed form / provable annotation, not a numeric verdict
};

/// Arithmetic, geometric, and harmonic means of f and the complements' values.
struct MeansReport {
  MeanEntry am, gm, hm, gm_complement, hm_complement;
};

namespace detail {

/// Numeric integral of log f. Divergence is declared when the raw estimate
/// sits below -40 without recovering, or keeps dropping by a near-constant
/// step per refinement.
inline MeanEntry log_mean_numeric(const SymbolSpec& spec, const QuadParams& q) {
  SymbolEvaluator f(spec);
  MeanEntry e;
  RichardsonTable table;
  int settled = 0;
  const int maxl = spec.dim == 1 ? q.max_level_1d : q.max_level_2d;
  for (int m = std::min(q.min_level, maxl); m <= maxl; ++m) {
    double v;
    auto g1 = [&](double x) { return std::log(std::max(f(x), 1e-300)); };
    auto g2 = [&](double x, double y) { return std::log(std::max(f(x, y), 1e-300)); };
    v = spec.dim == 1 ? midpoint_sum_1d(g1, m) : midpoint_sum_2d(g2, m);
    table.push(v);
    // non-strict: hard zeros hit the evaluation clamp and plateau near -345;
    // essential singularities like exp(-1/|x|) instead drift down by a fixed
    // step per refinement
    bool plateau = table.depth() >= 2 && table.raw_back() < -40 &&
                   table.raw_back() <= table.raw_prev() + q.tol;
    if (plateau || table.log_divergence(-1)) {
      e.divergent = true;
      e.value = 0.0;
      return e;
    }
    double d = table.delta();
    if (!std::isnan(d)) {
      e.err = d;
      settled = d < q.tol ? settled + 1 : 0;
      if (settled >= 2 && table.depth() >= 4) break;
    }
  }
  auto [v, err] = table.estimate();
  e.value = std::exp(v);
  e.err = std::max(e.err, err) * e.value;  // absolute error after exp
  return e;
}

/// Numeric integral of 1/f. Divergence is declared when the estimate exceeds 1e16 and
/// is increasing, or when it keeps growing geometrically past 1e4 (polynomial
/// zeros of f make the midpoint sums double per refinement without ever
/// reaching the absolute threshold).
inline MeanEntry recip_mean_numeric(const SymbolSpec& spec, const QuadParams& q) {
  SymbolEvaluator f(spec);
  MeanEntry e;
  RichardsonTable table;
  int growth_streak = 0;
  int settled = 0;
  const int maxl = spec.dim == 1 ? q.max_level_1d : q.max_level_2d;
  for (int m = std::min(q.min_level, maxl); m <= maxl; ++m) {
    double v;
    auto g1 = [&](double x) { return std::min(1.0 / std::max(f(x), 1e-300), 1e300); };
    auto g2 = [&](double x, double y) { return std::min(1.0 / std::max(f(x, y), 1e-300), 1e300); };
    v = spec.dim == 1 ? midpoint_sum_1d(g1, m) : midpoint_sum_2d(g2, m);
    table.push(v);
    if (table.depth() >= 2) {
      growth_streak = table.raw_back() > 1.5 * table.raw_prev() ? growth_streak + 1 : 0;
      bool absolute = table.raw_back() > 1e16 && table.raw_back() >= table.raw_prev() - q.tol;
      bool geometric = growth_streak >= 3 && table.raw_back() > 1e4;
      if (absolute || geometric || table.log_divergence(+1)) {
        e.divergent = true;
        e.value = 0.0;
        return e;
      }
    }
    double d = table.delta();
    if (!std::isnan(d)) {
      e.err = d;
      settled = d < q.tol ? settled + 1 : 0;
      if (settled >= 2 && table.depth() >= 4) break;
    }
  }
  auto [integral, err] = table.estimate();
  double rel = std::max(e.err, err) / std::max(integral, 1e-300);
  e.value = 1.0 / integral;
  e.err = rel * e.value;
  return e;
}

inline MeanEntry mc_mean(const SymbolSpec& spec, const QuadParams& q,
                         bool log_mode) {
  SymbolEvaluator f(spec);
  auto g = [&](const double* x) {
    double v = std::max(f.at(x), 1e-300);
    return log_mode ? std::log(v) : std::min(1.0 / v, 1e300);
  };
  QuadResult r = integrate_mc(g, spec.dim, q);
  MeanEntry e;
  if (log_mode) {
    if (r.value < -40) { e.divergent = true; return e; }
    e.value = std::exp(r.value);
    e.err = e.value * r.err;
  } else {
    if (r.value > 1e16) { e.divergent = true; return e; }
    e.value = 1.0 / r.value;
    e.err = r.err / (r.value * r.value);
  }
  return e;
}

inline MeanEntry closed_entry(double v) {
  MeanEntry e;
  e.value = v;
  e.provable = true;
  if (v == 0.0) e.divergent = true;
  return e;
}

/// Closed-form means for plain builtins where the source material states
/// them; they double as regression targets for the quadrature path.
inline std::optional<MeansReport> closed_means(const BuiltinCall& b) {
  const double e4G = std::exp(-4 * kCatalan / kPi);
  const double e2G = std::exp(-2 * kCatalan / kPi);
  MeansReport r;
  switch (b.tag) {
    case Builtin::Const: {
      double p = b.params[0];
      r.am = closed_entry(p);
      r.gm = closed_entry(p);
      r.hm = closed_entry(p);
      r.gm_complement = closed_entry(1 - p);
      r.hm_complement = closed_entry(1 - p);
      return r;
    }
    case Builtin::ArcInd:
      r.am = closed_entry(b.params[1] - b.params[0]);
      r.gm = closed_entry(0);
      r.hm = closed_entry(0);
      r.gm_complement = closed_entry(0);
      r.hm_complement = closed_entry(0);
      return r;
    case Builtin::Sin2:
    case Builtin::Sin2Half:
      r.am = closed_entry(0.5);
      r.gm = closed_entry(0.25);
      r.hm = closed_entry(0);
      r.gm_complement = closed_entry(0.25);
      r.hm_complement = closed_entry(0);
      return r;
    case Builtin::Ust2d:
      r.am = closed_entry(0.5);
      r.gm = closed_entry(e4G);
      r.hm = closed_entry(0);
      r.gm_complement = closed_entry(e4G);
      r.hm_complement = closed_entry(0);
      return r;
    case Builtin::UstAxisG:
      r.am = closed_entry(0.5);
      r.gm = closed_entry(std::sqrt(2.0) - 1);
      r.hm = closed_entry(0);
      r.gm_complement = closed_entry(2 * (std::sqrt(2.0) - 1) * e2G);
      r.hm_complement = closed_entry(1.0 / (2 + 1 / kPi));
      return r;
    case Builtin::Zigzag:
      // 1 - f is f translated by 1/2, so the complement mean coincides
      r.am = closed_entry(0.5);
      r.gm = closed_entry(e2G / std::sqrt(2.0));
      r.hm = closed_entry(0);
      r.gm_complement = closed_entry(e2G / std::sqrt(2.0));
      r.hm_complement = closed_entry(0);
      return r;
    case Builtin::Renewal: {
      double a = b.params[0];
      r.am = closed_entry((1 - a) / (1 + a));
      r.gm = closed_entry((1 - a) * (1 - a));
      r.hm = closed_entry((1 - a) * (1 - a) / (1 + a * a));
      r.gm_complement = closed_entry(a);
      r.hm_complement = closed_entry(0);
      return r;
    }
    case Builtin::Poly3:
      r.am = closed_entry(1.0 / 3.0);
      r.gm = closed_entry(1.0 / 9.0);
      r.hm = closed_entry(0);
      r.gm_complement = closed_entry((2 + std::sqrt(3.0)) / 9.0);
      r.hm_complement = closed_entry(0);
      return r;
    case Builtin::Ustd: {
      if (int(b.params[0]) != 2) return std::nullopt;
      r.am = closed_entry(0.5);
      r.gm = closed_entry(e4G);
      r.hm = closed_entry(0);
      r.gm_complement = closed_entry(e4G);
      r.hm_complement = closed_entry(0);
      return r;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace detail

/// Numeric means, ignoring closed-form annotations (regression path).
inline MeansReport means_numeric(const SymbolSpec& spec, const QuadParams& quad) {
  MeansReport r;
  SymbolSpec comp = complement(spec);
  if (spec.dim <= 2) {
    SymbolEvaluator f(spec);
    QuadResult am = spec.dim == 1
        ? integrate_periodic_1d([&](double x) { return f(x); }, quad)
        : integrate_periodic_2d([&](double x, double y) { return f(x, y); }, quad);
    r.am.value = clamp01(am.value);
    r.am.err = am.err;
    r.gm = detail::log_mean_numeric(spec, quad);
    r.hm = detail::recip_mean_numeric(spec, quad);
    r.gm_complement = detail::log_mean_numeric(comp, quad);
    r.hm_complement = detail::recip_mean_numeric(comp, quad);
  } else {
    SymbolEvaluator f(spec);
    QuadResult am = integrate_mc([&](const double* x) { return f.at(x); }, spec.dim, quad);
    r.am.value = clamp01(am.value);
    r.am.err = am.err;
    r.gm = detail::mc_mean(spec, quad, true);
    r.hm = detail::mc_mean(spec, quad, false);
    r.gm_complement = detail::mc_mean(comp, quad, true);
    r.hm_complement = detail::mc_mean(comp, quad, false);
  }
  return r;
}

/**
 * Means report for a symbol. Builtins carry closed-form values with provable
 * divergence annotations; other symbols get the numeric policy (midpoint +
 * Richardson refinement for d <= 2, Monte Carlo beyond).
 */
inline MeansReport means(const SymbolSpec& spec, const QuadParams& quad) {
  // transforms: means are invariant under arg scaling; complement swaps sides
  if (spec.arg_scale != 1) {
    SymbolSpec base = spec;
    base.arg_scale = 1;
    return means(base, quad);
  }
  if (spec.complemented) {
    SymbolSpec base = spec;
    base.complemented = false;
    MeansReport m = means(base, quad);
    MeansReport r;
    r.am = MeanEntry{1 - m.am.value, m.am.err, false, m.am.provable};
    r.gm = m.gm_complement;
    r.hm = m.hm_complement;
    r.gm_complement = m.gm;
    r.hm_complement = m.hm;
    return r;
  }
  if (spec.is_builtin()) {
    const BuiltinCall& b = *spec.builtin();
    if (auto r = detail::closed_means(b)) return *r;
    if (b.tag == Builtin::Ustd) {
      // closed where provable, Monte Carlo for the rest (d >= 3)
      int d = int(b.params[0]);
      MeansReport r = means_numeric(spec, quad);
      r.am = detail::closed_entry(1.0 / d);
      r.hm = detail::closed_entry(0);
      if (d <= 3) r.hm_complement = detail::closed_entry(0);
      return r;
    }
    if (b.tag == Builtin::RecipTrig) {
      MeansReport r = means_numeric(spec, quad);
      r.hm = detail::closed_entry(1.0 / b.params[0]);  // integral of T is c0
      return r;
    }
  }
  return means_numeric(spec, quad);
}

// ---------------------------------------------------------------------------
// Log-half coefficients and the outer series
// ---------------------------------------------------------------------------

/**
 * Fourier coefficients F-hat(0..N) of F = (1/2) log f. Closed forms are used
 * for builtins where they are known; otherwise midpoint quadrature with
 * Richardson refinement. Requires GM(f) > 0.
 */
inline std::vector<cplx> log_half_coeffs(const SymbolSpec& spec, int N, const QuadParams& quad) {
  if (spec.is_builtin() && !spec.complemented && spec.arg_scale == 1) {
    const BuiltinCall& b = *spec.builtin();
    std::vector<cplx> F(size_t(N) + 1);
    switch (b.tag) {
      case Builtin::Const:
        if (b.params[0] <= 0) throw DetprocError("log_half_coeffs: divergent GM");
        F[0] = 0.5 * std::log(b.params[0]);
        return F;
      case Builtin::Sin2:
        F[0] = -std::log(2.0);
        for (int k = 1; k <= N; ++k) F[size_t(k)] = -1.0 / (4.0 * k);
        return F;
      case Builtin::Sin2Half: {
        F[0] = -std::log(2.0);
        double harmonic = 0;
        for (int k = 1; k <= N; ++k) {
          harmonic += 1.0 / double(2 * k - 1);
          F[size_t(k)] = cplx(-1.0 / (4.0 * k), harmonic / (double(k) * kPi));
        }
        return F;
      }
      case Builtin::Renewal: {
        double a = b.params[0];
        F[0] = std::log(1 - a);
        for (int k = 1; k <= N; ++k) F[size_t(k)] = std::pow(a, k) / (2.0 * k);
        return F;
      }
      case Builtin::UstAxisG: {
        // log g = log|sin pi x| - (1/2) log(1 + sin^2 pi x);
        // 1 + sin^2 = |((sqrt2+1) - (sqrt2-1)e_1)/2|^2
        const double rho = 3 - 2 * std::sqrt(2.0);
        F[0] = 0.5 * std::log(std::sqrt(2.0) - 1);
        for (int k = 1; k <= N; ++k)
          F[size_t(k)] = (-1.0 + std::pow(rho, k)) / (4.0 * k);
        return F;
      }
      default:
        break;
    }
  }

  MeansReport m = means(spec, quad);
  if (m.gm.divergent) throw DetprocError("log_half_coeffs: divergent GM");
  if (spec.dim != 1) throw DetprocError("log_half_coeffs requires d = 1");

  SymbolEvaluator f(spec);
  detail::TablePasses passes;
  int minl = quad.min_level;
  while ((1 << minl) < 4 * (N + 1)) ++minl;
  int settled = 0;
  for (int mlev = minl; mlev <= quad.max_level_1d; ++mlev) {
    size_t n = size_t(1) << mlev;
    std::vector<cplx> samples(n);
    for (size_t j = 0; j < n; ++j)
      samples[j] = 0.5 * std::log(std::max(f((double(j) + 0.5) / double(n)), 1e-300));
    passes.raw.push_back(midpoint_coeffs_1d(std::move(samples), N));
    if (passes.raw.size() >= 3) {
      auto [vals, delta] = passes.extrapolate();
      settled = delta < quad.tol ? settled + 1 : 0;
      if (settled >= 2) break;
    }
  }
  auto [vals, delta] = passes.extrapolate();
  std::vector<cplx> F(size_t(N) + 1);
  for (int k = 0; k <= N; ++k) F[size_t(k)] = vals[size_t(k + N)];
  F[0] = cplx(F[0].real(), 0.0);
  return F;
}

/// Coefficients phi-hat(0..N) of the outer function, with
/// phi-hat(0) = sqrt(GM(f)); the zero series when GM(f) = 0.
struct OuterSeries {
  int n_terms = 0;
  std::vector<cplx> coeffs;
  double gm_source = 0.0;

  cplx at(int k) const {
    return (k >= 0 && k < n_terms) ? coeffs[size_t(k)] : cplx(0);
  }
};

namespace detail {

/// phi = exp(S) as formal power series: n psi_n = sum m S_m psi_{n-m}.
inline std::vector<cplx> exp_series(const std::vector<cplx>& S) {
  const size_t n = S.size();
  std::vector<cplx> psi(n);
  psi[0] = std::exp(S[0]);
  for (size_t k = 1; k < n; ++k) {
    cplx acc = 0;
    for (size_t m = 1; m <= k; ++m) acc += double(m) * S[m] * psi[k - m];
    psi[k] = acc / double(k);
  }
  return psi;
}

/// Closed outer coefficients where the source states them.
inline std::optional<std::vector<cplx>> closed_outer(const SymbolSpec& spec, int N) {
  auto fill = [&](std::vector<cplx> head) {
    head.resize(size_t(N) + 1, cplx(0));
    return head;
  };
  if (spec.arg_scale != 1) return std::nullopt;
  if (!spec.is_builtin()) return std::nullopt;
  const BuiltinCall& b = *spec.builtin();
  const bool c = spec.complemented;
  const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
  switch (b.tag) {
    case Builtin::Const:
      return fill({std::sqrt(c ? 1 - b.params[0] : b.params[0])});
    case Builtin::Sin2:
      // g = |(1-e_1)/2|^2, 1-g = |(1+e_1)/2|^2
      return fill({0.5, c ? 0.5 : -0.5});
    case Builtin::Poly3: {
      if (!c) return fill({1.0 / 3, 1.0 / 3, 1.0 / 3});
      return fill({(s6 + s2) / 6, -s2 / 3, (s2 - s6) / 6});
    }
    case Builtin::Renewal: {
      double a = b.params[0];
      std::vector<cplx> v(size_t(N) + 1);
      if (!c) {
        // (1-a)/(1-a z)
        for (int k = 0; k <= N; ++k) v[size_t(k)] = (1 - a) * std::pow(a, k);
      } else {
        // sqrt(a) (1-z)/(1-a z)
        v[0] = std::sqrt(a);
        for (int k = 1; k <= N; ++k)
          v[size_t(k)] = std::sqrt(a) * (std::pow(a, k) - std::pow(a, k - 1));
      }
      return v;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace detail

/**
 * Outer-function coefficients phi-hat(0..N), computed from F = (1/2) log f by
 * power-series exponentiation of S(z) = F(0) + 2 sum_{k>=1} F(k) z^k, or from
 * closed forms where available. GM(f) = 0 yields the zero series.
 */
inline OuterSeries outer_coeffs(const SymbolSpec& spec, int N, const QuadParams& quad) {
  OuterSeries out;
  out.n_terms = N + 1;
  MeansReport m = means(spec, quad);
  out.gm_source = m.gm.divergent ? 0.0 : m.gm.value;
  if (m.gm.divergent) {
    out.coeffs.assign(size_t(N) + 1, cplx(0));
    return out;
  }
  if (auto closed = detail::closed_outer(spec, N)) {
    out.coeffs = *closed;
    return out;
  }
  if (spec.complemented && spec.is_builtin() && spec.builtin()->tag == Builtin::Sin2Half) {
    // 1 - sin^2(pi t/2) = sin^2(pi (1-t)/2): coefficients conjugate
    SymbolSpec base = spec;
    base.complemented = false;
    OuterSeries o = outer_coeffs(base, N, quad);
    for (cplx& v : o.coeffs) v = std::conj(v);
    o.gm_source = out.gm_source;
    return o;
  }
  std::vector<cplx> F = log_half_coeffs(spec, N, quad);
  std::vector<cplx> S(F.size());
  S[0] = F[0];
  for (size_t k = 1; k < F.size(); ++k) S[k] = 2.0 * F[k];
  out.coeffs = detail::exp_series(S);
  return out;
}

// ---------------------------------------------------------------------------
// Szego ratios
// ---------------------------------------------------------------------------

struct SzegoRatios {
  std::vector<double> ratios;  // ratios[n] = d_{n+1}/d_n with d_0 = 1
  bool truncated = false;      // determinant magnitude fell below tolerance
};

/// Ratios of consecutive Toeplitz determinants d_n = det[f-hat(j-i)]_{n x n};
/// nonincreasing and converging to GM(f) from above.
inline SzegoRatios szego_ratio_gm(const CoeffTable& table, int nmax) {
  if (table.dim != 1) throw DetprocError("szego_ratio_gm requires d = 1");
  if (table.kmax[0] < nmax) throw DetprocError("table radius below nmax");
  SzegoRatios out;
  double prev = 1.0;
  for (int n = 1; n <= nmax + 1; ++n) {
    Eigen::MatrixXcd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = table.at1(j - i);
    double d = M.partialPivLu().determinant().real();
    if (d < 1e-280) {
      out.truncated = true;
      break;
    }
    out.ratios.push_back(d / prev);
    prev = d;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Table cache
// ---------------------------------------------------------------------------

/// Stable textual identity of a symbol (builtin call or printed expression,
/// plus transforms); used for cache keys.
inline std::string describe_symbol(const SymbolSpec& spec) {
  std::ostringstream out;
  out << "d" << spec.dim << ";";
  if (spec.is_builtin()) {
    const BuiltinCall& b = *spec.builtin();
    out << "builtin:" << int(b.tag);
    for (double p : b.params) out << ',' << std::setprecision(17) << p;
  } else {
    std::ostringstream e;
    detail::print_expr(*std::get<ExprPtr>(spec.body), e);
    out << "expr:" << e.str();
  }
  if (spec.complemented) out << ";comp";
  if (spec.arg_scale != 1) out << ";mult" << spec.arg_scale;
  return out.str();
}

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline uint64_t table_cache_key(const SymbolSpec& spec, const std::vector<int>& kmax,
                                const QuadParams& quad) {
  std::ostringstream out;
  out << describe_symbol(spec) << "|kmax";
  for (int k : kmax) out << ',' << k;
  out << "|tol" << std::scientific << std::setprecision(3) << quad.tol
      << "|lev" << quad.min_level << ':' << quad.max_level_1d << ':' << quad.max_level_2d;
  return fnv1a(out.str());
}

inline void save_table(const CoeffTable& t, uint64_t key, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DetprocError("cannot write cache file " + path);
  out << "detproc-coeffs 1\n";
  out << "key " << std::hex << key << std::dec << "\n";
  out << "dim " << t.dim << "\nkmax";
  for (int k : t.kmax) out << ' ' << k;
  out << "\nprovenance " << t.provenance << "\nerr " << std::setprecision(17) << t.err << "\n";
  out << "entries " << t.entries.size() << "\n";
  out << std::setprecision(17);
  for (const cplx& e : t.entries) out << e.real() << ' ' << e.imag() << "\n";
}

inline std::optional<CoeffTable> load_table(uint64_t key, const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "detproc-coeffs" || version != 1) return std::nullopt;
  std::string word, hexkey;
  in >> word >> hexkey;
  if (word != "key" || std::stoull(hexkey, nullptr, 16) != key) return std::nullopt;
  CoeffTable t;
  in >> word >> t.dim;
  in >> word;
  t.kmax.resize(size_t(t.dim));
  for (int& k : t.kmax) in >> k;
  in >> word;
  std::getline(in, t.provenance);
  if (!t.provenance.empty() && t.provenance[0] == ' ') t.provenance.erase(0, 1);
  in >> word >> t.err;
  size_t n;
  in >> word >> n;
  if (n != t.size()) return std::nullopt;
  t.entries.resize(n);
  for (cplx& e : t.entries) {
    double re, im;
    in >> re >> im;
    e = cplx(re, im);
  }
  if (!in) return std::nullopt;
  return t;
}

/// Cache directory resolution: explicit argument, then DETPROC_CACHE_DIR.
inline std::optional<std::string> resolve_cache_dir(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("DETPROC_CACHE_DIR"); env && *env) return std::string(env);
  return std::nullopt;
}

/// fourier_coeffs with a file cache keyed by (symbol, kmax, quad params).
inline CoeffTable fourier_coeffs_cached(const SymbolSpec& spec, std::vector<int> kmax,
                                        const QuadParams& quad,
                                        const std::optional<std::string>& cache_dir) {
  if (!cache_dir) return fourier_coeffs(spec, kmax, quad);
  uint64_t key = table_cache_key(spec, kmax, quad);
  std::ostringstream name;
  name << *cache_dir << "/coeffs-" << std::hex << key << ".tbl";
  if (auto t = load_table(key, name.str())) return *t;
  CoeffTable t = fourier_coeffs(spec, kmax, quad);
  std::error_code ec;
  std::filesystem::create_directories(*cache_dir, ec);
  save_table(t, key, name.str());
  return t;
}

}  // namespace detproc
