#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "detproc/spectral.hpp"

namespace detproc {

// ---------------------------------------------------------------------------
// Cylinder events and probabilities
// ---------------------------------------------------------------------------

/// Finite assignment: 1 on every site of `ones`, 0 on every site of `zeros`.
struct CylinderEvent {
  std::vector<Site> ones;
  std::vector<Site> zeros;
};

namespace detail {

inline void check_disjoint_distinct(const std::vector<Site>& a, const std::vector<Site>& b) {
  std::vector<Site> all = a;
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw DetprocError("cylinder sites must be pairwise distinct");
}

}  // namespace detail

/// Generic inclusion-exclusion determinant over an abstract kernel entry
/// Q(e, e'); rows indexed by ones first, then zeros.
template <typename QFn>
double prob_cylinder_kernel(QFn&& Q, size_t n_ones, size_t n_zeros) {
  const size_t n = n_ones + n_zeros;
  if (n == 0) return 1.0;
  Eigen::MatrixXcd M(n, n);
  for (size_t i = 0; i < n; ++i) {
    const bool in_zeros = i >= n_ones;
    for (size_t j = 0; j < n; ++j) {
      cplx q = Q(i, j);
      cplx v = in_zeros ? -q : q;
      if (in_zeros && i == j) v += 1.0;
      M(long(i), long(j)) = v;
    }
  }
  double det = M.partialPivLu().determinant().real();
  return det;
}

namespace detail {
inline double clamp_probability(double p, const char* what) {
  if (p < -1e-10)
    throw DetprocError(std::string(what) + ": determinant " + std::to_string(p) +
                       " below probability slack (invalid coefficient table?)");
  return std::min(1.0, std::max(0.0, p));
}
}  // namespace detail

/// P[eta = 1 on all sites] = det [f-hat(e_j - e_i)].
inline double prob_ones(const CoeffTable& table, const std::vector<Site>& sites) {
  detail::check_disjoint_distinct(sites, {});
  const size_t n = sites.size();
  if (n == 0) return 1.0;
  Eigen::MatrixXcd M(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) M(long(i), long(j)) = table.at(sites[j] - sites[i]);
  return detail::clamp_probability(M.partialPivLu().determinant().real(), "prob_ones");
}

/// P[eta = 1 on A, eta = 0 on B] via the inclusion-exclusion determinant.
inline double prob_cylinder(const CoeffTable& table, const CylinderEvent& ev) {
  detail::check_disjoint_distinct(ev.ones, ev.zeros);
  std::vector<Site> sites = ev.ones;
  sites.insert(sites.end(), ev.zeros.begin(), ev.zeros.end());
  double p = prob_cylinder_kernel(
      [&](size_t i, size_t j) { return table.at(sites[j] - sites[i]); },
      ev.ones.size(), ev.zeros.size());
  return detail::clamp_probability(p, "prob_cylinder");
}

// ---------------------------------------------------------------------------
// Joint pmf over a window
// ---------------------------------------------------------------------------

/// Full distribution over patterns of a finite window; pattern bit i is the
/// value at window[i], packed little-endian into the pattern index.
struct Pmf {
  std::vector<Site> window;
  std::vector<double> p;  // size 2^|window|

  double at(uint32_t pattern) const { return p[pattern]; }
  size_t n_sites() const { return window.size(); }
};

/**
 * All 2^n cylinder probabilities of a window (n <= 20): minors det over every
 * subset, then a superset Moebius transform implementing inclusion-exclusion,
 * with tiny negatives clamped to zero and renormalization.
 */
inline Pmf joint_pmf(const CoeffTable& table, const std::vector<Site>& window) {
  const size_t n = window.size();
  if (n > 20) throw DetprocError("joint_pmf window exceeds 20 sites");
  detail::check_disjoint_distinct(window, {});
  const size_t total = size_t(1) << n;

  // difference matrix once
  Eigen::MatrixXcd D(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) D(long(i), long(j)) = table.at(window[j] - window[i]);

  std::vector<double> q(total);
  q[0] = 1.0;
  std::vector<int> idx;
  idx.reserve(n);
  Eigen::MatrixXcd M;
  for (size_t S = 1; S < total; ++S) {
    idx.clear();
    for (size_t b = 0; b < n; ++b)
      if (S >> b & 1) idx.push_back(int(b));
    const size_t k = idx.size();
    M.resize(long(k), long(k));
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j) M(long(i), long(j)) = D(idx[i], idx[j]);
    q[S] = M.partialPivLu().determinant().real();
  }

  // q(A) <- sum_{S >= A} (-1)^{|S \ A|} q(S)
  for (size_t b = 0; b < n; ++b) {
    const size_t bit = size_t(1) << b;
    for (size_t S = 0; S < total; ++S)
      if (!(S & bit)) q[S] -= q[S | bit];
  }

  double sum = 0;
  for (double& v : q) {
    if (v < -1e-9)
      throw DetprocError("joint_pmf: pattern probability " + std::to_string(v) +
                         " below slack (invalid table?)");
    if (v < 0) v = 0;
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw DetprocError("joint_pmf does not sum to 1 (sum = " + std::to_string(sum) + ")");
  for (double& v : q) v /= sum;

  return Pmf{window, std::move(q)};
}

/// Shannon entropy of a pmf in nats.
inline double pmf_entropy(const Pmf& pmf) {
  std::vector<double> terms;
  terms.reserve(pmf.p.size());
  for (double v : pmf.p)
    if (v > 0) terms.push_back(-v * std::log(v));
  return pairwise_sum(terms);
}

/// Marginal pmf over a subset of window positions (by index).
inline Pmf pmf_marginal(const Pmf& pmf, const std::vector<int>& keep) {
  const size_t m = keep.size();
  Pmf out;
  out.window.reserve(m);
  for (int i : keep) out.window.push_back(pmf.window[size_t(i)]);
  out.p.assign(size_t(1) << m, 0.0);
  for (size_t pat = 0; pat < pmf.p.size(); ++pat) {
    size_t sub = 0;
    for (size_t i = 0; i < m; ++i)
      if (pat >> keep[i] & 1) sub |= size_t(1) << i;
    out.p[sub] += pmf.p[pat];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conditional probability
// ---------------------------------------------------------------------------

/// P[eta(site) = 1 | event] as a ratio of cylinder probabilities.
inline double cond_prob(const CoeffTable& table, const Site& site, const CylinderEvent& ev) {
  double den = prob_cylinder(table, ev);
  double scale = prob_ones(table, {site});
  if (den < 1e-13 * std::max(scale, 1e-30))
    throw DegenerateConditioning("conditioning event has negligible probability");
  CylinderEvent with = ev;
  with.ones.push_back(site);
  double num = prob_cylinder(table, with);
  return clamp01(num / den);
}

// ---------------------------------------------------------------------------
// Szego infimum
// ---------------------------------------------------------------------------

/**
 * min over u in span{e_k : k in B} of int |1-u|^2 f = f^(0) - c^H G^+ c with
 * G[j,k] = f^(k-j), c[k] = f^(k). The pseudo-inverse uses an eigenvalue
 * cutoff of 1e-12 * lambda_max; indicator symbols make G genuinely singular.
 */
inline double szego_inf(const CoeffTable& table, const std::vector<Site>& B) {
  Site zero(table.dim, 0);
  for (const Site& b : B)
    if (b == zero) throw DetprocError("szego_inf: B must not contain the origin");
  const double f0 = table.at(zero).real();
  if (B.empty()) return f0;
  const size_t n = B.size();
  Eigen::MatrixXcd G(n, n);
  Eigen::VectorXcd c(n);
  for (size_t j = 0; j < n; ++j) {
    c(long(j)) = table.at(B[j]);
    for (size_t k = 0; k < n; ++k) G(long(j), long(k)) = table.at(B[k] - B[j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  const auto& ev = es.eigenvalues();
  double lmax = 0;
  for (long i = 0; i < ev.size(); ++i) lmax = std::max(lmax, std::fabs(ev(i)));
  const double cutoff = 1e-12 * lmax;
  Eigen::VectorXcd proj = es.eigenvectors().adjoint() * c;
  double reduction = 0;
  for (long i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff) reduction += std::norm(proj(i)) / ev(i);
  double v = f0 - reduction;
  return std::min(std::max(v, 0.0), f0);
}

// ---------------------------------------------------------------------------
// The nu kernel (conditioning on an infinite run of ones in the past)
// ---------------------------------------------------------------------------

/// Positive contraction on l^2(N) restricted to indices 0..m:
/// entry (j,k) = sum_{l <= j^k} conj(phi(j-l)) phi(k-l).
struct NuKernel {
  Eigen::MatrixXcd entries;

  int size() const { return int(entries.rows()); }
};

inline NuKernel nu_kernel(const OuterSeries& outer, int m) {
  if (outer.n_terms < m + 1) throw DetprocError("nu_kernel: outer series too short");
  NuKernel K;
  K.entries.resize(m + 1, m + 1);
  for (int j = 0; j <= m; ++j)
    for (int k = 0; k <= m; ++k) {
      cplx s = 0;
      for (int l = 0; l <= std::min(j, k); ++l)
        s += std::conj(outer.at(j - l)) * outer.at(k - l);
      K.entries(j, k) = s;
    }
  return K;
}

/// Cylinder probability under the nu measure; indices refer to 0..m.
inline double nu_cylinder(const NuKernel& K, const std::vector<int>& ones,
                          const std::vector<int>& zeros) {
  double p = prob_cylinder_kernel(
      [&](size_t i, size_t j) {
        int a = i < ones.size() ? ones[i] : zeros[i - ones.size()];
        int b = j < ones.size() ? ones[j] : zeros[j - ones.size()];
        return K.entries(a, b);
      },
      ones.size(), zeros.size());
  // projection-like kernels produce exact zeros; clamp only rounding noise
  if (p < 0 && p > -1e-10) p = 0;
  return p;
}

}  // namespace detproc
