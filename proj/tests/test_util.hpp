#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "detproc/detproc.hpp"

namespace testutil {

/// Wilson-Hilferty approximation to the chi-square quantile; plenty for the
/// large dof used in the distribution tests here.
inline double chi2_quantile(double dof, double prob) {
  double z = 0;
  // inverse normal via Acklam-style rational approximation on the upper tail
  double p = 1 - prob;
  double t = std::sqrt(-2 * std::log(p));
  z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
              (1 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
  double a = 2.0 / (9 * dof);
  double w = 1 - a + z * std::sqrt(a);
  return dof * w * w * w;
}

/// Pearson statistic of observed counts against expected probabilities.
inline double chi2_stat(const std::vector<size_t>& counts, const std::vector<double>& probs,
                        size_t n) {
  double stat = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    double e = probs[i] * double(n);
    if (e <= 0) continue;
    double d = double(counts[i]) - e;
    stat += d * d / e;
  }
  return stat;
}

inline std::vector<detproc::Site> window1d(int from, int upto_excl) {
  std::vector<detproc::Site> w;
  for (int i = from; i < upto_excl; ++i) w.push_back(detproc::site1(i));
  return w;
}

}  // namespace testutil
