#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace detproc {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kLog2 = 0.69314718055994530941723212145817657;
inline constexpr double kCatalan = 0.91596559417721901505460351493238411;

/// A lattice site in Z^d, d <= 8.
using Site = std::vector<int>;

inline Site site1(int k) { return Site{k}; }
inline Site site2(int k, int l) { return Site{k, l}; }

inline Site operator-(const Site& a, const Site& b) {
  Site r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

struct DetprocError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularEvaluation : DetprocError {
  using DetprocError::DetprocError;
};

struct DegenerateConditioning : DetprocError {
  using DetprocError::DetprocError;
};

/// Pairwise (cascade) summation over a contiguous range. Deterministic for a
/// fixed element order regardless of how callers partition work.
template <typename T>
T pairwise_sum(const T* data, size_t n) {
  if (n <= 8) {
    T s{};
    for (size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  size_t h = n / 2;
  return pairwise_sum(data, h) + pairwise_sum(data + h, n - h);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  return v.empty() ? T{} : pairwise_sum(v.data(), v.size());
}

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace detproc
