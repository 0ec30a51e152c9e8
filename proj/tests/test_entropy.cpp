#include "test_util.hpp"

using namespace detproc;
using Catch::Approx;
using testutil::window1d;

namespace {
const QuadParams kQuad;
}

TEST_CASE("binary entropy", "[entropy]") {
  CHECK(binary_entropy(0.5) == Approx(kLog2));
  CHECK(binary_entropy(0.25) == Approx(0.5623).margin(1e-4));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.3) == binary_entropy(0.7));
}

TEST_CASE("GM lower bound", "[entropy]") {
  CHECK(gm_lower_bound(means(make_named_builtin("ust2d", {}), kQuad)) ==
        Approx(0.6203).margin(1e-4));
  CHECK(gm_lower_bound(means(make_named_builtin("ust_axis_g", {}), kQuad)) >= 0.67835);
  CHECK(gm_lower_bound(means(make_named_builtin("const", {0.3}), kQuad)) ==
        Approx(binary_entropy(0.3)));
  CHECK(gm_lower_bound(means(make_named_builtin("half_ind", {}), kQuad)) == 0.0);
}

TEST_CASE("block upper bounds", "[entropy]") {
  SECTION("constant symbol is exact at every length") {
    CoeffTable t = fourier_coeffs(make_named_builtin("const", {0.3}), 10, kQuad);
    for (int m : {1, 3, 6})
      CHECK(block_upper_bound(t, {m}) == Approx(binary_entropy(0.3)).margin(1e-12));
  }
  SECTION("nonincreasing in the block length and above the refined interval") {
    CoeffTable t = fourier_coeffs(make_named_builtin("sin2", {}), 12, kQuad);
    double prev = kLog2 + 1;
    for (int m = 2; m <= 9; ++m) {
      double b = block_upper_bound(t, {m});
      CHECK(b <= prev + 1e-12);
      prev = b;
    }
    EntropyInterval e = refined_bounds(make_named_builtin("sin2", {}), 8, kQuad);
    CHECK(e.lo <= prev);
  }
  SECTION("2-d box caps") {
    QuadParams q2 = QuadParams::for_dim(2);
    CoeffTable t = fourier_coeffs(make_named_builtin("ust2d", {}), std::vector<int>{3, 3}, q2);
    CHECK_THROWS_AS(block_upper_bound(t, {5, 4}), DetprocError);
    double b22 = block_upper_bound(t, {2, 2});
    double b23 = block_upper_bound(t, {2, 3});
    CHECK(b23 <= b22 + 1e-12);
    CHECK(b22 <= kLog2);
  }
}

TEST_CASE("refined bounds", "[entropy]") {
  SECTION("constant symbols collapse to a point") {
    EntropyInterval e = refined_bounds(make_named_builtin("const", {0.3}), 4, kQuad);
    CHECK(e.lo == Approx(binary_entropy(0.3)).margin(1e-12));
    CHECK(e.hi == Approx(binary_entropy(0.3)).margin(1e-12));
  }
  SECTION("the m = 2 decomposition in closed form") {
    EntropyInterval e = refined_bounds(make_named_builtin("sin2", {}), 2, kQuad);
    CHECK(e.lo == Approx(3.0 / 8 * binary_entropy(0.25) + 5.0 / 8 * binary_entropy(11.0 / 28))
                      .margin(1e-12));
    CHECK(e.hi == Approx(3.0 / 8 * binary_entropy(7.0 / 20) + 5.0 / 8 * binary_entropy(5.0 / 12))
                      .margin(1e-12));
  }
  SECTION("intervals nest as the word length grows") {
    for (const char* name : {"sin2", "renewal(0.5)"}) {
      SymbolSpec s = parse_symbol(name, 1);
      double lo = 0, hi = kLog2;
      for (int m = 2; m <= 10; ++m) {
        EntropyInterval e = refined_bounds(s, m, kQuad);
        INFO(name << " m=" << m);
        CHECK(e.lo >= lo - 1e-12);
        CHECK(e.hi <= hi + 1e-12);
        CHECK(e.lo <= e.hi);
        lo = e.lo;
        hi = e.hi;
      }
    }
  }
  SECTION("complement symmetry") {
    for (const char* name : {"sin2half", "renewal(0.5)"}) {
      SymbolSpec s = parse_symbol(name, 1);
      EntropyInterval a = refined_bounds(s, 6, kQuad);
      EntropyInterval b = refined_bounds(complement(s), 6, kQuad);
      INFO(name);
      CHECK(a.lo == Approx(b.lo).margin(1e-10));
      CHECK(a.hi == Approx(b.hi).margin(1e-10));
    }
  }
  SECTION("doubly-degenerate GM yields the uninformative interval") {
    EntropyInterval e = refined_bounds(make_named_builtin("half_ind", {}), 4, kQuad);
    CHECK(e.uninformative);
    CHECK(e.lo == 0.0);
    CHECK(e.hi == Approx(kLog2));
  }
  SECTION("dominates the GM bound once words are long enough") {
    EntropyInterval e = refined_bounds(make_named_builtin("sin2", {}), 6, kQuad);
    CHECK(e.lo > gm_lower_bound(means(make_named_builtin("sin2", {}), kQuad)));
  }
}

TEST_CASE("renewal entropy series", "[entropy]") {
  SECTION("degenerate limit") {
    // the conditional is (1-a)^2 a.s. as a -> 0, so H -> 0 through H[(1-a)^2]
    CHECK(renewal_entropy(0.01) == Approx(0.0973).margin(5e-4));
    CHECK(renewal_entropy(0.001) < 0.06);
    CHECK(renewal_entropy(0.001) < renewal_entropy(0.01));
  }
  SECTION("agrees with the refined interval at a = 1/2") {
    double exact = renewal_entropy(0.5);
    CHECK(exact == Approx(0.6264823005).margin(1e-9));
    EntropyInterval e = refined_bounds(make_named_builtin("renewal", {0.5}), 14, kQuad);
    CHECK(exact >= e.lo - 1e-12);
    CHECK(exact <= e.hi + 1e-12);
  }
  SECTION("agrees with the conditional block trend") {
    CoeffTable t = fourier_coeffs(make_named_builtin("renewal", {0.5}), 18, kQuad);
    CHECK(block_upper_bound(t, {16}) == Approx(renewal_entropy(0.5)).margin(1e-3));
  }
  SECTION("parameter validation") {
    CHECK_THROWS_AS(renewal_entropy(0.0), DetprocError);
    CHECK_THROWS_AS(renewal_entropy(1.0), DetprocError);
  }
}

TEST_CASE("perturbation transfer", "[entropy]") {
  SymbolSpec f = make_named_builtin("sin2", {});
  SECTION("identical symbols change nothing") {
    EntropyInterval e = refined_bounds(f, 4, kQuad);
    EntropyInterval tr = perturbation_transfer(e, f, f, kQuad);
    CHECK(tr.lo == Approx(e.lo).margin(1e-12));
    CHECK(tr.hi == Approx(e.hi).margin(1e-12));
  }
  SECTION("the indicator pipeline at m = 3") {
    SymbolSpec ftilde = parse_symbol("0.98*arc(0,0.5)+0.01", 1);
    SymbolSpec arc = make_named_builtin("half_ind", {});
    EntropyInterval e = refined_bounds(ftilde, 3, kQuad);
    CHECK(e.lo >= 0.4105);
    EntropyInterval tr = perturbation_transfer(e, arc, ftilde, kQuad);
    CHECK(tr.lo > 0.3544);
    CHECK(tr.lo > 0.5 * kLog2);
  }
  SECTION("precondition") {
    SymbolSpec a = make_named_builtin("const", {0.1});
    SymbolSpec b = make_named_builtin("const", {0.9});
    EntropyInterval e;
    CHECK_THROWS_AS(perturbation_transfer(e, a, b, kQuad), DetprocError);
  }
}

TEST_CASE("sandwich entropy bounds", "[entropy]") {
  auto [a_half, b_half] = hoffman_bounds(0.5);
  CHECK(a_half == Approx(0.5 * kLog2));
  CHECK(b_half == Approx(kLog2));
  // at p = 1/4 only the first bound is positive (direct evaluation gives
  // b = 2(3/4)log(4/3) - log 2 = -0.2616); the guarantee is on the max
  auto [a_q, b_q] = hoffman_bounds(0.25);
  CHECK(a_q > 0);
  CHECK(b_q == Approx(1.5 * std::log(4.0 / 3) - kLog2));
  CHECK(std::max(a_q, b_q) > 0);
  for (double p : {0.05, 0.15, 0.25, 0.35, 0.45}) {
    auto [ap, bp] = hoffman_bounds(p);
    INFO(p);
    CHECK(std::max(ap, bp) > 0);
  }
  double prev = -10;
  for (double p : {0.3, 0.35, 0.4, 0.45, 0.5}) {
    double b = hoffman_bounds(p).second;
    CHECK(b > prev);
    prev = b;
  }
  CHECK(prev == Approx(kLog2));
  CHECK_THROWS_AS(hoffman_bounds(0.0), DetprocError);
  CHECK_THROWS_AS(hoffman_bounds(0.6), DetprocError);
}

TEST_CASE("argument scaling preserves block entropies", "[entropy]") {
  SymbolSpec s = make_named_builtin("sin2", {});
  SymbolSpec m3 = mult_arg(s, 3);
  CoeffTable ts = fourier_coeffs(s, 6, kQuad);
  CoeffTable tm = fourier_coeffs(m3, 18, kQuad);
  // windows {0, 3, 6} of M_3 f match windows {0, 1, 2} of f
  Pmf base = joint_pmf(ts, window1d(0, 3));
  Pmf scaled = joint_pmf(tm, {site1(0), site1(3), site1(6)});
  for (uint32_t pat = 0; pat < 8; ++pat)
    CHECK(scaled.p[pat] == Approx(base.p[pat]).margin(1e-12));
  CHECK(pmf_entropy(scaled) == Approx(pmf_entropy(base)).margin(1e-12));
}
