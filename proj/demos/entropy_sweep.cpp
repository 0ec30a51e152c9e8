// Shows the certified entropy interval shrinking with the word length, next
// to the simpler bounds, for the sin^2 symbol.

#include <iostream>

#include "detproc/detproc.hpp"

int main() {
  using namespace detproc;
  QuadParams quad;
  SymbolSpec s = make_named_builtin("sin2", {});
  CoeffTable t = fourier_coeffs(s, 14, quad);

  std::cout << "GM lower bound: " << gm_lower_bound(means(s, quad)) << "\n";
  std::cout << "m   refined lo        refined hi        block upper\n";
  std::cout.precision(10);
  for (int m = 2; m <= 12; ++m) {
    EntropyInterval e = refined_bounds(s, m, quad);
    std::cout << m << (m < 10 ? "   " : "  ") << std::fixed << e.lo << "      " << e.hi
              << "      " << block_upper_bound(t, {m}) << "\n";
  }
  return 0;
}
