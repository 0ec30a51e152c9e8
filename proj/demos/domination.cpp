// Prints the optimal product-measure sandwich for a few symbols: the lower
// density any conditional probability can reach (GM/HM of f) and the upper
// one (1 - GM/HM of 1-f).

#include <iostream>

#include "detproc/detproc.hpp"

int main() {
  using namespace detproc;
  QuadParams quad;
  for (const char* name : {"sin2", "ust_axis_g", "zigzag", "renewal(0.5)", "half_ind"}) {
    SymbolSpec s = parse_symbol(name, 1);
    DominationReport r = domination_report(means(s, quad));
    std::cout << name << ":\n"
              << "  strong sandwich  mu_" << r.p_strong << "  <=  P^f  <=  mu_" << r.q_strong
              << "\n"
              << "  full sandwich    mu_" << r.p_full << "  <=  P^f  <=  mu_" << r.q_full
              << "\n";
  }
  SymbolSpec f = make_named_builtin("ust2d", {});
  DominationReport r = domination_report(means(f, QuadParams::for_dim(2)));
  std::cout << "ust2d:\n  strong sandwich  mu_" << r.p_strong << "  <=  P^f  <=  mu_"
            << r.q_strong << "\n";
  return 0;
}
