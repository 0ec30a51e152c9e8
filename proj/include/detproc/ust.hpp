#pragma once

#include "detproc/sampling.hpp"

namespace detproc {

/**
 * A spanning tree of the n x n torus grid. Edges are identified by their
 * lower endpoint and a direction: (site, Right) joins (i,j)-(i+1,j),
 * (site, Up) joins (i,j)-(i,j+1), coordinates mod n.
 */
struct TorusTree {
  int n = 0;
  std::vector<uint8_t> right;  // n*n flags: edge (i,j)-(i+1,j) present
  std::vector<uint8_t> up;     // n*n flags: edge (i,j)-(i,j+1) present

  size_t idx(int i, int j) const {
    i %= n; if (i < 0) i += n;
    j %= n; if (j < 0) j += n;
    return size_t(j) * size_t(n) + size_t(i);
  }
  bool has_right(int i, int j) const { return right[idx(i, j)]; }
  bool has_up(int i, int j) const { return up[idx(i, j)]; }

  size_t edge_count() const {
    size_t c = 0;
    for (uint8_t v : right) c += v;
    for (uint8_t v : up) c += v;
    return c;
  }

  bool connected() const {
    const int N = n * n;
    std::vector<int> stack{0};
    std::vector<uint8_t> seen(size_t(N), 0);
    seen[0] = 1;
    int visited = 1;
    auto visit = [&](int v) {
      if (!seen[size_t(v)]) {
        seen[size_t(v)] = 1;
        ++visited;
        stack.push_back(v);
      }
    };
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      int i = v % n, j = v / n;
      if (has_right(i, j)) visit(int(idx(i + 1, j)));
      if (has_right(i - 1, j)) visit(int(idx(i - 1, j)));
      if (has_up(i, j)) visit(int(idx(i, j + 1)));
      if (has_up(i, j - 1)) visit(int(idx(i, j - 1)));
    }
    return visited == N;
  }
};

/**
 * Exact uniform spanning tree of the n x n torus by loop-erased random walks:
 * from each unvisited vertex, walk until the growing tree is hit, keeping
 * only the last exit direction of every vertex; the retraced path is the
 * loop-erasure. Deterministic given (seed, stream).
 */
inline TorusTree wilson_ust(int n, uint64_t seed, uint64_t stream = 0) {
  if (n < 2 || n > 256) throw DetprocError("wilson_ust: n must lie in 2..256");
  const int N = n * n;
  CounterRng rng(seed, stream);
  std::vector<uint8_t> in_tree(size_t(N), 0);
  std::vector<int8_t> exit_dir(size_t(N), -1);  // 0:+x 1:-x 2:+y 3:-y

  TorusTree tree;
  tree.n = n;
  tree.right.assign(size_t(N), 0);
  tree.up.assign(size_t(N), 0);

  auto step = [&](int v, int dir) {
    int i = v % n, j = v / n;
    switch (dir) {
      case 0: i = (i + 1) % n; break;
      case 1: i = (i + n - 1) % n; break;
      case 2: j = (j + 1) % n; break;
      default: j = (j + n - 1) % n; break;
    }
    return j * n + i;
  };

  int root = int(rng.next_below(uint64_t(N)));
  in_tree[size_t(root)] = 1;

  for (int start = 0; start < N; ++start) {
    if (in_tree[size_t(start)]) continue;
    int v = start;
    while (!in_tree[size_t(v)]) {
      int dir = int(rng.next_below(4));
      exit_dir[size_t(v)] = int8_t(dir);
      v = step(v, dir);
    }
    // retrace from start along exit directions: the loop-erased path
    v = start;
    while (!in_tree[size_t(v)]) {
      in_tree[size_t(v)] = 1;
      int dir = exit_dir[size_t(v)];
      int i = v % n, j = v / n;
      switch (dir) {
        case 0: tree.right[tree.idx(i, j)] = 1; break;
        case 1: tree.right[tree.idx(i - 1, j)] = 1; break;
        case 2: tree.up[tree.idx(i, j)] = 1; break;
        default: tree.up[tree.idx(i, j - 1)] = 1; break;
      }
      v = step(v, dir);
    }
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Edge-process extractors
// ---------------------------------------------------------------------------

enum class EdgeLine { HorizontalField, XAxis, Diagonal, Zigzag };

/**
 * Indicator process read off a tree:
 *  - HorizontalField: all n^2 right-edge indicators (row-major);
 *  - XAxis: right-edges along the x-axis, eta(i) = [(i,0)-(i+1,0) in tree];
 *  - Diagonal: right-edges with left endpoints (i,i);
 *  - Zigzag: alternating right/up edges along the staircase path,
 *    eta(2t) = [(t,t)-(t+1,t)], eta(2t+1) = [(t+1,t)-(t+1,t+1)], t < n.
 */
inline std::vector<uint8_t> edge_process(const TorusTree& t, EdgeLine line) {
  const int n = t.n;
  std::vector<uint8_t> out;
  switch (line) {
    case EdgeLine::HorizontalField:
      out = t.right;
      break;
    case EdgeLine::XAxis:
      out.resize(size_t(n));
      for (int i = 0; i < n; ++i) out[size_t(i)] = t.has_right(i, 0);
      break;
    case EdgeLine::Diagonal:
      out.resize(size_t(n));
      for (int i = 0; i < n; ++i) out[size_t(i)] = t.has_right(i, i);
      break;
    case EdgeLine::Zigzag:
      out.resize(size_t(2 * n));
      for (int tt = 0; tt < n; ++tt) {
        out[size_t(2 * tt)] = t.has_right(tt, tt);
        out[size_t(2 * tt + 1)] = t.has_up(tt + 1, tt);
      }
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison against symbol predictions
// ---------------------------------------------------------------------------

struct LineStats {
  double mean = 0;
  double mean_se = 0;
  std::vector<double> lag_cov;     // covariance at lags 1..L
  std::vector<double> lag_cov_se;  // between-sample standard errors
  size_t samples = 0;
};

/// Mean and small-lag covariances of a stationary line process, averaged
/// within lines and across samples; standard errors are between-sample.
inline LineStats line_statistics(const std::vector<std::vector<uint8_t>>& lines, int max_lag) {
  const size_t ns = lines.size();
  const size_t len = lines.at(0).size();
  LineStats st;
  st.samples = ns;
  std::vector<double> means(ns);
  std::vector<std::vector<double>> prods(size_t(max_lag), std::vector<double>(ns, 0.0));
  for (size_t s = 0; s < ns; ++s) {
    const auto& v = lines[s];
    double m = 0;
    for (uint8_t b : v) m += b;
    means[s] = m / double(len);
    for (int lag = 1; lag <= max_lag; ++lag) {
      double pp = 0;
      for (size_t i = 0; i < len; ++i) pp += double(v[i]) * double(v[(i + size_t(lag)) % len]);
      prods[size_t(lag - 1)][s] = pp / double(len);
    }
  }
  double mbar = pairwise_sum(means) / double(ns);
  st.mean = mbar;
  double mvar = 0;
  for (double m : means) mvar += (m - mbar) * (m - mbar);
  st.mean_se = std::sqrt(mvar / double(ns) / double(ns - 1));
  for (int lag = 1; lag <= max_lag; ++lag) {
    const auto& pr = prods[size_t(lag - 1)];
    double pbar = pairwise_sum(pr) / double(ns);
    double cov = pbar - mbar * mbar;
    // between-sample scatter of the per-sample product average
    double pvar = 0;
    for (double p : pr) pvar += (p - pbar) * (p - pbar);
    st.lag_cov.push_back(cov);
    st.lag_cov_se.push_back(std::sqrt(pvar / double(ns) / double(ns - 1)));
  }
  return st;
}

struct ComparisonRow {
  Site lag;
  double empirical = 0;
  double stderr_emp = 0;
  double predicted = 0;  // -|f-hat(lag)|^2
  double finite_size_allowance = 0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  bool all_within(double nsigma) const {
    for (const ComparisonRow& r : rows)
      if (std::fabs(r.empirical - r.predicted) >
          nsigma * r.stderr_emp + r.finite_size_allowance)
        return false;
    return true;
  }
};

/// Empirical lag covariances of a line process against the prediction
/// -|f-hat(k)|^2, with an O(1/n) finite-size allowance folded in.
inline ComparisonReport compare_to_symbol(const LineStats& st, const CoeffTable& table,
                                          const std::vector<int>& lags,
                                          double finite_size_allowance) {
  ComparisonReport rep;
  for (int lag : lags) {
    ComparisonRow row;
    row.lag = Site{lag};
    row.empirical = st.lag_cov.at(size_t(lag - 1));
    row.stderr_emp = st.lag_cov_se.at(size_t(lag - 1));
    row.predicted = -std::norm(table.at1(lag));
    row.finite_size_allowance = finite_size_allowance;
    rep.rows.push_back(row);
  }
  return rep;
}

inline void write_tree_csv(const TorusTree& t, std::ostream& out) {
  out << "i,j,direction\n";
  for (int j = 0; j < t.n; ++j)
    for (int i = 0; i < t.n; ++i) {
      if (t.has_right(i, j)) out << i << ',' << j << ",right\n";
      if (t.has_up(i, j)) out << i << ',' << j << ",up\n";
    }
}

}  // namespace detproc
