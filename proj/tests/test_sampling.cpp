#include "test_util.hpp"

using namespace detproc;
using Catch::Approx;
using testutil::window1d;

namespace {
const QuadParams kQuad;

CoeffTable table_of(const char* name, int kmax = 12) {
  return fourier_coeffs(parse_symbol(name, 1), kmax, kQuad);
}
}  // namespace

TEST_CASE("seeded reproducibility", "[sampling]") {
  CoeffTable t = table_of("sin2");
  SampleBatch a = sample_batch(t, window1d(0, 8), 200, 99);
  SampleBatch b = sample_batch(t, window1d(0, 8), 200, 99);
  CHECK(a.patterns == b.patterns);
  SampleBatch c = sample_batch(t, window1d(0, 8), 200, 100);
  CHECK(a.patterns != c.patterns);
  // the counter generator is stateless across indices: prefix batches agree
  SampleBatch d = sample_batch(t, window1d(0, 8), 50, 99);
  for (size_t i = 0; i < 50; ++i) CHECK(d.patterns[i] == a.patterns[i]);
}

TEST_CASE("incremental sampler agrees with the full-determinant reference", "[sampling]") {
  for (const char* name : {"sin2", "renewal(0.5)", "arc(0,0.5)", "zigzag"}) {
    CoeffTable t = table_of(name, 14);
    std::vector<Site> w = window1d(0, 12);
    for (uint64_t stream = 0; stream < 500; ++stream) {
      Pattern inc = sample_window(t, w, 4242, stream, false);
      Pattern ref = sample_window(t, w, 4242, stream, true);
      INFO(name << " stream " << stream);
      REQUIRE(inc.bits == ref.bits);
    }
  }
}

TEST_CASE("i.i.d. sampling passes chi-square", "[sampling]") {
  CoeffTable t = table_of("const(0.35)");
  std::vector<Site> w = window1d(0, 8);
  SampleBatch batch = sample_batch(t, w, 100'000, 7);
  std::vector<size_t> counts(256, 0);
  for (const auto& pat : batch.patterns) {
    uint32_t key = 0;
    for (size_t j = 0; j < 8; ++j)
      if (pat[j]) key |= uint32_t(1) << j;
    ++counts[key];
  }
  std::vector<double> probs(256);
  for (uint32_t pat = 0; pat < 256; ++pat) {
    double p = 1;
    for (int j = 0; j < 8; ++j) p *= (pat >> j & 1) ? 0.35 : 0.65;
    probs[pat] = p;
  }
  double stat = testutil::chi2_stat(counts, probs, batch.patterns.size());
  CHECK(stat < testutil::chi2_quantile(255, 1 - 1e-3));
}

TEST_CASE("even lags of sin2 sample as fair coins", "[sampling]") {
  CoeffTable t = table_of("sin2", 16);
  std::vector<Site> w;
  for (int i = 0; i <= 14; i += 2) w.push_back(site1(i));
  SampleBatch batch = sample_batch(t, w, 100'000, 11);
  std::vector<size_t> counts(256, 0);
  for (const auto& pat : batch.patterns) {
    uint32_t key = 0;
    for (size_t j = 0; j < 8; ++j)
      if (pat[j]) key |= uint32_t(1) << j;
    ++counts[key];
  }
  std::vector<double> probs(256, 1.0 / 256);
  double stat = testutil::chi2_stat(counts, probs, batch.patterns.size());
  CHECK(stat < testutil::chi2_quantile(255, 1 - 1e-3));
}

TEST_CASE("empirical pmf approaches the exact pmf", "[sampling]") {
  // E[TV] at 1e5 samples on an 8-site window is ~0.018 for these symbols;
  // 0.03 catches real sampler defects while staying above the noise floor.
  for (const char* name : {"sin2", "renewal(0.5)"}) {
    CoeffTable t = table_of(name);
    std::vector<Site> w = window1d(0, 8);
    SampleBatch batch = sample_batch(t, w, 100'000, 13);
    double tv = empirical_tv(batch, joint_pmf(t, w));
    INFO(name << " tv = " << tv);
    CHECK(tv < 0.03);
    CHECK(tv > 0.005);  // sanity: genuinely empirical
  }
}

TEST_CASE("cylinder frequencies within four standard errors", "[sampling]") {
  for (const char* name : {"sin2", "renewal(0.5)", "arc(0,0.5)"}) {
    CoeffTable t = table_of(name);
    std::vector<Site> w = window1d(0, 6);
    SampleBatch batch = sample_batch(t, w, 100'000, 17);
    const double n = double(batch.patterns.size());
    // all cylinders on up to 3 of the first positions
    for (uint32_t sites = 1; sites < 8; ++sites) {
      std::vector<int> idx;
      for (int i = 0; i < 3; ++i)
        if (sites >> i & 1) idx.push_back(i);
      const uint32_t npat = uint32_t(1) << idx.size();
      for (uint32_t assign = 0; assign < npat; ++assign) {
        CylinderEvent ev;
        for (size_t i = 0; i < idx.size(); ++i)
          (assign >> i & 1 ? ev.ones : ev.zeros).push_back(site1(idx[i]));
        double exact = prob_cylinder(t, ev);
        size_t count = 0;
        for (const auto& pat : batch.patterns) {
          bool match = true;
          for (size_t i = 0; i < idx.size() && match; ++i)
            match = pat[size_t(idx[i])] == ((assign >> i) & 1);
          count += match;
        }
        double se = std::sqrt(std::max(exact * (1 - exact), 1e-12) / n);
        INFO(name << " sites " << sites << " assign " << assign);
        CHECK(std::fabs(double(count) / n - exact) < 4 * se + 1e-9);
      }
    }
  }
}

TEST_CASE("thinning", "[sampling]") {
  CoeffTable t = table_of("sin2");
  std::vector<Site> w = window1d(0, 6);
  SampleBatch batch = sample_batch(t, w, 100'000, 19);

  SECTION("identity and annihilation") {
    SampleBatch same = thin(batch, 1.0, 3);
    CHECK(same.patterns == batch.patterns);
    SampleBatch zero = thin(batch, 0.0, 3);
    for (const auto& pat : zero.patterns)
      for (uint8_t b : pat) CHECK(b == 0);
  }
  SECTION("thinned samples follow the scaled symbol") {
    const double p = 0.7;
    SampleBatch thinned = thin(batch, p, 23);
    CoeffTable scaled = t;
    for (cplx& e : scaled.entries) e *= p;
    double tv = empirical_tv(thinned, joint_pmf(scaled, w));
    CHECK(tv < 0.015);
  }
}

TEST_CASE("visit order does not change the sampled law", "[sampling]") {
  CoeffTable t = table_of("renewal(0.5)");
  std::vector<Site> w = window1d(0, 6);

  detail::SequentialSampler forward(t, w);
  std::vector<Site> rev(w.rbegin(), w.rend());
  detail::SequentialSampler backward(t, rev);

  const size_t n = 400'000;
  std::vector<double> emp_f(64, 0.0), emp_b(64, 0.0);
  for (size_t i = 0; i < n; ++i) {
    CounterRng r1(31, i), r2(37, i);
    auto bits_f = forward.draw(r1);
    auto bits_b = backward.draw(r2);
    uint32_t kf = 0, kb = 0;
    for (int j = 0; j < 6; ++j) {
      if (bits_f[size_t(j)]) kf |= 1u << j;
      if (bits_b[size_t(j)]) kb |= 1u << (5 - j);  // map back to site order
    }
    emp_f[kf] += 1;
    emp_b[kb] += 1;
  }
  double tv = 0;
  for (int i = 0; i < 64; ++i) tv += std::fabs(emp_f[i] - emp_b[i]) / double(n);
  CHECK(tv / 2 < 0.01);
}

TEST_CASE("empirical statistics", "[sampling]") {
  SECTION("frequencies and covariances") {
    CoeffTable t = table_of("const(0.5)");
    SampleBatch batch = sample_batch(t, window1d(0, 4), 100'000, 29);
    EmpiricalStats st = empirical_stats(batch, {site1(1)});
    for (double f : st.site_frequency)
      CHECK(f == Approx(0.5).margin(3 * std::sqrt(0.25 / 1e5) + 1e-9));
    CHECK(st.covariances[0].covariance ==
          Approx(0.0).margin(4 * st.covariances[0].stderr_jackknife + 1e-4));
  }
  SECTION("sin2 lag-1 covariance is -1/16") {
    CoeffTable t = table_of("sin2");
    SampleBatch batch = sample_batch(t, window1d(0, 8), 100'000, 31);
    EmpiricalStats st = empirical_stats(batch, {site1(1), site1(2)});
    CHECK(st.covariances[0].covariance ==
          Approx(-1.0 / 16).margin(4 * st.covariances[0].stderr_jackknife));
    CHECK(st.covariances[1].covariance ==
          Approx(0.0).margin(4 * st.covariances[1].stderr_jackknife));
  }
  SECTION("renewal lag-2 covariance is -1/144") {
    CoeffTable t = table_of("renewal(0.5)");
    SampleBatch batch = sample_batch(t, window1d(0, 8), 100'000, 37);
    EmpiricalStats st = empirical_stats(batch, {site1(2)});
    CHECK(st.covariances[0].covariance ==
          Approx(-1.0 / 144).margin(4 * st.covariances[0].stderr_jackknife));
  }
  SECTION("empty batch is an error") {
    SampleBatch empty;
    empty.window = window1d(0, 2);
    CHECK_THROWS_AS(empirical_stats(empty), DetprocError);
  }
}

TEST_CASE("batch CSV export", "[sampling]") {
  CoeffTable t = table_of("const(1)");
  SampleBatch batch = sample_batch(t, window1d(0, 3), 2, 1);
  std::ostringstream out;
  write_batch_csv(batch, out);
  CHECK(out.str() == "s0,s1,s2\n1,1,1\n1,1,1\n");
}
