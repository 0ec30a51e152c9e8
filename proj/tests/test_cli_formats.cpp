// Round trips for the serialization formats the CLI exposes and for the
// JSON shapes of the report types.

#include "detproc/reproduce.hpp"
#include "test_util.hpp"

using namespace detproc;
using Catch::Approx;
using testutil::window1d;

namespace {
const QuadParams kQuad;
}

TEST_CASE("means and domination JSON shapes", "[formats]") {
  MeansReport m = means(make_named_builtin("ust_axis_g", {}), kQuad);
  json jm = to_json(m);
  CHECK(jm["gm"]["value"].get<double>() == Approx(std::sqrt(2.0) - 1));
  CHECK(jm["hm"]["divergent"].get<bool>());

  json jd = to_json(domination_report(m));
  CHECK(jd["q_full"].get<double>() == Approx((1 + kPi) / (1 + 2 * kPi)));
  for (const char* key : {"p_strong", "q_strong", "p_full", "q_full"})
    CHECK(jd.contains(key));
}

TEST_CASE("entropy interval JSON with the bits flag", "[formats]") {
  EntropyInterval e = refined_bounds(make_named_builtin("sin2", {}), 2, kQuad);
  json nats = to_json(e, "sin2", 1.0, false);
  json bits = to_json(e, "sin2", 1.0, true);
  CHECK(nats["unit"] == "nats");
  CHECK(bits["unit"] == "bits");
  CHECK(bits["lo"].get<double>() == Approx(nats["lo"].get<double>() / kLog2));
  for (const char* key : {"symbol", "method", "m", "lo", "hi", "pruned_mass", "runtime_ms"})
    CHECK(nats.contains(key));
}

TEST_CASE("phase verdict JSON", "[formats]") {
  PhaseVerdict v = phase_verdict(make_named_builtin("sin2", {}), 50, kQuad);
  json j = to_json(v);
  CHECK(j["strong_k"]["verdict"] == "yes");
  CHECK(j["strong_full_k"]["justification"] == "finite-order-zeros-d1");
  CHECK(j["one_sided_plus_mass"].get<double>() == Approx(0.5).margin(1e-6));
}

TEST_CASE("repro rows serialize with comparison kinds", "[formats]") {
  ReproRow row{"x1", "demo", 0.5, 0.5, 1e-9, Cmp::Abs, false, 1.25};
  row.judge();
  CHECK(row.pass);
  json j = to_json(std::vector<ReproRow>{row});
  CHECK(j[0]["comparison"] == "abs");
  CHECK(j[0]["pass"].get<bool>());

  ReproRow le{"x2", "demo", 0.4, 0.5, 0.0, Cmp::Le, false, 0.0};
  le.judge();
  CHECK(le.pass);
  ReproRow ge{"x3", "demo", 0.4, 0.5, 0.0, Cmp::Ge, false, 0.0};
  ge.judge();
  CHECK_FALSE(ge.pass);
}

TEST_CASE("sample batch CSV and sidecar fields", "[formats]") {
  CoeffTable t = fourier_coeffs(make_named_builtin("sin2", {}), 8, kQuad);
  SampleBatch batch = sample_batch(t, window1d(0, 4), 3, 5);
  std::ostringstream csv;
  write_batch_csv(batch, csv);
  std::istringstream in(csv.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "s0,s1,s2,s3");
  size_t rows = 0;
  for (std::string line; std::getline(in, line);) {
    CHECK(line.size() == 7);  // 4 bits + 3 commas
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("byte-identical repeated serialization", "[formats]") {
  MeansReport m = means(make_named_builtin("renewal", {0.5}), kQuad);
  CHECK(to_json(m).dump() == to_json(m).dump());
  EntropyInterval e = refined_bounds(make_named_builtin("renewal", {0.5}), 4, kQuad);
  CHECK(to_json(e, "renewal", 0.0).dump(2) == to_json(e, "renewal", 0.0).dump(2));
}
