// detproc: stationary determinantal processes on Z^d from torus symbols.
// Computes coefficient tables, cylinder probabilities, exact samples,
// domination constants, certified entropy bounds, phase verdicts, and the
// spanning-tree Monte Carlo cross-checks.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "detproc/detproc.hpp"
#include "detproc/reproduce.hpp"

namespace {

using namespace detproc;

struct GlobalArgs {
  std::string symbol;
  std::string config;
  int dim = 0;
  int kmax = 12;
  double quad_tol = 0;
  uint64_t seed = 20240915;
  std::string format = "json";
  std::string cache_dir;
  bool bits = false;
};

SymbolSpec resolve_symbol(const GlobalArgs& g) {
  if (!g.config.empty()) return load_symbol_config_file(g.config);
  if (g.symbol.empty()) throw DetprocError("no symbol given (use --symbol or --config)");
  int dim = g.dim;
  if (dim == 0) {
    // try 1..4 until the expression parses (builtins know their dimension)
    for (int d = 1; d <= 8; ++d) {
      try {
        return parse_symbol(g.symbol, d);
      } catch (const ParseError&) {
        if (d == 8) throw;
      }
    }
  }
  return parse_symbol(g.symbol, dim);
}

QuadParams quad_for(const SymbolSpec& s, const GlobalArgs& g) {
  QuadParams q = QuadParams::for_dim(s.dim);
  if (g.quad_tol > 0) q.tol = g.quad_tol;
  q.mc_seed = g.seed;
  return q;
}

std::vector<Site> parse_sites(const std::string& text, int dim) {
  // "0;1;2" (d=1) or "0,0;1,0;2,1" (d>=2)
  std::vector<Site> out;
  std::istringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    Site s;
    std::istringstream ps(part);
    std::string coord;
    while (std::getline(ps, coord, ',')) s.push_back(std::stoi(coord));
    if (int(s.size()) != dim)
      throw DetprocError("site '" + part + "' has wrong dimension");
    out.push_back(std::move(s));
  }
  return out;
}

void emit(const json& j, const GlobalArgs& g) {
  if (g.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    // text: flat key: value lines
    std::function<void(const json&, std::string)> walk = [&](const json& v, std::string prefix) {
      if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it)
          walk(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
      } else if (v.is_array()) {
        int i = 0;
        for (const auto& e : v) walk(e, prefix + "[" + std::to_string(i++) + "]");
      } else {
        std::cout << prefix << ": " << v.dump() << "\n";
      }
    };
    walk(j, "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary determinantal processes from torus symbols"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--symbol", g.symbol, "symbol expression or builtin name")->envname("DETPROC_SYMBOL");
  app.add_option("--config", g.config, "symbol config file (key = value)");
  app.add_option("--dim", g.dim, "dimension d (default: inferred)");
  app.add_option("--kmax", g.kmax, "coefficient table radius");
  app.add_option("--quad-tol", g.quad_tol, "quadrature refinement tolerance");
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--format", g.format, "output format: json|csv|text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--cache-dir", g.cache_dir, "coefficient cache directory")
      ->envname("DETPROC_CACHE_DIR");
  app.add_flag("--bits", g.bits, "report entropies in bits instead of nats");

  // --- coeffs ---
  auto* c_coeffs = app.add_subcommand("coeffs", "Fourier coefficient table of a symbol");

  // --- prob ---
  auto* c_prob = app.add_subcommand("prob", "cylinder event probability");
  std::string ones_text, zeros_text;
  c_prob->add_option("--ones", ones_text, "sites required to be 1, e.g. '0;1' or '0,0;1,1'");
  c_prob->add_option("--zeros", zeros_text, "sites required to be 0");

  // --- pmf ---
  auto* c_pmf = app.add_subcommand("pmf", "full distribution over a finite window");
  std::string window_text;
  c_pmf->add_option("--window", window_text, "window sites, e.g. '0;1;2;3'")->required();

  // --- sample ---
  auto* c_sample = app.add_subcommand("sample", "exact samples over a window");
  std::string sample_window_text, out_path;
  size_t n_samples = 1;
  c_sample->add_option("--window", sample_window_text, "window sites")->required();
  c_sample->add_option("--samples", n_samples, "number of samples");
  c_sample->add_option("--out", out_path, "CSV output path (JSON sidecar alongside)");

  // --- means ---
  auto* c_means = app.add_subcommand("means", "arithmetic/geometric/harmonic means");
  bool force_numeric = false;
  c_means->add_flag("--numeric", force_numeric, "force the quadrature path");

  // --- dominate ---
  auto* c_dom = app.add_subcommand("dominate", "optimal product-measure sandwich constants");

  // --- entropy ---
  auto* c_ent = app.add_subcommand("entropy", "entropy bounds");
  std::string method = "refined";
  int depth = 8;
  std::string reference;
  double renewal_a = 0.5;
  std::string box_text;
  c_ent->add_option("--method", method, "block|refined|gm|renewal|perturb")
      ->check(CLI::IsMember({"block", "refined", "gm", "renewal", "perturb"}));
  c_ent->add_option("--m", depth, "word length / block length");
  c_ent->add_option("--box", box_text, "2-d block, e.g. '4,4'");
  c_ent->add_option("--reference", reference, "reference symbol for --method perturb");
  c_ent->add_option("--a", renewal_a, "renewal parameter for --method renewal");

  // --- phase ---
  auto* c_phase = app.add_subcommand("phase", "strong K / strong full K verdicts");
  int mass_terms = 200;
  c_phase->add_option("--n-mass", mass_terms, "one-sided mass partial-sum length");

  // --- regen ---
  auto* c_regen = app.add_subcommand("regen", "regeneration test and renewal checks");
  int run_length = 1, halo = 3;
  bool with_renewal_checks = false;
  double check_a = 0.5;
  c_regen->add_option("--run", run_length, "length of the conditioning run of 1s");
  c_regen->add_option("--halo", halo, "past/future pattern length (<= 6)");
  c_regen->add_flag("--renewal-checks", with_renewal_checks, "also verify renewal identities");
  c_regen->add_option("--a", check_a, "renewal parameter for --renewal-checks");

  // --- ust ---
  auto* c_ust = app.add_subcommand("ust", "uniform spanning tree oracle");
  int ust_n = 64;
  size_t ust_samples = 1000;
  std::string extractor = "xaxis";
  int max_lag = 3;
  std::string tree_out;
  c_ust->add_option("--n", ust_n, "torus side length");
  c_ust->add_option("--samples", ust_samples, "number of trees");
  c_ust->add_option("--extractor", extractor, "horizontal|xaxis|diagonal|zigzag")
      ->check(CLI::IsMember({"horizontal", "xaxis", "diagonal", "zigzag"}));
  c_ust->add_option("--lags", max_lag, "covariance lags to report");
  c_ust->add_option("--tree-out", tree_out, "write one tree as edge-list CSV and exit");

  // --- reproduce ---
  auto* c_repro = app.add_subcommand("reproduce", "run the published-value reproduction table");
  bool fast = false;
  c_repro->add_flag("--fast", fast, "skip the minutes-scale rows");

  // global flags may appear after the subcommand name
  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    auto cache = resolve_cache_dir(g.cache_dir);

    if (c_coeffs->parsed()) {
      SymbolSpec s = resolve_symbol(g);
      QuadParams q = quad_for(s, g);
      CoeffTable t = fourier_coeffs_cached(s, std::vector<int>(size_t(s.dim), g.kmax), q, cache);
      if (g.format == "csv") {
        std::cout << "k,re,im\n" << std::setprecision(17);
        for (const Site& k : t.all_sites()) {
          for (size_t j = 0; j < k.size(); ++j) std::cout << (j ? " " : "") << k[j];
          std::cout << ',' << t.at(k).real() << ',' << t.at(k).imag() << "\n";
        }
      } else {
        json entries = json::array();
        for (const Site& k : t.all_sites())
          entries.push_back(json{{"k", k}, {"re", t.at(k).real()}, {"im", t.at(k).imag()}});
        emit(json{{"symbol", display_name(s)},
                  {"kmax", t.kmax},
                  {"provenance", t.provenance},
                  {"err", t.err},
                  {"entries", entries}},
             g);
      }
    } else if (c_prob->parsed()) {
      SymbolSpec s = resolve_symbol(g);
      QuadParams q = quad_for(s, g);
      CoeffTable t = fourier_coeffs_cached(s, std::vector<int>(size_t(s.dim), g.kmax), q, cache);
      CylinderEvent ev{parse_sites(ones_text, s.dim), parse_sites(zeros_text, s.dim)};
      emit(json{{"probability", prob_cylinder(t, ev)}}, g);
    } else if (c_pmf->parsed()) {
      SymbolSpec s = resolve_symbol(g);
      QuadParams q = quad_for(s, g);
      CoeffTable t = fourier_coeffs_cached(s, std::vector<int>(size_t(s.dim), g.kmax), q, cache);
      Pmf pm = joint_pmf(t, parse_sites(window_text, s.dim));
      if (g.format == "csv")
        write_pmf_csv(pm, std::cout);
      else
        emit(to_json(pm), g);
    } else if (c_sample->parsed()) {
      SymbolSpec s = resolve_symbol(g);
      QuadParams q = quad_for(s, g);
      CoeffTable t = fourier_coeffs_cached(s, std::vector<int>(size_t(s.dim), g.kmax), q, cache);
      SampleBatch batch = sample_batch(t, parse_sites(sample_window_text, s.dim), n_samples, g.seed);
      json sidecar{{"symbol", display_name(s)},
                   {"seed", g.seed},
                   {"samples", n_samples},
                   {"window", batch.window}};
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        write_batch_csv(batch, out);
        std::ofstream side(out_path + ".json");
        side << sidecar.dump(2) << "\n";
        emit(json{{"written", out_path}}, g);
      } else if (g.format == "csv") {
        write_batch_csv(batch, std::cout);
      } else {
        json pats = json::array();
        for (const auto& p : batch.patterns) {
          std::string bits(p.size(), '0');
          for (size_t i = 0; i < p.size(); ++i)
            if (p[i]) bits[i] = '1';
          pats.push_back(bits);
        }
        sidecar["patterns"] = pats;
        emit(sidecar, g);
      }
    } else if (c_means->parsed()) {
      SymbolSpec s = resolve_symbol(g);
      QuadParams q = quad_for(s, g);
      MeansReport m = force_numeric ? means_numeric(s, q) : means(s, q);
      emit(to_json(m), g);
    } else if (c_dom->parsed()) {
      SymbolSpec s = resolve_symbol(g);
      QuadParams q = quad_for(s, g);
      emit(to_json(domination_report(means(s, q))), g);
    } else if (c_ent->parsed()) {
      SymbolSpec s{};
      QuadParams q;
      detail::RowTimer timer;
      EntropyInterval e;
      std::string label;
      if (method == "renewal") {
        e.lo = e.hi = renewal_entropy(renewal_a);
        e.method = "renewal-exact";
        std::ostringstream lab;
        lab << "renewal(" << renewal_a << ")";
        label = lab.str();
      } else {
        s = resolve_symbol(g);
        q = quad_for(s, g);
        label = display_name(s);
        if (method == "refined") {
          e = refined_bounds(s, depth, q);
        } else if (method == "gm") {
          e.lo = gm_lower_bound(means(s, q));
          e.hi = kLog2;
          e.method = "gm-lower";
        } else if (method == "block") {
          std::vector<int> box;
          if (!box_text.empty()) {
            std::istringstream ss(box_text);
            std::string p;
            while (std::getline(ss, p, ',')) box.push_back(std::stoi(p));
          } else {
            box = {depth};
          }
          CoeffTable t = fourier_coeffs_cached(
              s, std::vector<int>(size_t(s.dim), std::max(g.kmax, box[0] + 1)), q, cache);
          e.lo = 0;
          e.hi = block_upper_bound(t, box);
          e.method = "block";
          e.depth = box[0];
        } else {  // perturb
          if (reference.empty()) throw DetprocError("--method perturb needs --reference");
          SymbolSpec ref = parse_symbol(reference, s.dim);
          EntropyInterval base = refined_bounds(ref, depth, q);
          e = perturbation_transfer(base, s, ref, q);
        }
      }
      emit(to_json(e, label, timer.ms(), g.bits), g);
    } else if (c_phase->parsed()) {
      SymbolSpec s = resolve_symbol(g);
      QuadParams q = quad_for(s, g);
      emit(to_json(phase_verdict(s, mass_terms, q)), g);
    } else if (c_regen->parsed()) {
      json out = json::object();
      if (with_renewal_checks) {
        QuadParams q;
        out["renewal_checks"] = to_json(renewal_checks(check_a, q));
      }
      if (!g.symbol.empty() || !g.config.empty()) {
        SymbolSpec s = resolve_symbol(g);
        QuadParams q = quad_for(s, g);
        CoeffTable t = fourier_coeffs_cached(
            s, std::vector<int>(size_t(s.dim), std::max(g.kmax, run_length + 2 * halo + 1)), q,
            cache);
        out["regeneration"] = to_json(regeneration_test(t, run_length, halo));
      }
      emit(out, g);
    } else if (c_ust->parsed()) {
      if (!tree_out.empty()) {
        TorusTree tree = wilson_ust(ust_n, g.seed, 0);
        std::ofstream out(tree_out);
        write_tree_csv(tree, out);
        emit(json{{"written", tree_out}, {"edges", tree.edge_count()}}, g);
        return 0;
      }
      EdgeLine line = extractor == "horizontal" ? EdgeLine::HorizontalField
                      : extractor == "xaxis"    ? EdgeLine::XAxis
                      : extractor == "diagonal" ? EdgeLine::Diagonal
                                                : EdgeLine::Zigzag;
      std::vector<std::vector<uint8_t>> lines;
      lines.reserve(ust_samples);
      for (size_t i = 0; i < ust_samples; ++i)
        lines.push_back(edge_process(wilson_ust(ust_n, g.seed, i), line));
      LineStats st = line_statistics(lines, max_lag);
      json out{{"n", ust_n},
               {"samples", ust_samples},
               {"extractor", extractor},
               {"mean", st.mean},
               {"mean_se", st.mean_se},
               {"finite_size_allowance", 0.01}};
      json cov = json::array();
      for (int lag = 1; lag <= max_lag; ++lag)
        cov.push_back(json{{"lag", lag},
                           {"covariance", st.lag_cov[size_t(lag - 1)]},
                           {"stderr", st.lag_cov_se[size_t(lag - 1)]}});
      out["covariances"] = cov;
      // predictions when a symbol is supplied
      if (!g.symbol.empty()) {
        SymbolSpec s = resolve_symbol(g);
        QuadParams q = quad_for(s, g);
        if (s.dim == 1) {
          CoeffTable t = fourier_coeffs_cached(s, std::vector<int>{std::max(g.kmax, max_lag)}, q, cache);
          std::vector<int> lags(size_t(max_lag), 0);
          std::iota(lags.begin(), lags.end(), 1);
          out["comparison"] = to_json(compare_to_symbol(st, t, lags, 0.01));
        }
      }
      emit(out, g);
    } else if (c_repro->parsed()) {
      QuadParams q;
      q.mc_seed = g.seed;
      ReproOptions opt;
      opt.seed = g.seed;
      opt.skip_slow = fast;
      std::vector<ReproRow> rows = run_reproduce(q, opt);
      if (g.format == "json")
        std::cout << to_json(rows).dump(2) << "\n";
      else
        print_repro_table(rows, std::cout);
      return all_pass(rows) ? 0 : 1;
    }
  } catch (const ParseError& e) {
    std::cerr << "symbol error: " << e.what() << "\n";
    return 2;
  } catch (const DetprocError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
