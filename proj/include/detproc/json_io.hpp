#pragma once

#include <json.hpp>

#include "detproc/order_phase.hpp"
#include "detproc/ust.hpp"

namespace detproc {

using json = nlohmann::ordered_json;

inline json to_json(const MeanEntry& e) {
  return json{{"value", e.value},
              {"err", e.err},
              {"divergent", e.divergent},
              {"provable", e.provable}};
}

inline json to_json(const MeansReport& m) {
  return json{{"am", to_json(m.am)},
              {"gm", to_json(m.gm)},
              {"hm", to_json(m.hm)},
              {"gm_complement", to_json(m.gm_complement)},
              {"hm_complement", to_json(m.hm_complement)}};
}

inline json to_json(const DominationReport& r) {
  return json{{"p_strong", r.p_strong},
              {"q_strong", r.q_strong},
              {"p_full", r.p_full},
              {"q_full", r.q_full},
              {"gm_divergent", r.gm_divergent},
              {"gm_complement_divergent", r.gm_complement_divergent},
              {"hm_divergent", r.hm_divergent},
              {"hm_complement_divergent", r.hm_complement_divergent},
              {"err", r.err}};
}

inline json to_json(const EntropyInterval& e, const std::string& symbol, double runtime_ms,
                    bool bits = false) {
  double scale = bits ? 1.0 / kLog2 : 1.0;
  return json{{"symbol", symbol},
              {"method", e.method},
              {"m", e.depth},
              {"lo", e.lo * scale},
              {"hi", e.hi * scale},
              {"pruned_mass", e.pruned_mass},
              {"uninformative", e.uninformative},
              {"unit", bits ? "bits" : "nats"},
              {"runtime_ms", runtime_ms}};
}

inline json to_json(const PhaseVerdict& v) {
  return json{{"strong_k",
               json{{"verdict", verdict_name(v.strong.verdict)},
                    {"gm", v.strong.gm},
                    {"gm_complement", v.strong.gm_complement},
                    {"provable", v.strong.provable}}},
              {"strong_full_k",
               json{{"verdict", verdict_name(v.strong_full.verdict)},
                    {"justification", justification_name(v.strong_full.justification)}}},
              {"one_sided_plus_mass", v.one_sided_plus_mass},
              {"one_sided_minus_mass", v.one_sided_minus_mass},
              {"mass_terms", v.mass_terms}};
}

inline json to_json(const RenewalChecks& rc) {
  return json{{"coeff_residual", rc.coeff_residual},
              {"interrenewal_residual", rc.interrenewal_residual},
              {"conditional_residual", rc.conditional_residual},
              {"convolution_residual", rc.convolution_residual},
              {"pass", rc.pass()}};
}

inline json to_json(const RegenerationReport& r) {
  return json{{"max_residual", r.max_residual},
              {"pruned_words", r.pruned_words},
              {"run_length", r.run_length},
              {"halo", r.halo}};
}

inline json to_json(const Pmf& pmf) {
  json sites = json::array();
  for (const Site& s : pmf.window) sites.push_back(s);
  json probs = json::object();
  for (size_t pat = 0; pat < pmf.p.size(); ++pat) {
    std::string key(pmf.window.size(), '0');
    for (size_t j = 0; j < pmf.window.size(); ++j)
      if (pat >> j & 1) key[j] = '1';
    probs[key] = pmf.p[pat];
  }
  return json{{"window", sites}, {"probabilities", probs}};
}

inline void write_pmf_csv(const Pmf& pmf, std::ostream& out) {
  out << "pattern,probability\n";
  out << std::setprecision(17);
  for (size_t pat = 0; pat < pmf.p.size(); ++pat) {
    std::string key(pmf.window.size(), '0');
    for (size_t j = 0; j < pmf.window.size(); ++j)
      if (pat >> j & 1) key[j] = '1';
    out << key << ',' << pmf.p[pat] << "\n";
  }
}

inline json to_json(const EmpiricalStats& st) {
  json cov = json::array();
  for (const LagCovariance& c : st.covariances)
    cov.push_back(json{{"lag", c.lag}, {"covariance", c.covariance}, {"stderr", c.stderr_jackknife}});
  return json{{"site_frequency", st.site_frequency}, {"covariances", cov}};
}

inline json to_json(const ComparisonReport& rep) {
  json rows = json::array();
  for (const ComparisonRow& r : rep.rows)
    rows.push_back(json{{"lag", r.lag},
                        {"empirical", r.empirical},
                        {"stderr", r.stderr_emp},
                        {"predicted", r.predicted},
                        {"finite_size_allowance", r.finite_size_allowance}});
  return json{{"rows", rows}};
}

}  // namespace detproc
