#include "pmqkd/report.hpp"

namespace pmqkd {

using nlohmann::json;

json to_json(const SecurityBudget& b) {
  const EpsilonComposition e = compose_epsilons(b);
  return {{"eps", b.eps},           {"eps_ka", b.eps_ka},   {"xi", b.xi},
          {"xi_prime", b.xi_prime}, {"eps_sec", e.eps_sec}, {"eps_cor", e.eps_cor},
          {"eps_tot", e.eps_tot}};
}

json to_json(const KeyRateResult& r) {
  const KeyRateInputs& in = r.inputs;
  json j;
  j["inputs"] = {{"mu", in.mu},
                 {"m_slices", in.m_slices},
                 {"N", in.n_rounds},
                 {"p_s", in.p_s},
                 {"f", in.f},
                 {"Q_mu", in.q_mu},
                 {"E_b", in.e_b},
                 {"n_mu", in.n_mu},
                 {"m_s", in.m_s},
                 {"m_s_reconstructed", in.m_s_reconstructed}};
  j["budget"] = to_json(r.budget);
  j["vacuum"] = {{"ms_expected_ub", r.vacuum.ms_expected_ub},
                 {"m_expected_ub", r.vacuum.m_expected_ub},
                 {"n0_expected", r.vacuum.n0_expected},
                 {"n0_observed_ub", r.vacuum.n0_observed_ub},
                 {"Y0_bar", r.vacuum.y0_bar}};
  j["phase_error"] = {{"vacuum_term", r.phase.vacuum_term},
                      {"multiphoton_term", r.phase.multiphoton_term},
                      {"deviations", r.phase.deviations},
                      {"deviation_sum", r.phase.deviation_sum()},
                      {"E_p_M", r.phase.ep_m},
                      {"kato_delta", r.phase.kato_delta},
                      {"E_p_M_bar", r.phase.ep_m_bar}};
  j["kato"] = {{"a", r.kato.a},           {"b", r.kato.b},
               {"a1", r.kato.a1},         {"n", r.kato.n},
               {"lambda_n", r.kato.lambda_n}, {"eps_ka", r.kato.eps_ka},
               {"Delta_Ka", r.kato.delta}};
  j["key"] = {{"ell", r.key.ell}, {"ell_raw", r.key.ell_raw}, {"R", r.key.rate}};
  return j;
}

json to_json(const OptimizationResult& r, bool include_trace) {
  json j = {{"mu_opt", r.mu_opt},       {"p_s_opt", r.p_s_opt},
            {"rate_opt", r.rate_opt},   {"infeasible", r.infeasible},
            {"evaluations", r.evaluations}, {"detail", to_json(r.detail)}};
  if (include_trace) {
    json trace = json::array();
    for (const auto& t : r.trace) trace.push_back({t.candidate.mu, t.candidate.p_s, t.rate});
    j["trace"] = std::move(trace);
  }
  return j;
}

json to_json(const ExperimentRecord& rec) {
  const ObservedTally& t = rec.tally;
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"phase_a", format_phase(r.phase_a, t.m_slices)},
                    {"phase_b", format_phase(r.phase_b, t.m_slices)},
                    {"d1", r.d1},
                    {"d2", r.d2}});
  }
  json j = {{"loss_db", rec.loss_db},
            {"N", rec.n_rounds},
            {"mu", rec.mu},
            {"p_s", rec.p_s},
            {"m_slices", t.m_slices},
            {"n_det", t.n_det},
            {"counts", rec.counts == CountsConvention::kAllMatched ? "all_matched" : "sifted_key"},
            {"rows", std::move(rows)}};
  if (rec.exact_sampling) {
    j["m_s"] = t.m_s;
    j["n_sampled"] = t.n_sampled;
    j["n_sifted"] = t.n_sifted;
    j["n_double"] = t.n_double;
  }
  if (!rec.component_losses.empty()) {
    json c = json::object();
    for (const auto& [name, db] : rec.component_losses) c[name] = db;
    j["component_losses_db"] = std::move(c);
  }
  return j;
}

}  // namespace pmqkd
