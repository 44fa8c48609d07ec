// Command-line front end: keyrate, optimize, scan, deviation, simulate, reproduce.
//
// Every option may also be given in a key=value config file (--config, or the
// path in $PMQKD_CONFIG); command-line flags take precedence.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "pmqkd/commands.hpp"
#include "pmqkd/errors.hpp"
#include "pmqkd/format.hpp"
#include "pmqkd/report.hpp"

namespace {

using pmqkd::RunConfig;

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kDomain = 3,
  kSchema = 4,
  kNoData = 5,
};

int fail(int code, const char* tag, const std::string& message) {
  std::cerr << "pmqkd: error: " << tag << ": " << message << '\n';
  return code;
}

constexpr const char* kScanColumns = "distance_km,loss_db,N,mu,p_s,R";
constexpr const char* kDeviationColumns =
    "loss_db,mu,delta_0,delta_2,delta_4[,delta_6],E_p_M,sum_delta_over_E_p_M";
constexpr const char* kTallyColumns =
    "'#'-prefixed key=value metadata (loss_db, N, mu, p_s, n_det, m_slices, counts, m_s, "
    "n_sampled, n_sifted, n_double, eta_d, p_d, e_d) then phase_a,phase_b,d1_count,d2_count";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-key analysis, optimization and simulation for phase-matching QKD "
               "without intensity modulation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file")->envname("PMQKD_CONFIG");

  RunConfig cfg;
  double mu = -1.0;
  double loss_db = -1.0;
  double distance_km = -1.0;
  std::string output;
  std::string format = "json";
  std::string log_base = "e";
  std::string method = "genetic";
  std::string gain = "closed-form";
  std::string counts;
  bool fixed_p_s = false;
  bool trace = false;

  app.add_option("--mu", mu, "Total intensity mu (unset: optimize where supported)");
  app.add_option("-M,--m-slices", cfg.m_slices, "Number of phase slices (6 or 8)")
      ->capture_default_str();
  app.add_option("-N,--n-rounds", cfg.n_rounds, "Number of protocol rounds")->capture_default_str();
  app.add_option("--p-s", cfg.p_s, "Sampling fraction")->capture_default_str();
  app.add_option("--f", cfg.f, "Error-correction efficiency")->capture_default_str();
  app.add_option("--e-d", cfg.e_d, "Misalignment error")->capture_default_str();
  app.add_option("--p-d", cfg.p_d, "Dark count probability per pulse")->capture_default_str();
  app.add_option("--eta-d", cfg.eta_d, "Detector efficiency")->capture_default_str();
  app.add_option("--alpha", cfg.alpha_db_per_km, "Fiber attenuation [dB/km]")->capture_default_str();
  app.add_option("--loss-db", loss_db, "Total channel loss [dB]");
  app.add_option("--distance-km", distance_km, "Total distance [km]");
  app.add_option("--eps", cfg.budget.eps, "Chernoff failure probability")->capture_default_str();
  app.add_option("--eps-ka", cfg.budget.eps_ka, "Kato failure probability")->capture_default_str();
  app.add_option("--xi", cfg.budget.xi, "Privacy-amplification surplus bits")->capture_default_str();
  app.add_option("--xi-prime", cfg.budget.xi_prime, "Error-verification bits")
      ->capture_default_str();
  app.add_option("--log-base", log_base, "Base of beta = log(1/eps)")
      ->check(CLI::IsMember({"e", "2", "10"}))
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads for simulate (0 = all cores)");
  app.add_option("-o,--output", output, "Output file (default stdout)");
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // Optimizer knobs.
  app.add_option("--method", method, "Search method")
      ->check(CLI::IsMember({"genetic", "pattern"}))
      ->capture_default_str();
  app.add_option("--mu-min", cfg.optimizer.bounds.mu_min)->capture_default_str();
  app.add_option("--mu-max", cfg.optimizer.bounds.mu_max)->capture_default_str();
  app.add_option("--p-s-min", cfg.optimizer.bounds.p_s_min)->capture_default_str();
  app.add_option("--p-s-max", cfg.optimizer.bounds.p_s_max)->capture_default_str();
  app.add_flag("--fixed-p-s", fixed_p_s, "Pin p_s to --p-s instead of optimizing it");
  app.add_option("--population", cfg.optimizer.population)->capture_default_str();
  app.add_option("--generations", cfg.optimizer.generations)->capture_default_str();
  app.add_option("--opt-seed", cfg.optimizer.seed, "Optimizer RNG seed")->capture_default_str();
  app.add_flag("--trace", trace, "Include the candidate trace in optimize output");

  auto* keyrate = app.add_subcommand("keyrate", "Single-point key rate with full bound breakdown");
  auto* optimize = app.add_subcommand("optimize", "Maximize the key rate over (mu, p_s)");
  auto* scan = app.add_subcommand(
      "scan", std::string("Key rate versus distance. CSV columns: ") + kScanColumns);
  scan->add_option("--d-min", cfg.d_min, "First distance [km]")->capture_default_str();
  scan->add_option("--d-max", cfg.d_max, "Last distance [km]")->capture_default_str();
  scan->add_option("--step", cfg.d_step, "Distance step [km]")->capture_default_str();
  scan->add_option("--scan-n", cfg.scan_n_rounds, "Data sizes to scan (default: -N)");
  auto* deviation = app.add_subcommand(
      "deviation",
      std::string("Even-photon deviations versus loss. CSV columns: ") + kDeviationColumns);
  deviation->add_option("--loss-min", cfg.loss_min)->capture_default_str();
  deviation->add_option("--loss-max", cfg.loss_max)->capture_default_str();
  deviation->add_option("--loss-step", cfg.loss_step)->capture_default_str();
  auto* simulate = app.add_subcommand(
      "simulate", std::string("Monte Carlo tally CSV. Format: ") + kTallyColumns);
  auto* reproduce = app.add_subcommand("reproduce", "Key rate from a tally CSV");
  std::string tally_path;
  reproduce->add_option("tally", tally_path, "Tally CSV")->required()->check(CLI::ExistingFile);
  reproduce->add_option("--gain-source", gain, "Where Q_mu comes from")
      ->check(CLI::IsMember({"closed-form", "counts"}))
      ->capture_default_str();
  reproduce->add_option("--counts", counts, "Override the counts convention")
      ->check(CLI::IsMember({"sifted_key", "all_matched"}));
  reproduce->add_option("--components", cfg.components_path, "Component-loss table (metadata)");

  for (auto* sub : {keyrate, optimize, scan, deviation, simulate, reproduce}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  if (mu >= 0.0) cfg.mu = mu;
  if (loss_db >= 0.0) cfg.loss_db = loss_db;
  if (distance_km >= 0.0) cfg.distance_km = distance_km;
  cfg.format = format == "csv" ? pmqkd::OutputFormat::kCsv : pmqkd::OutputFormat::kJson;
  cfg.log_base = log_base == "2"    ? pmqkd::LogBase::kTwo
                 : log_base == "10" ? pmqkd::LogBase::kTen
                                    : pmqkd::LogBase::kNatural;
  cfg.optimizer.method =
      method == "pattern" ? pmqkd::SearchMethod::kPatternSearch : pmqkd::SearchMethod::kGenetic;
  cfg.optimizer.optimize_p_s = !fixed_p_s;
  cfg.optimizer.fixed_p_s = cfg.p_s;
  cfg.gain = gain == "counts" ? pmqkd::GainSource::kCounts : pmqkd::GainSource::kClosedForm;
  if (counts == "sifted_key") cfg.counts = pmqkd::CountsConvention::kSiftedKey;
  if (counts == "all_matched") cfg.counts = pmqkd::CountsConvention::kAllMatched;

  std::ofstream file;
  if (!output.empty()) {
    file.open(output, std::ios::binary);
    if (!file) return fail(kUsage, "usage", "output: cannot open " + output);
  }
  std::ostream& out = output.empty() ? std::cout : file;

  try {
    if (keyrate->parsed()) {
      pmqkd::write_keyrate(out, pmqkd::cmd_keyrate(cfg), cfg.format);
    } else if (optimize->parsed()) {
      const auto r = pmqkd::cmd_optimize(cfg);
      if (cfg.format == pmqkd::OutputFormat::kJson) {
        auto j = pmqkd::to_json(r, trace);
        j["budget"] = pmqkd::to_json(cfg.budget);
        out << j.dump(2) << '\n';
      } else {
        out << "mu_opt,p_s_opt,R,infeasible,evaluations\n"
            << pmqkd::format_number(r.mu_opt) << ',' << pmqkd::format_number(r.p_s_opt) << ','
            << pmqkd::format_number(r.rate_opt) << ',' << r.infeasible << ','
            << r.evaluations << '\n';
      }
    } else if (scan->parsed()) {
      pmqkd::write_scan_csv(out, pmqkd::cmd_scan(cfg));
    } else if (deviation->parsed()) {
      pmqkd::write_deviation_csv(out, pmqkd::cmd_deviation(cfg), cfg.m_slices);
    } else if (simulate->parsed()) {
      pmqkd::write_tally_csv(out, pmqkd::cmd_simulate(cfg));
    } else if (reproduce->parsed()) {
      const auto rep = pmqkd::cmd_reproduce(cfg, tally_path);
      if (cfg.format == pmqkd::OutputFormat::kJson) {
        nlohmann::json j;
        j["record"] = pmqkd::to_json(rep.record);
        j["observables"] = {{"E_b", rep.observables.e_b},
                            {"n_mu", rep.observables.n_mu},
                            {"matched", rep.observables.matched},
                            {"errors", rep.observables.errors},
                            {"m_s", rep.observables.m_s},
                            {"m_s_reconstructed", rep.observables.m_s_reconstructed}};
        j["gain_source"] = gain;
        j["result"] = pmqkd::to_json(rep.result);
        out << j.dump(2) << '\n';
      } else {
        pmqkd::write_keyrate(out, rep.result, cfg.format);
      }
    }
  } catch (const pmqkd::UsageError& e) {
    return fail(kUsage, "usage", e.what());
  } catch (const pmqkd::SchemaError& e) {
    return fail(kSchema, "schema", e.what());
  } catch (const pmqkd::NoDataError& e) {
    return fail(kNoData, "no_data", e.what());
  } catch (const pmqkd::DomainError& e) {
    return fail(kDomain, "domain", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return kOk;
}
