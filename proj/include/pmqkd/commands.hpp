#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmqkd/ingest.hpp"
#include "pmqkd/optimizer.hpp"
#include "pmqkd/security.hpp"

namespace pmqkd {

enum class OutputFormat { kCsv, kJson };

/// Parameters shared by all subcommands. Defaults are the reference
/// simulation setup and its default security budget.
struct RunConfig {
  std::optional<double> mu;  // fixed intensity; unset means "optimize"
  int m_slices = 8;
  double n_rounds = 1e11;
  double p_s = 0.07;
  double f = kDefaultEcEfficiency;

  double e_d = kDefaultMisalignment;
  double p_d = kDefaultDarkCount;
  double eta_d = kDefaultDetectorEfficiency;
  double alpha_db_per_km = kDefaultAttenuationDbPerKm;
  std::optional<double> loss_db;
  std::optional<double> distance_km;

  SecurityBudget budget;
  LogBase log_base = LogBase::kNatural;

  // scan
  double d_min = 0.0;
  double d_max = 350.0;
  double d_step = 5.0;
  std::vector<double> scan_n_rounds;  // empty: use n_rounds

  // deviation
  double loss_min = 10.0;
  double loss_max = 50.0;
  double loss_step = 1.0;

  OptimizerConfig optimizer;

  // simulate
  std::uint64_t seed = 1;
  unsigned threads = 0;

  // reproduce
  GainSource gain = GainSource::kClosedForm;
  std::optional<CountsConvention> counts;
  std::string components_path;

  OutputFormat format = OutputFormat::kJson;

  /// Throws UsageError naming the first invalid field.
  void validate() const;
  ChannelSpec channel() const;
  ProtocolParams protocol(double mu) const;
  SecurityOptions security() const;
};

KeyRateResult cmd_keyrate(const RunConfig& config);

OptimizationResult cmd_optimize(const RunConfig& config);

struct ScanRow {
  double distance_km = 0.0;
  double loss_db = 0.0;
  double n_rounds = 0.0;
  double mu = 0.0;
  double p_s = 0.0;
  double rate = 0.0;
};

/// One row per (N, distance), ordered by N then distance. Points are
/// evaluated concurrently.
std::vector<ScanRow> cmd_scan(const RunConfig& config);
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);

struct DeviationRow {
  double loss_db = 0.0;
  double mu = 0.0;
  std::vector<double> deltas;
  double ep_m = 0.0;
  double ratio = 0.0;  // sum(deltas) / ep_m
};

std::vector<DeviationRow> cmd_deviation(const RunConfig& config);
void write_deviation_csv(std::ostream& out, const std::vector<DeviationRow>& rows, int m_slices);

/// Requires mu and the channel; returns a record ready for write_tally_csv().
ExperimentRecord cmd_simulate(const RunConfig& config);

struct Reproduction {
  ExperimentRecord record;
  Observables observables;
  KeyRateResult result;
};

Reproduction cmd_reproduce(const RunConfig& config, const std::string& csv_path);

void write_keyrate(std::ostream& out, const KeyRateResult& result, OutputFormat format);

}  // namespace pmqkd
