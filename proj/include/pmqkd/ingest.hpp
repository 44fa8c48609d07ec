#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmqkd/security.hpp"
#include "pmqkd/simulator.hpp"

namespace pmqkd {

/// How the matched-row counts of a tally relate to the key set.
enum class CountsConvention {
  kSiftedKey,   // rows hold key rounds only; the test sample is extra
  kAllMatched,  // rows hold key and test rounds together
};

/// One measured (or simulated) run together with the metadata needed to
/// analyze it.
struct ExperimentRecord {
  double loss_db = 0.0;
  double n_rounds = 0.0;
  double mu = 0.0;
  double p_s = 0.0;
  ObservedTally tally;
  CountsConvention counts = CountsConvention::kSiftedKey;
  // The sampling fields in `tally` are exact (simulated data).
  bool exact_sampling = false;
  std::optional<double> eta_d;
  std::optional<double> p_d;
  std::optional<double> e_d;
  std::vector<std::pair<std::string, double>> component_losses;

  void validate() const;
};

/// Reads the tally CSV format: '#'-prefixed key=value metadata lines, a
/// header `phase_a,phase_b,d1_count,d2_count`, and one row per matched phase
/// pair. Phases are written as multiples of pi ("0", "pi/4", "3pi/2", ...).
/// Throws SchemaError with a line number on malformed input.
ExperimentRecord parse_tally_csv(const std::filesystem::path& path);
ExperimentRecord parse_tally_csv(std::istream& in);

void write_tally_csv(std::ostream& out, const ExperimentRecord& record);

/// Reads a `device,attenuation_db` table.
std::vector<std::pair<std::string, double>> parse_component_losses(
    const std::filesystem::path& path);
std::vector<std::pair<std::string, double>> parse_component_losses(std::istream& in);

/// Pretty phase label for index `i` in units of 2*pi/M, e.g. (3, 8) -> "3pi/4".
std::string format_phase(int index, int m_slices);

/// Packages a simulated tally as a record (counts include the test sample,
/// sampling statistics exact).
ExperimentRecord make_record(const ProtocolParams& params, const ObservedTally& tally);

struct Observables {
  double e_b = 0.0;
  double n_mu = 0.0;
  double n_s = 0.0;
  double m_s = 0.0;
  bool m_s_reconstructed = false;
  std::uint64_t matched = 0;
  std::uint64_t errors = 0;
};

/// E_b from error clicks over matched clicks; n_mu and the sampled error
/// count either taken from exact sampling metadata or reconstructed from E_b.
/// Throws NoDataError if no matched clicks are present.
Observables derive_observables(const ExperimentRecord& record);
Observables derive_observables(const ExperimentRecord& record, CountsConvention counts);

enum class GainSource {
  kClosedForm,  // channel model at the record's loss
  kCounts,      // n_mu * M / (2 N (1 - p_s))
};

struct ReproduceOptions {
  GainSource gain = GainSource::kClosedForm;
  std::optional<CountsConvention> counts;  // overrides the record
  double f = kDefaultEcEfficiency;
  double eta_d = kDefaultDetectorEfficiency;  // used when the record has none
  double p_d = kDefaultDarkCount;
  SecurityOptions security;
};

KeyRateResult reproduce_key_rate(const ExperimentRecord& record, const SecurityBudget& budget,
                                 const ReproduceOptions& options = {});

}  // namespace pmqkd
