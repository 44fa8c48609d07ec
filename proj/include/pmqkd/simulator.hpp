#pragma once

#include <cstdint>
#include <vector>

#include "pmqkd/params.hpp"

namespace pmqkd {

/// Counts for one matched phase pair. Phases are total modulated phases
/// (random phase plus key-bit pi shift) in units of 2*pi/M.
struct TallyRow {
  int phase_a = 0;
  int phase_b = 0;
  std::uint64_t d1 = 0;
  std::uint64_t d2 = 0;

  /// True when the pair differs by pi (D2 is the expected detector).
  bool anti_phase(int m_slices) const { return (phase_a - phase_b + m_slices) % m_slices != 0; }
  /// Clicks on the detector that signals a bit error after the flip rule.
  std::uint64_t errors(int m_slices) const { return anti_phase(m_slices) ? d1 : d2; }
  std::uint64_t total() const { return d1 + d2; }

  bool operator==(const TallyRow&) const = default;
};

/// Detector tallies in the layout of the experimental data tables: 2M matched
/// phase-pair rows, in-phase pairs (a, a) first then anti-phase (a, a + M/2).
///
/// Matched rows count both test and key rounds; the sampling fields record
/// how they were split. Tallies merge by addition.
struct ObservedTally {
  int m_slices = 8;
  std::uint64_t n_rounds = 0;
  std::uint64_t n_det = 0;     // single-detector clicks over all phase pairs
  std::uint64_t n_double = 0;  // discarded double clicks (diagnostic)
  std::vector<TallyRow> rows;
  std::uint64_t m_s = 0;        // errors among sampled test rounds
  std::uint64_t n_sampled = 0;  // matched rounds revealed for testing
  std::uint64_t n_sifted = 0;   // matched rounds kept as key

  /// All-zero tally with the canonical row layout for `m_slices`.
  static ObservedTally empty(int m_slices);

  /// Position of (phase_a, phase_b) in `rows`, or -1 if the pair is not matched.
  static int row_index(int m_slices, int phase_a, int phase_b);

  std::uint64_t matched_total() const;
  std::uint64_t error_total() const;

  void merge(const ObservedTally& other);
  bool operator==(const ObservedTally&) const = default;
};

struct SimulationOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  std::uint64_t block_rounds = 1u << 16;
};

/// Monte Carlo of preparation, interference measurement, sifting with the
/// flip rule, and random test sampling. Each block of `block_rounds` rounds
/// draws from its own generator seeded by (seed, block index), so the result
/// depends only on (params, seed, block_rounds).
ObservedTally simulate(const ProtocolParams& params, std::uint64_t seed,
                       const SimulationOptions& options = {});

struct TallyStats {
  double q_emp = 0.0;      // n_det / N
  double e_b_emp = 0.0;    // error clicks / matched clicks
  double n_mu_emp = 0.0;   // key rounds kept after sampling
};

/// Throws NoDataError when the tally has no rounds or no matched clicks.
TallyStats tally_to_stats(const ObservedTally& tally);

}  // namespace pmqkd
