#pragma once

#include <cstdint>
#include <vector>

#include "pmqkd/params.hpp"
#include "pmqkd/security.hpp"

namespace pmqkd {

struct OptimizationBounds {
  double mu_min = 1e-6;
  double mu_max = 0.1;
  double p_s_min = 0.01;
  double p_s_max = 0.5;
};

enum class SearchMethod { kGenetic, kPatternSearch };

struct OptimizerConfig {
  OptimizationBounds bounds;
  SearchMethod method = SearchMethod::kGenetic;
  std::uint64_t seed = 1;
  int population = 24;
  int generations = 40;
  bool optimize_p_s = true;  // false pins p_s to fixed_p_s
  double fixed_p_s = 0.07;
  int grid_mu = 50;
  int grid_p_s = 10;
  SecurityOptions security;
};

struct Candidate {
  double mu = 0.0;
  double p_s = 0.0;
};

struct TraceEntry {
  Candidate candidate;
  double rate = 0.0;  // clamped rate at the candidate
};

struct OptimizationResult {
  double mu_opt = 0.0;
  double p_s_opt = 0.0;
  double rate_opt = 0.0;
  bool infeasible = false;  // no candidate produced a positive key
  int evaluations = 0;
  std::vector<TraceEntry> trace;
  KeyRateResult detail;  // pipeline re-evaluated at the optimum
};

/// Maximizes the finite-key rate over (mu, p_s) for a fixed channel. The
/// search always includes a log-spaced grid prescan, so the result is never
/// worse than the best grid point.
OptimizationResult optimize(const ChannelSpec& channel, double n_rounds, int m_slices,
                            const SecurityBudget& budget, const OptimizerConfig& config = {},
                            double f = kDefaultEcEfficiency);

}  // namespace pmqkd
