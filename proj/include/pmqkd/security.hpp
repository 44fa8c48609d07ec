#pragma once

#include <vector>

#include "pmqkd/params.hpp"

namespace pmqkd {

/// Logarithm used for beta = log(1/eps) in the Chernoff bounds. Natural log is
/// the supported analysis path; the other bases exist for sensitivity studies.
enum class LogBase { kNatural, kTwo, kTen };

double chernoff_beta(double eps, LogBase base = LogBase::kNatural);

/// Upper bound on the expectation given an observed count x:
/// x + beta + sqrt(2 beta x + beta^2).
double chernoff_expected_ub(double x, double eps, LogBase base = LogBase::kNatural);

/// Upper bound on an observation given its expectation x:
/// x + beta/2 + sqrt(2 beta x + beta^2 / 4).
double chernoff_observed_ub(double x, double eps, LogBase base = LogBase::kNatural);

/// Every link of the vacuum-yield chain, kept for audit output.
struct VacuumYieldBound {
  double ms_expected_ub = 0.0;  // expected sampled errors, upper bound
  double m_expected_ub = 0.0;   // expected key-set errors, upper bound
  double n0_expected = 0.0;     // expected vacuum detections (2x errors)
  double n0_observed_ub = 0.0;  // observed vacuum detections, upper bound
  double y0_bar = 0.0;          // vacuum yield upper bound, clamped to <= 1
};

/// Attributes every sampled error to the vacuum component and bounds Y0.
VacuumYieldBound vacuum_yield_chain(double m_s, double p_s, double n_rounds, double mu, double eps,
                                    LogBase base = LogBase::kNatural);

inline double vacuum_yield_ub(double m_s, double p_s, double n_rounds, double mu, double eps,
                              LogBase base = LogBase::kNatural) {
  return vacuum_yield_chain(m_s, p_s, n_rounds, mu, eps, base).y0_bar;
}

/// Phase error rate under continuous phase randomization with all even
/// multi-photon yields set to one. Not clamped.
double phase_error_continuous(double mu, double q_mu, double y0_bar);

/// Bound on |q_k - q_k^M| for the pseudo-Fock component k (even, k <= M-2)
/// with M in {6, 8}.
double deviation_bound(double mu, int m_slices, int k, double q_mu);

struct PhaseErrorBreakdown {
  double vacuum_term = 0.0;
  double multiphoton_term = 0.0;
  std::vector<double> deviations;  // delta_{2k}, k = 0 .. M/2-1
  double ep_m = 0.0;
  double kato_delta = 0.0;
  double ep_m_bar = 0.0;

  double deviation_sum() const;
};

/// Phase error rate with M-slice discrete randomization (no Kato correction;
/// ep_m_bar is set equal to ep_m).
PhaseErrorBreakdown phase_error_discrete(double mu, int m_slices, double q_mu, double y0_bar);

struct KatoCoefficients {
  double a = 0.0;
  double b = 0.0;
  double a1 = 0.0;
  double n = 0.0;
  double lambda_n = 0.0;
  double eps_ka = 0.0;
  double delta = 0.0;  // [b + a(2 Lambda/n - 1)] sqrt(n)
};

/// Solves for the Kato coefficients (a, b) at failure probability eps_ka and
/// returns them with the correction Delta_Ka.
KatoCoefficients kato_correction(double n, double lambda_n, double eps_ka);

/// Tail probability of the Kato concentration inequality at (a, b):
/// exp[-2(b^2 - a^2) / (1 + 4a/(3 sqrt n))^2]. Equals eps_ka for the
/// coefficients returned by kato_correction().
double kato_tail(const KatoCoefficients& k);

/// Phase error rate after the Kato correction, using n_mu * ep_m (clamped to
/// [0, n_mu]) as the prediction of Lambda_n. Throws NoDataError if n_mu < 1.
double phase_error_final(double n_mu, double ep_m, double eps_ka);

/// Same, additionally returning the coefficients that were used.
double phase_error_final(double n_mu, double ep_m, double eps_ka, KatoCoefficients* coefficients);

struct KeyLength {
  double ell = 0.0;      // floored at zero
  double ell_raw = 0.0;  // before flooring; may be negative
  double rate = 0.0;     // ell / N
};

/// n_mu [1 - H(min(ep_m_bar, 1/2)) - f H(E_b)] - xi - xi'.
KeyLength key_length(double n_mu, double ep_m_bar, double e_b, double f,
                     const SecurityBudget& budget, double n_rounds);

struct EpsilonComposition {
  double eps_sec = 0.0;
  double eps_cor = 0.0;
  double eps_tot = 0.0;
};

EpsilonComposition compose_epsilons(const SecurityBudget& budget);

// ---------------------------------------------------------------------------
// Full key-rate evaluation
// ---------------------------------------------------------------------------

/// Observed (or expected) statistics feeding the bound chain.
struct KeyRateInputs {
  double mu = 0.0;
  int m_slices = 8;
  double n_rounds = 0.0;
  double p_s = 0.07;
  double q_mu = 0.0;
  double e_b = 0.0;
  double n_mu = 0.0;
  double m_s = 0.0;
  double f = kDefaultEcEfficiency;
  bool m_s_reconstructed = false;
};

struct SecurityOptions {
  LogBase log_base = LogBase::kNatural;
  bool kato = true;
};

struct KeyRateResult {
  KeyRateInputs inputs;
  SecurityBudget budget;
  EpsilonComposition epsilons;
  VacuumYieldBound vacuum;
  PhaseErrorBreakdown phase;
  KatoCoefficients kato;
  KeyLength key;

  double rate() const noexcept { return key.rate; }
};

KeyRateResult evaluate_key_rate(const KeyRateInputs& inputs, const SecurityBudget& budget,
                                const SecurityOptions& options = {});

/// Simulation mode: all observed statistics are replaced by their expectations
/// under the closed-form channel model.
KeyRateInputs analytic_inputs(const ProtocolParams& params);

KeyRateResult analytic_key_rate(const ProtocolParams& params, const SecurityOptions& options = {});

}  // namespace pmqkd
