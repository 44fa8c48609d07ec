#include "pmqkd/security.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pmqkd/channel.hpp"
#include "pmqkd/errors.hpp"
#include "pmqkd/numerics.hpp"

namespace pmqkd {

namespace {

void require_eps(double eps, const char* who) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError(std::string(who) + ": failure probability must lie in (0,1)");
  }
}

void require_positive_gain(double q_mu, const char* who) {
  if (!(q_mu > 0.0)) throw DomainError(std::string(who) + ": gain must be > 0");
}

}  // namespace

double chernoff_beta(double eps, LogBase base) {
  require_eps(eps, "chernoff_beta");
  switch (base) {
    case LogBase::kTwo:
      return -std::log2(eps);
    case LogBase::kTen:
      return -std::log10(eps);
    case LogBase::kNatural:
    default:
      return -std::log(eps);
  }
}

double chernoff_expected_ub(double x, double eps, LogBase base) {
  if (x < 0.0) throw DomainError("chernoff_expected_ub: negative count");
  const double beta = chernoff_beta(eps, base);
  return x + beta + std::sqrt(2.0 * beta * x + beta * beta);
}

double chernoff_observed_ub(double x, double eps, LogBase base) {
  if (x < 0.0) throw DomainError("chernoff_observed_ub: negative expectation");
  const double beta = chernoff_beta(eps, base);
  return x + beta / 2.0 + std::sqrt(2.0 * beta * x + beta * beta / 4.0);
}

VacuumYieldBound vacuum_yield_chain(double m_s, double p_s, double n_rounds, double mu,
                                    double eps, LogBase base) {
  if (m_s < 0.0) throw DomainError("vacuum_yield_ub: negative sampled error count");
  if (!(p_s > 0.0 && p_s < 1.0)) {
    throw DomainError("vacuum_yield_ub: sampling fraction must lie in (0,1)");
  }
  if (!(n_rounds > 0.0)) throw DomainError("vacuum_yield_ub: N must be > 0");
  if (!(mu >= 0.0)) throw DomainError("vacuum_yield_ub: intensity must be >= 0");

  VacuumYieldBound out;
  out.ms_expected_ub = chernoff_expected_ub(m_s, eps, base);
  out.m_expected_ub = (1.0 - p_s) / p_s * out.ms_expected_ub;
  // Worst case: every error comes from the vacuum, which errs half the time.
  out.n0_expected = 2.0 * out.m_expected_ub;
  out.n0_observed_ub = chernoff_observed_ub(out.n0_expected, eps, base);
  out.y0_bar =
      std::min(1.0, out.n0_observed_ub / (n_rounds * (1.0 - p_s) * std::exp(-mu)));
  return out;
}

double phase_error_continuous(double mu, double q_mu, double y0_bar) {
  require_positive_gain(q_mu, "phase_error_continuous");
  const double vacuum = std::exp(-mu) * y0_bar / q_mu;
  // (e^{-2mu} + 1 - 2e^{-mu}) / 2 == (1 - e^{-mu})^2 / 2
  const double em1 = std::expm1(-mu);
  return vacuum + em1 * em1 / (2.0 * q_mu);
}

double deviation_bound(double mu, int m_slices, int k, double q_mu) {
  if (m_slices != 6 && m_slices != 8) {
    throw DomainError("deviation_bound: m_slices must be 6 or 8");
  }
  if (k < 0 || k % 2 != 0 || k > m_slices - 2) {
    throw DomainError("deviation_bound: k must be even with 0 <= k <= m_slices - 2");
  }
  require_positive_gain(q_mu, "deviation_bound");
  if (mu == 0.0) return 0.0;
  const double weight = pseudo_fock_weight_ub(mu, m_slices, k);
  const double log_ratio =
      log_factorial(k) + m_slices * std::log(mu) - log_factorial(m_slices + k);
  return weight / q_mu * std::exp(0.5 * log_ratio);
}

double PhaseErrorBreakdown::deviation_sum() const {
  return std::accumulate(deviations.begin(), deviations.end(), 0.0);
}

PhaseErrorBreakdown phase_error_discrete(double mu, int m_slices, double q_mu, double y0_bar) {
  require_positive_gain(q_mu, "phase_error_discrete");
  PhaseErrorBreakdown out;
  out.vacuum_term = std::exp(-mu) * y0_bar / q_mu;
  const double em1 = std::expm1(-mu);
  out.multiphoton_term = em1 * em1 / (2.0 * q_mu);
  for (int k = 0; k <= m_slices - 2; k += 2) {
    out.deviations.push_back(deviation_bound(mu, m_slices, k, q_mu));
  }
  out.ep_m = out.vacuum_term + out.multiphoton_term + out.deviation_sum();
  out.ep_m_bar = out.ep_m;
  return out;
}

KatoCoefficients kato_correction(double n, double lambda_n, double eps_ka) {
  if (!(n >= 1.0)) throw DomainError("kato_correction: n must be >= 1");
  if (!(lambda_n >= 0.0 && lambda_n <= n)) {
    throw DomainError("kato_correction: Lambda_n must lie in [0, n]");
  }
  require_eps(eps_ka, "kato_correction");

  const double ln_eps = std::log(eps_ka);
  const double sqrt_n = std::sqrt(n);
  const double spread = 9.0 * lambda_n * (n - lambda_n) - 2.0 * n * ln_eps;

  const double a1_sq = -n * n * ln_eps * spread;
  const double a_den = 4.0 * (9.0 * n - 8.0 * ln_eps) * spread;
  if (a1_sq < 0.0 || !(a_den > 0.0)) {
    throw std::logic_error("kato_correction: negative radicand");
  }
  KatoCoefficients k;
  k.n = n;
  k.lambda_n = lambda_n;
  k.eps_ka = eps_ka;
  k.a1 = std::sqrt(a1_sq);
  k.a = 3.0 *
        (72.0 * sqrt_n * lambda_n * (n - lambda_n) * ln_eps -
         16.0 * n * sqrt_n * ln_eps * ln_eps + 9.0 * std::sqrt(2.0) * (n - 2.0 * lambda_n) * k.a1) /
        a_den;
  const double b_sq_num =
      18.0 * k.a * k.a * n - (16.0 * k.a * k.a + 24.0 * k.a * sqrt_n + 9.0 * n) * ln_eps;
  if (b_sq_num < 0.0) throw std::logic_error("kato_correction: negative radicand");
  k.b = std::sqrt(b_sq_num) / (3.0 * std::sqrt(2.0 * n));
  k.delta = (k.b + k.a * (2.0 * lambda_n / n - 1.0)) * sqrt_n;
  return k;
}

double kato_tail(const KatoCoefficients& k) {
  const double shape = 1.0 + 4.0 * k.a / (3.0 * std::sqrt(k.n));
  return std::exp(-2.0 * (k.b * k.b - k.a * k.a) / (shape * shape));
}

double phase_error_final(double n_mu, double ep_m, double eps_ka) {
  return phase_error_final(n_mu, ep_m, eps_ka, nullptr);
}

double phase_error_final(double n_mu, double ep_m, double eps_ka,
                         KatoCoefficients* coefficients) {
  if (!(n_mu >= 1.0)) throw NoDataError("phase_error_final: n_mu must be >= 1");
  if (!(ep_m >= 0.0)) throw DomainError("phase_error_final: negative phase error rate");
  const double lambda = std::clamp(n_mu * ep_m, 0.0, n_mu);
  const KatoCoefficients k = kato_correction(n_mu, lambda, eps_ka);
  if (coefficients != nullptr) *coefficients = k;
  return (n_mu * ep_m + k.delta) / n_mu;
}

KeyLength key_length(double n_mu, double ep_m_bar, double e_b, double f,
                     const SecurityBudget& budget, double n_rounds) {
  if (n_mu < 0.0) throw DomainError("key_length: negative n_mu");
  if (!(n_rounds > 0.0)) throw DomainError("key_length: N must be > 0");
  const double h_phase = binary_entropy(std::clamp(ep_m_bar, 0.0, 0.5));
  const double h_bit = binary_entropy(std::clamp(e_b, 0.0, 0.5));
  KeyLength out;
  out.ell_raw = n_mu * (1.0 - h_phase - f * h_bit) - budget.xi - budget.xi_prime;
  out.ell = std::max(0.0, out.ell_raw);
  out.rate = out.ell / n_rounds;
  return out;
}

EpsilonComposition compose_epsilons(const SecurityBudget& budget) {
  return {budget.eps_sec(), budget.eps_cor(), budget.eps_tot()};
}

KeyRateResult evaluate_key_rate(const KeyRateInputs& in, const SecurityBudget& budget,
                                const SecurityOptions& options) {
  budget.validate();
  KeyRateResult r;
  r.inputs = in;
  r.budget = budget;
  r.epsilons = compose_epsilons(budget);

  r.vacuum = vacuum_yield_chain(in.m_s, in.p_s, in.n_rounds, in.mu, budget.eps, options.log_base);
  r.phase = phase_error_discrete(in.mu, in.m_slices, in.q_mu, r.vacuum.y0_bar);

  if (in.n_mu < 1.0) {
    // Nothing to distill; report the fixed cost as a negative raw length.
    r.key = key_length(in.n_mu, 0.5, in.e_b, in.f, budget, in.n_rounds);
    return r;
  }
  if (options.kato) {
    r.phase.ep_m_bar = phase_error_final(in.n_mu, r.phase.ep_m, budget.eps_ka, &r.kato);
    r.phase.kato_delta = r.phase.ep_m_bar - r.phase.ep_m;
  }
  r.key = key_length(in.n_mu, r.phase.ep_m_bar, in.e_b, in.f, budget, in.n_rounds);
  return r;
}

KeyRateInputs analytic_inputs(const ProtocolParams& params) {
  params.validate();
  const double eta = transmittance(params.channel);
  KeyRateInputs in;
  in.mu = params.mu;
  in.m_slices = params.m_slices;
  in.n_rounds = params.n_rounds;
  in.p_s = params.p_s;
  in.f = params.f;
  in.q_mu = gain(params.mu, eta, params.channel.p_d());
  in.e_b = qber(params.mu, eta, params.channel.p_d(), params.channel.e_d());
  in.n_mu = expected_sifted(params, in.q_mu);
  // Expected sampled errors: the test set is p_s/(1-p_s) the size of the key set.
  in.m_s = in.e_b * in.n_mu * params.p_s / (1.0 - params.p_s);
  return in;
}

KeyRateResult analytic_key_rate(const ProtocolParams& params, const SecurityOptions& options) {
  return evaluate_key_rate(analytic_inputs(params), params.budget, options);
}

}  // namespace pmqkd
