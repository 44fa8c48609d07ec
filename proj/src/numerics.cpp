#include "pmqkd/numerics.hpp"

#include <cmath>
#include <string>

#include "pmqkd/errors.hpp"

namespace pmqkd {

namespace {

constexpr double kSeriesRelTol = 1e-18;

void require_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw DomainError("intensity must be finite and >= 0, got " + std::to_string(mu));
  }
}

}  // namespace

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("binary_entropy: argument outside [0,1]: " + std::to_string(x));
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double log_factorial(double n) {
  if (n < 0.0) throw DomainError("log_factorial: negative argument");
  return std::lgamma(n + 1.0);
}

double poisson_pmf(double mu, int k) {
  require_mu(mu);
  if (k < 0) throw DomainError("poisson_pmf: negative photon number");
  if (k == 0) return std::exp(-mu);
  if (mu == 0.0) return 0.0;
  return std::exp(-mu + k * std::log(mu) - log_factorial(k));
}

PseudoFockWeight pseudo_fock_weight(double mu, int m_slices, int k) {
  require_mu(mu);
  if (m_slices < 2) throw DomainError("pseudo_fock_weight: m_slices must be >= 2");
  if (k < 0 || k >= m_slices) {
    throw DomainError("pseudo_fock_weight: k must lie in [0, m_slices)");
  }
  PseudoFockWeight out{mu, m_slices, k, 0.0};
  if (mu == 0.0) {
    out.weight = (k == 0) ? 1.0 : 0.0;
    return out;
  }
  // Terms grow while lM+k < mu, so only stop once past the mode.
  const double log_mu = std::log(mu);
  double sum = 0.0;
  for (long l = 0;; ++l) {
    const double n = static_cast<double>(l) * m_slices + k;
    const double term = std::exp(-mu + n * log_mu - log_factorial(n));
    sum += term;
    if (n > mu && term <= kSeriesRelTol * sum) break;
    if (l > 100000) break;
  }
  out.weight = sum;
  return out;
}

double pseudo_fock_weight_ub(double mu, int m_slices, int k) {
  require_mu(mu);
  if (m_slices % 2 != 0 || m_slices < k + 2) {
    throw DomainError("pseudo_fock_weight_ub: requires even m_slices >= k + 2");
  }
  if (k != 0 && k != 2 && k != 4 && k != 6) {
    throw DomainError("pseudo_fock_weight_ub: only k in {0,2,4,6} is supported");
  }
  // Each bound is the even Poisson tail e^{-mu} sum_{l >= k/2} mu^{2l}/(2l)!.
  // For small mu the closed forms cancel catastrophically, so the tail is
  // summed term by term there instead.
  if (mu < 0.5) {
    if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
    double term = 1.0;
    for (int n = 1; n <= k; ++n) term *= mu / n;
    double sum = 0.0;
    for (int n = k; term > kSeriesRelTol * sum; n += 2) {
      sum += term;
      term *= mu * mu / ((n + 1.0) * (n + 2.0));
    }
    return sum * std::exp(-mu);
  }
  const double e1 = std::exp(-mu);
  const double e2 = std::exp(-2.0 * mu);
  switch (k) {
    case 0:
      return 0.5 * (1.0 + e2);
    case 2:
      return 0.5 * (1.0 + e2 - 2.0 * e1);
    case 4:
      return 0.5 * (1.0 + e2 - 2.0 * e1 - mu * mu * e1);
    default:
      return 0.5 * (1.0 + e2 - 2.0 * e1 - mu * mu * e1 - 2.0 * std::pow(mu, 4) * e1 / 24.0);
  }
}

}  // namespace pmqkd
