#include "pmqkd/channel.hpp"

#include <cmath>

#include "pmqkd/errors.hpp"

namespace pmqkd {

double transmittance(const ChannelSpec& spec) {
  return spec.eta_d() * std::pow(10.0, -(spec.total_loss_db() / 2.0) / 10.0);
}

// (1-p_d)[1-(1-2p_d)e^{-mu eta}], rewritten as (1-p_d)[(1-e^{-x}) + 2p_d e^{-x}]
// so that the weak-signal limit keeps full relative precision.
double gain(double mu, double eta, double p_d) {
  const double x = mu * eta;
  return (1.0 - p_d) * (-std::expm1(-x) + 2.0 * p_d * std::exp(-x));
}

double qber(double mu, double eta, double p_d, double e_d) {
  const double q = gain(mu, eta, p_d);
  if (!(q > 0.0)) throw DomainError("qber: gain is zero (no light and no dark counts)");
  const double x = mu * eta;
  // 1 - (1-p_d)e^{-x} = (1-e^{-x}) + p_d e^{-x}
  const double correct_only = (1.0 - p_d) * (-std::expm1(-x) + p_d * std::exp(-x));
  const double wrong_only = p_d * (1.0 - p_d) * std::exp(-x);
  return (e_d * correct_only + (1.0 - e_d) * wrong_only) / q;
}

double expected_sifted(const ProtocolParams& params, double q_mu) {
  if (params.m_slices < 2) throw DomainError("expected_sifted: m_slices must be >= 2");
  return (2.0 / params.m_slices) * q_mu * params.n_rounds * (1.0 - params.p_s);
}

}  // namespace pmqkd
