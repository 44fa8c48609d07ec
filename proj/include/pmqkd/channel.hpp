#pragma once

#include "pmqkd/params.hpp"

namespace pmqkd {

/// Single-arm transmittance including detector efficiency:
/// eta_d * 10^{-(total_loss_db / 2) / 10}.
double transmittance(const ChannelSpec& spec);

/// Probability that exactly one detector clicks in a round with total
/// intensity `mu` and arm transmittance `eta`.
double gain(double mu, double eta, double p_d);

/// Bit error rate among valid clicks. Throws DomainError when the gain is zero.
double qber(double mu, double eta, double p_d, double e_d);

/// Expected number of key bits after sifting and sampling,
/// (2/M) * Q * N * (1 - p_s). Not rounded.
double expected_sifted(const ProtocolParams& params, double q_mu);

}  // namespace pmqkd
