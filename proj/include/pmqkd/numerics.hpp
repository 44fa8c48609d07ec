#pragma once

// Scalar kernels shared by the channel and security modules. All functions are
// pure and reentrant.

namespace pmqkd {

/// Binary Shannon entropy in bits, with 0*log2(0) = 0.
double binary_entropy(double x);

/// ln(n!) via lgamma.
double log_factorial(double n);

/// e^{-mu} mu^k / k!, evaluated in the log domain.
double poisson_pmf(double mu, int k);

/// Weight of the k-th pseudo-Fock component produced by M-slice discrete phase
/// randomization of a coherent state with mean photon number `mu`.
struct PseudoFockWeight {
  double mu = 0.0;
  int m_slices = 0;
  int k = 0;
  double weight = 0.0;
};

/// Sum_{l>=0} mu^{lM+k} e^{-mu} / (lM+k)!, truncated once a term drops below
/// 1e-18 of the running sum.
PseudoFockWeight pseudo_fock_weight(double mu, int m_slices, int k);

/// Closed-form upper bound on the pseudo-Fock weight for even k in {0,2,4,6},
/// obtained by relaxing the M-step series to a step-2 series. Requires an even
/// `m_slices` with m_slices >= k + 2.
double pseudo_fock_weight_ub(double mu, int m_slices, int k);

}  // namespace pmqkd
