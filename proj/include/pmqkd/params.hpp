#pragma once

#include <cmath>
#include <optional>

namespace pmqkd {

// Default physical constants of the reference simulation setup.
inline constexpr double kDefaultMisalignment = 0.01;
inline constexpr double kDefaultDarkCount = 1e-8;
inline constexpr double kDefaultEcEfficiency = 1.16;
inline constexpr double kDefaultDetectorEfficiency = 0.56;
inline constexpr double kDefaultAttenuationDbPerKm = 0.168;

/// Symmetric two-arm fiber channel terminating in Charlie's detectors.
///
/// The total loss is split evenly between the two arms; the transmittance of
/// one arm (times detector efficiency) is what enters the gain and QBER.
/// Construct with from_loss() or from_distance(); exactly one of the two
/// descriptions is the source of truth, the other is derived.
class ChannelSpec {
 public:
  static ChannelSpec from_loss(double total_loss_db, double eta_d = kDefaultDetectorEfficiency,
                               double p_d = kDefaultDarkCount, double e_d = kDefaultMisalignment);
  static ChannelSpec from_distance(double distance_km,
                                   double alpha_db_per_km = kDefaultAttenuationDbPerKm,
                                   double eta_d = kDefaultDetectorEfficiency,
                                   double p_d = kDefaultDarkCount,
                                   double e_d = kDefaultMisalignment);

  double total_loss_db() const noexcept { return total_loss_db_; }
  std::optional<double> distance_km() const noexcept { return distance_km_; }
  std::optional<double> alpha_db_per_km() const noexcept { return alpha_; }
  double eta_d() const noexcept { return eta_d_; }
  double p_d() const noexcept { return p_d_; }
  double e_d() const noexcept { return e_d_; }

 private:
  ChannelSpec(double loss, std::optional<double> km, std::optional<double> alpha, double eta_d,
              double p_d, double e_d);

  double total_loss_db_;
  std::optional<double> distance_km_;
  std::optional<double> alpha_;
  double eta_d_;
  double p_d_;
  double e_d_;
};

/// Failure probabilities and bit charges of the composable security statement.
struct SecurityBudget {
  double eps = 0.5e-20;       // per Chernoff application
  double eps_ka = 1e-10;      // Kato inequality
  double xi = std::log2(2e20);      // privacy-amplification surplus bits
  double xi_prime = std::log2(1e15);  // error-verification bits

  /// Throws DomainError unless all probabilities lie in (0,1) and both bit
  /// charges are positive.
  void validate() const;

  double eps_sec() const;
  double eps_cor() const;
  double eps_tot() const;
};

struct ProtocolParams {
  double mu = 1e-3;        // total intensity, mu_a = mu_b = mu/2
  int m_slices = 8;
  double n_rounds = 1e11;
  double p_s = 0.07;
  ChannelSpec channel = ChannelSpec::from_loss(0.0);
  double f = kDefaultEcEfficiency;
  SecurityBudget budget{};

  void validate() const;
};

}  // namespace pmqkd
