#include "pmqkd/params.hpp"

#include <string>

#include "pmqkd/errors.hpp"

namespace pmqkd {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw DomainError(field + ": " + what);
}

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

ChannelSpec::ChannelSpec(double loss, std::optional<double> km, std::optional<double> alpha,
                         double eta_d, double p_d, double e_d)
    : total_loss_db_(loss), distance_km_(km), alpha_(alpha), eta_d_(eta_d), p_d_(p_d), e_d_(e_d) {
  require(std::isfinite(loss) && loss >= 0.0, "total_loss_db", "must be finite and >= 0");
  require(eta_d > 0.0 && eta_d <= 1.0, "eta_d", "must lie in (0,1]");
  require(p_d >= 0.0 && p_d < 1.0, "p_d", "must lie in [0,1)");
  require(e_d >= 0.0 && e_d <= 0.5, "e_d", "must lie in [0,0.5]");
}

ChannelSpec ChannelSpec::from_loss(double total_loss_db, double eta_d, double p_d, double e_d) {
  return ChannelSpec(total_loss_db, std::nullopt, std::nullopt, eta_d, p_d, e_d);
}

ChannelSpec ChannelSpec::from_distance(double distance_km, double alpha_db_per_km, double eta_d,
                                       double p_d, double e_d) {
  require(std::isfinite(distance_km) && distance_km >= 0.0, "distance_km",
          "must be finite and >= 0");
  require(alpha_db_per_km > 0.0, "alpha_db_per_km", "must be > 0");
  return ChannelSpec(alpha_db_per_km * distance_km, distance_km, alpha_db_per_km, eta_d, p_d,
                     e_d);
}

void SecurityBudget::validate() const {
  require(open_unit(eps), "eps", "must lie in (0,1)");
  require(open_unit(eps_ka), "eps_ka", "must lie in (0,1)");
  require(xi > 0.0, "xi", "must be > 0");
  require(xi_prime > 0.0, "xi_prime", "must be > 0");
}

double SecurityBudget::eps_sec() const {
  return std::sqrt(2.0) * std::sqrt(2.0 * eps + std::exp2(-xi));
}

double SecurityBudget::eps_cor() const { return std::exp2(-xi_prime); }

double SecurityBudget::eps_tot() const { return eps_sec() + eps_cor() + eps_ka; }

void ProtocolParams::validate() const {
  require(std::isfinite(mu) && mu >= 0.0, "mu", "must be finite and >= 0");
  require(m_slices >= 2 && m_slices % 2 == 0, "m_slices", "must be an even integer >= 2");
  require(n_rounds >= 1.0, "n_rounds", "must be >= 1");
  require(open_unit(p_s), "p_s", "must lie in (0,1)");
  require(f >= 1.0, "f", "must be >= 1");
  budget.validate();
}

}  // namespace pmqkd
