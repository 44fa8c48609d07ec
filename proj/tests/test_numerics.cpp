#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pmqkd/errors.hpp"
#include "pmqkd/numerics.hpp"

using namespace pmqkd;

TEST_CASE("binary entropy endpoints and symmetry maximum") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
}

TEST_CASE("binary entropy matches extended precision") {
  for (double x : {0.25, 1e-9, 0.0071, 0.18, 0.49}) {
    CHECK(binary_entropy(x) == doctest::Approx(oracle::binary_entropy(x)).epsilon(1e-14));
  }
  CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-15));
}

TEST_CASE("binary entropy rejects arguments outside [0,1]") {
  CHECK_THROWS_AS(binary_entropy(-1e-12), DomainError);
  CHECK_THROWS_AS(binary_entropy(1.0 + 1e-12), DomainError);
  CHECK_THROWS_AS(binary_entropy(std::nan("")), DomainError);
}

TEST_CASE("binary entropy is concave and symmetric on a grid") {
  const int n = 1000;
  for (int i = 1; i < n - 1; ++i) {
    const double a = static_cast<double>(i - 1) / (n - 1);
    const double b = static_cast<double>(i + 1) / (n - 1);
    const double mid = 0.5 * (a + b);
    CHECK(binary_entropy(mid) >= 0.5 * (binary_entropy(a) + binary_entropy(b)) - 1e-15);
    const double x = static_cast<double>(i) / (n - 1);
    CHECK(std::abs(binary_entropy(x) - binary_entropy(1.0 - x)) <= 1e-14);
  }
}

TEST_CASE("poisson pmf") {
  for (double mu : {0.0, 1e-4, 3.2e-3, 1.0, 50.0}) CHECK(poisson_pmf(mu, 0) == std::exp(-mu));
  CHECK(poisson_pmf(1.0, 1) == doctest::Approx(oracle::poisson(1.0, 1)).epsilon(1e-14));
  CHECK(poisson_pmf(1.0, 1) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(poisson_pmf(0.5, 7) == doctest::Approx(oracle::poisson(0.5, 7)).epsilon(1e-13));
  // Beyond the factorial overflow point.
  CHECK(std::isfinite(poisson_pmf(200.0, 200)));
  CHECK(poisson_pmf(200.0, 200) == doctest::Approx(oracle::poisson(200.0, 200)).epsilon(1e-11));

  double sum = 0.0;
  for (int k = 0; k <= 200; ++k) sum += poisson_pmf(3.2e-3, k);
  CHECK(std::abs(sum - 1.0) <= 1e-15);

  CHECK_THROWS_AS(poisson_pmf(-1.0, 0), DomainError);
  CHECK_THROWS_AS(poisson_pmf(1.0, -1), DomainError);
}

TEST_CASE("pseudo-Fock weight of the vacuum") {
  CHECK(pseudo_fock_weight(0.0, 8, 0).weight == 1.0);
  for (int k = 1; k < 8; ++k) CHECK(pseudo_fock_weight(0.0, 8, k).weight == 0.0);
}

TEST_CASE("pseudo-Fock weights normalize") {
  for (double mu : {1e-4, 1e-3, 3.2e-3, 1e-2, 0.5, 1.0}) {
    for (int m : {6, 8, 16}) {
      double sum = 0.0;
      for (int k = 0; k < m; ++k) sum += pseudo_fock_weight(mu, m, k).weight;
      CAPTURE(mu);
      CAPTURE(m);
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("pseudo-Fock weight matches brute-force series") {
  CHECK(pseudo_fock_weight(0.5, 8, 2).weight ==
        doctest::Approx(oracle::pseudo_fock_series(0.5, 8, 2)).epsilon(1e-13));
  CHECK(pseudo_fock_weight(3.0, 6, 4).weight ==
        doctest::Approx(oracle::pseudo_fock_series(3.0, 6, 4)).epsilon(1e-13));
  // Large mu: the series must run past the Poisson mode.
  CHECK(pseudo_fock_weight(40.0, 8, 3).weight ==
        doctest::Approx(oracle::pseudo_fock_series(40.0, 8, 3)).epsilon(1e-12));
}

TEST_CASE("pseudo-Fock weight dominates the Poisson term and approaches it for large M") {
  for (double mu : {1e-4, 1e-2, 0.1, 0.5}) {
    for (int k = 0; k < 8; ++k) CHECK(pseudo_fock_weight(mu, 8, k).weight >= poisson_pmf(mu, k));
  }
  for (double mu : {1e-4, 1e-3, 1e-2, 0.1}) {
    for (int k = 0; k <= 4; ++k) {
      CHECK(std::abs(pseudo_fock_weight(mu, 32, k).weight - poisson_pmf(mu, k)) < 1e-12);
    }
  }
}

TEST_CASE("pseudo-Fock weight domain") {
  CHECK_THROWS_AS(pseudo_fock_weight(0.1, 8, 8), DomainError);
  CHECK_THROWS_AS(pseudo_fock_weight(0.1, 8, -1), DomainError);
  CHECK_THROWS_AS(pseudo_fock_weight(0.1, 1, 0), DomainError);
  CHECK_THROWS_AS(pseudo_fock_weight(-0.1, 8, 0), DomainError);
}

TEST_CASE("closed-form pseudo-Fock bounds") {
  CHECK(pseudo_fock_weight_ub(0.0, 8, 0) == 1.0);
  CHECK(pseudo_fock_weight_ub(0.0, 8, 2) == 0.0);

  // Agreement with the printed closed forms, in both evaluation regimes.
  for (double mu : {1e-2, 0.1, 0.3, 0.49, 0.51, 1.0, 2.5}) {
    for (int k : {0, 2, 4, 6}) {
      CAPTURE(mu);
      CAPTURE(k);
      CHECK(pseudo_fock_weight_ub(mu, 8, k) ==
            doctest::Approx(oracle::pseudo_fock_closed_form(mu, k)).epsilon(1e-9));
    }
  }
}

TEST_CASE("closed-form bounds dominate the series") {
  for (double mu : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0}) {
    for (int m : {6, 8}) {
      for (int k = 0; k <= m - 2; k += 2) {
        CAPTURE(mu);
        CAPTURE(m);
        CAPTURE(k);
        CHECK(pseudo_fock_weight_ub(mu, m, k) >= pseudo_fock_weight(mu, m, k).weight);
      }
    }
  }
}

TEST_CASE("closed-form bounds reject unsupported inputs") {
  CHECK_THROWS_AS(pseudo_fock_weight_ub(0.1, 10, 8), DomainError);
  CHECK_THROWS_AS(pseudo_fock_weight_ub(0.1, 7, 0), DomainError);
  CHECK_THROWS_AS(pseudo_fock_weight_ub(0.1, 6, 6), DomainError);
  CHECK_THROWS_AS(pseudo_fock_weight_ub(0.1, 8, 3), DomainError);
}
