#include <catch2/catch.hpp>

#include "helf/elliptic.hpp"
#include "support.hpp"

using namespace helf;

TEST_CASE("degenerate moduli and u = 0", "[elliptic]") {
  for (double p : {0.0, 0.3, 0.7, 0.95, 1.0}) {
    CHECK(jacobi_dn(0.0, p) == Approx(1.0));
    CHECK(jacobi_cn(0.0, p) == Approx(1.0));
  }
  for (double u : {-2.0, -0.5, 0.3, 1.7}) {
    CHECK(jacobi_cn(u, 0.0) == Approx(std::cos(u)));
    CHECK(jacobi_dn(u, 0.0) == Approx(1.0));
    CHECK(jacobi_cn(u, 1.0) == Approx(1.0 / std::cosh(u)));
    CHECK(jacobi_dn(u, 1.0) == Approx(1.0 / std::cosh(u)));
  }
}

TEST_CASE("agreement with the independent ODE oracle", "[elliptic]") {
  // 50 x 5 grid in (u, p), including the degenerate moduli.
  const double p_values[] = {0.0, 0.3, 0.7, 0.95, 1.0};
  double worst = 0.0;
  for (double p : p_values) {
    for (int i = 0; i < 50; ++i) {
      const double u = -5.0 + 10.0 * i / 49.0;
      const auto oracle = testsupport::jacobi_ode_oracle(u, p);
      const auto v = jacobi_elliptic(u, p);
      worst = std::max(worst, std::abs(v.cn - oracle.cn));
      worst = std::max(worst, std::abs(v.dn - oracle.dn));
      worst = std::max(worst, std::abs(v.sn - oracle.sn));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("ranges and periodicity", "[elliptic]") {
  for (double p : {0.2, 0.6, 0.9}) {
    const double K = elliptic_K(p);
    const double floor_dn = std::sqrt(1.0 - p * p);
    for (int i = 0; i <= 40; ++i) {
      const double u = -8.0 + 16.0 * i / 40.0;
      const auto v = jacobi_elliptic(u, p);
      CHECK(v.dn >= floor_dn - 1e-12);
      CHECK(v.dn <= 1.0 + 1e-12);
      CHECK(std::abs(v.cn) <= 1.0 + 1e-12);
      CHECK(jacobi_cn(u + 4.0 * K, p) == Approx(v.cn).margin(1e-9));
      CHECK(jacobi_dn(u + 2.0 * K, p) == Approx(v.dn).margin(1e-9));
    }
  }
  CHECK(elliptic_K(0.0) == Approx(pi / 2.0));
  CHECK(elliptic_E(0.0) == Approx(pi / 2.0));
  CHECK(elliptic_E(1.0) == Approx(1.0));
}
