#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "perimeter_phase/potential.hpp"

using perimeter_phase::DoubleWell;
using perimeter_phase::Error;

TEST_CASE("w examples") {
  CHECK(DoubleWell::w(0.0) == 1.0);
  CHECK(DoubleWell::w(2.0) == 0.0);
  CHECK(DoubleWell::w(0.5) == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK(DoubleWell::w(-1.0) == 0.0);
}

TEST_CASE("w_prime examples and finite differences") {
  CHECK(DoubleWell::w_prime(0.0) == 0.0);
  CHECK(DoubleWell::w_prime(1.0) == 0.0);
  CHECK(DoubleWell::w_prime(0.5) == doctest::Approx(-1.5));
  const double h = 1e-4;
  for (double t = -0.99; t <= 0.99; t += 0.01) {
    const double fd = (DoubleWell::w(t + h) - DoubleWell::w(t - h)) / (2 * h);
    CHECK(std::abs(DoubleWell::w_prime(t) - fd) <= 10 * h * h);
  }
}

TEST_CASE("h examples") {
  CHECK(DoubleWell::h(0.0) == 0.0);
  CHECK(DoubleWell::h(10.0) == doctest::Approx(4.0 / 3.0));
  const double q = oracle::integrate([](double s) { return 2.0 * std::sqrt(oracle::well(s)); }, 0, 1);
  CHECK(std::abs(DoubleWell::h(1.0) - q) <= 1e-10);
  CHECK(DoubleWell::h(-0.3) == -DoubleWell::h(0.3));
}

TEST_CASE("c0 agrees with adaptive quadrature") {
  const double q =
      2.0 * oracle::integrate([](double s) { return 2.0 * std::sqrt(oracle::well(s)); }, 0.0, 1.0);
  CHECK(std::abs(DoubleWell::c0() - q) <= 1e-9);
  CHECK(DoubleWell::c0() == 2.0 * DoubleWell::h(1.0));
  CHECK(DoubleWell::c0() / 2 == DoubleWell::h(1.0));
  CHECK(perimeter_phase::kSurfaceTension == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("h_tilde examples") {
  CHECK(DoubleWell::h_tilde(1.0) == 1.0);
  CHECK(DoubleWell::h_tilde(-1.0) == -1.0);
  CHECK(DoubleWell::h_tilde(0.5) == doctest::Approx(0.6875).epsilon(1e-15));
  CHECK(DoubleWell::h_tilde(3.0) == 1.0);
  const double q = oracle::integrate([](double s) { return 2.0 * std::sqrt(oracle::well(s)); }, 0, 0.5);
  CHECK(std::abs(DoubleWell::h_tilde(0.5) - 2.0 / DoubleWell::c0() * q) <= 1e-10);
}

TEST_CASE("h_tilde_inverse examples and domain") {
  CHECK(DoubleWell::h_tilde_inverse(0.0) == doctest::Approx(0.0));
  CHECK(DoubleWell::h_tilde_inverse(1.0) == 1.0);
  CHECK(std::abs(DoubleWell::h_tilde_inverse(0.6875) - 0.5) <= 1e-12);
  CHECK_THROWS_AS(DoubleWell::h_tilde_inverse(1.5), Error);
  try {
    DoubleWell::h_tilde_inverse(-1.01);
  } catch (const Error& e) {
    CHECK(e.code() == perimeter_phase::ErrorCode::domain);
  }
}

TEST_CASE("property: w nonnegative, zero exactly outside (-1, 1)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const double t = dist(rng);
    const double w = DoubleWell::w(t);
    CHECK(w >= 0.0);
    CHECK((w == 0.0) == (std::abs(t) >= 1.0));
  }
}

TEST_CASE("property: h monotone") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    double a = dist(rng), b = dist(rng);
    if (a > b) std::swap(a, b);
    CHECK(DoubleWell::h(a) <= DoubleWell::h(b));
  }
}

TEST_CASE("property: inverse round trip") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double y = dist(rng);
    CHECK(std::abs(DoubleWell::h_tilde(DoubleWell::h_tilde_inverse(y)) - y) <= 1e-10);
  }
}

TEST_CASE("array overloads match scalar forms") {
  Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(41, -2.0, 2.0);
  const Eigen::ArrayXd w = DoubleWell::w(t);
  const Eigen::ArrayXd g = DoubleWell::h_tilde(t);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    CHECK(w[i] == DoubleWell::w(t[i]));
    CHECK(g[i] == DoubleWell::h_tilde(t[i]));
  }
}
