#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "zvl/grid.hpp"

using namespace zvl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grid geometry", "[grid]") {
  const Grid g(10.0, 64);
  CHECK(g.size() == 64);
  CHECK_THAT(g.dx(), WithinRel(20.0 / 64, 1e-15));
  CHECK(g.node(0) == -10.0);
  CHECK(g.node(32) == 0.0);
  for (int j = 1; j < 64; ++j) CHECK(g.node(g.reflect(j)) == -g.node(j));
  CHECK(g.reflect(0) == 0);
  CHECK_THAT(g.wavenumbers()[1], WithinRel(std::numbers::pi / 10.0, 1e-15));
  CHECK_THAT(g.wavenumbers()[63], WithinRel(-std::numbers::pi / 10.0, 1e-15));
  CHECK_THAT(g.k_max(), WithinRel(32 * std::numbers::pi / 10.0, 1e-15));
}

TEST_CASE("grid rejects bad sizes", "[grid]") {
  CHECK_THROWS_AS(Grid(0.0, 64), Error);
  CHECK_THROWS_AS(Grid(-1.0, 64), Error);
  CHECK_THROWS_AS(Grid(1.0, 100), Error);
  CHECK_THROWS_AS(Grid(1.0, 8), Error);
  try {
    Grid(1.0, 100);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_parameter);
  }
}

TEST_CASE("fft round trip", "[grid]") {
  const Grid g(5.0, 128);
  const ComplexField f = sample_complex(g, [](double x) {
    return Complex(std::exp(-x * x), std::sin(x) * std::exp(-x * x / 2));
  });
  const ComplexField back = g.backward(g.forward(f));
  for (int j = 0; j < g.size(); ++j) CHECK(std::abs(back[j] - f[j]) < 1e-14);
}

TEST_CASE("spectral derivative of resolved trig modes is exact", "[grid]") {
  const double L = 7.0;
  const Grid g(L, 64);
  const double k = 3 * std::numbers::pi / L;
  const RealField f = sample(g, [&](double x) { return std::sin(k * x); });
  const RealField d1 = spectral_derivative(f, g);
  const RealField d2 = spectral_derivative(f, g, 2);
  const RealField d3 = spectral_derivative(f, g, 3);
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    CHECK_THAT(d1[j], WithinAbs(k * std::cos(k * x), 1e-12));
    CHECK_THAT(d2[j], WithinAbs(-k * k * std::sin(k * x), 1e-12));
    CHECK_THAT(d3[j], WithinAbs(-k * k * k * std::cos(k * x), 1e-11));
  }
}

TEST_CASE("spectral derivative of a gaussian converges spectrally", "[grid]") {
  const Grid g(12.0, 256);
  const RealField f = sample(g, [](double x) { return std::exp(-x * x); });
  const RealField d2 = spectral_derivative(f, g, 2);
  double err = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    err = std::max(err, std::abs(d2[j] - (4 * x * x - 2) * std::exp(-x * x)));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("odd derivative orders drop the nyquist mode", "[grid]") {
  const Grid g(1.0, 16);
  RealField alt(16);
  for (int j = 0; j < 16; ++j) alt[j] = j % 2 ? -1.0 : 1.0;
  for (double v : spectral_derivative(alt, g)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("quadrature", "[grid]") {
  const Grid g(30.0, 512);
  const RealField s2 = sample(g, [](double x) { return 1.0 / std::pow(std::cosh(x), 2); });
  CHECK_THAT(integrate(s2, g), WithinRel(2.0, 1e-13));
  const ComplexField z = sample_complex(g, [](double x) { return Complex(0.0, std::exp(-x * x)); });
  CHECK_THAT(integrate(z, g).imag(), WithinRel(std::sqrt(std::numbers::pi), 1e-13));
  CHECK_THAT(l2_norm(z, g), WithinRel(std::pow(std::numbers::pi / 2, 0.25), 1e-13));
}

TEST_CASE("zero-mean antiderivative", "[grid]") {
  const Grid g(10.0, 256);
  const RealField f = sample(g, [](double x) { return -2 * x * std::exp(-x * x); });
  const RealField F = antiderivative_zero_mean(f, g);
  // exp(-x^2) minus its mean over the box.
  const double mean = std::sqrt(std::numbers::pi) / 20.0;
  for (int j = 0; j < g.size(); ++j)
    CHECK_THAT(F[j], WithinAbs(std::exp(-g.node(j) * g.node(j)) - mean, 1e-12));
  const RealField ones(256, 1.0);
  try {
    antiderivative_zero_mean(ones, g);
    FAIL("expected nonzero_mean");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::nonzero_mean);
  }
}

TEST_CASE("two-thirds dealiasing", "[grid]") {
  const Grid g(std::numbers::pi, 32);
  RealField f = sample(g, [](double x) { return std::cos(2 * x) + std::cos(12 * x); });
  dealias_two_thirds(f, g);
  for (int j = 0; j < g.size(); ++j) CHECK_THAT(f[j], WithinAbs(std::cos(2 * g.node(j)), 1e-14));
}
