#include <catch_amalgamated.hpp>

#include <cmath>

#include "zvl/dynamics.hpp"
#include "zvl/exact_solutions.hpp"

using namespace zvl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Fourth-order central difference in t of the exact solution, minus the rhs.
template <class Make>
double time_residual(Make make, const Grid& g, const ModelParams& prm, double t) {
  const double h = 1e-3;
  const auto a = make(t - 2 * h), b = make(t - h), c = make(t + h), d = make(t + 2 * h);
  const auto r = rhs(make(t), g, prm);
  auto fd = [&](auto pa, auto pb, auto pc, auto pd) {
    return (pa - 8.0 * pb + 8.0 * pc - pd) / (12.0 * h);
  };
  double worst = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    worst = std::max(worst, std::abs(fd(a.u[j], b.u[j], c.u[j], d.u[j]) - r.u[j]));
    worst = std::max(worst, std::abs(fd(a.n[j], b.n[j], c.n[j], d.n[j]) - r.n[j]));
    worst = std::max(worst, std::abs(fd(a.v[j], b.v[j], c.v[j], d.v[j]) - r.v[j]));
  }
  return worst;
}

}  // namespace

TEST_CASE("validity conditions", "[exact]") {
  CHECK(wu_valid({1.0, 0.5, 0.0}));
  CHECK(wu_valid({-0.0625, 0.5, 0.0}));  // 4w + c^2 = 0
  CHECK_FALSE(wu_valid({1.0, 1.0, 0.0}));
  CHECK_FALSE(wu_valid({1.0, 2.0, 0.0}));
  CHECK_FALSE(wu_valid({-1.0, 0.0, 0.0}));
  CHECK(chen_valid({0.3, 0.4, 0.0}));
  CHECK_FALSE(chen_valid({0.8, 0.6, 0.0}));
  const Grid g(10.0, 64);
  CHECK_THROWS_AS(wu_soliton({1.0, 2.0, 0.0}, 0.0, g), Error);
  CHECK_THROWS_AS(chen_soliton({0.9, 0.9, 0.0}, 0.0, g), Error);
}

TEST_CASE("wrap maps into the box", "[exact]") {
  CHECK_THAT(wrap(0.5, 1.0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(wrap(1.5, 1.0), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(wrap(-2.5, 1.0), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(wrap(-1.0, 1.0), WithinAbs(-1.0, 1e-15));
}

TEST_CASE("wu profile: amplitude, depth, momentum-carrying phase", "[exact]") {
  const Grid g(30.0, 512);
  const SolitonParams p{1.0, 0.5, 0.0};
  const auto s = wu_soliton(p, 0.0, g);
  // At the centre: |u| = A, n = -(2w + c^2/2).
  const int mid = g.size() / 2;
  CHECK_THAT(std::abs(s.u[mid]), WithinRel(std::sqrt((4 + 0.25) * (1 - 0.25) / 2), 1e-14));
  CHECK_THAT(s.n[mid], WithinRel(-(2 + 0.125), 1e-14));
  CHECK_THAT(s.v[mid], WithinRel(0.5 * s.n[mid], 1e-14));
}

TEST_CASE("wu soliton solves the Zakharov system", "[exact]") {
  const Grid g(40.0, 1024);
  const ModelParams prm;
  for (const SolitonParams p : {SolitonParams{1.0, 0.5, 0.0}, SolitonParams{0.5, -0.3, 2.0},
                                SolitonParams{1.0, 0.0, 0.0}}) {
    auto make = [&](double t) { return wu_soliton(p, t, g); };
    CHECK(time_residual(make, g, prm, 0.7) < 1e-8);
  }
}

TEST_CASE("chen soliton solves the KGZ system", "[exact]") {
  const Grid g(40.0, 1024);
  ModelParams prm;
  prm.system = System::kgz;
  for (const SolitonParams p : {SolitonParams{0.3, 0.4, 0.0}, SolitonParams{0.0, 0.0, 0.0},
                                SolitonParams{-0.5, 0.2, 1.0}}) {
    auto make = [&](double t) { return chen_soliton(p, t, g); };
    CHECK(time_residual(make, g, prm, 0.3) < 1e-8);
    // u_t carried by the state matches the time derivative of u.
    const double h = 1e-3;
    const auto a = make(0.3 - h), b = make(0.3 + h), s = make(0.3);
    double worst = 0.0;
    for (int j = 0; j < g.size(); ++j)
      worst = std::max(worst, std::abs((b.u[j] - a.u[j]) / (2 * h) - s.ut[j]));
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("nls ground state", "[exact]") {
  const Grid g(30.0, 512);
  ModelParams prm;
  prm.system = System::nls;
  const auto s = nls_soliton(0.0, g);
  const auto r = rhs(s, g, prm);
  // u_t = i u for Q e^{it}.
  for (int j = 0; j < g.size(); ++j) CHECK(std::abs(r.u[j] - Complex(0, 1) * s.u[j]) < 1e-10);
}

TEST_CASE("odd packet hits the requested H1 norm", "[exact]") {
  const Grid g(64.0, 1024);
  const auto p = odd_packet_h1(0.01, 2.0, g);
  CHECK_THAT(p.h1, WithinRel(0.01, 1e-12));
  CHECK_THAT(h1_norm(p.state.u, g), WithinRel(0.01, 1e-12));
  // u = a x e^{-x^2/w^2}: ||u||^2 = a^2 w^3 sqrt(pi/2) / 4.
  const auto q = odd_packet(1.0, 2.0, g);
  CHECK_THAT(l2_norm(q.state.u, g), WithinRel(std::sqrt(8.0 * std::sqrt(std::numbers::pi / 2) / 4), 1e-12));
}

TEST_CASE("gaussian data", "[exact]") {
  const Grid g(20.0, 256);
  GaussianData d;
  d.center = 1.0;
  d.kick = 0.7;
  const auto s = gaussian_zakharov(d, g);
  CHECK_THAT(l2_norm(s.u, g), WithinRel(d.amp_u * std::pow(std::numbers::pi / 2, 0.25) * std::sqrt(d.width), 1e-12));
  CHECK(gaussian_kgz(d, g).ut == ComplexField(g.size()));
  CHECK(gaussian_nls(d, g).u == s.u);
}
