#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zvl/dynamics.hpp"
#include "zvl/grid.hpp"
#include "zvl/states.hpp"
#include "zvl/weights.hpp"

namespace zvl {

inline double mass(const ComplexField& u, const Grid& g) { return integrate(abs2(u), g); }
inline double mass(const ZakharovState& s, const Grid& g) { return mass(s.u, g); }
inline double mass(const KGZState& s, const Grid& g) { return mass(s.u, g); }
inline double mass(const NLSState& s, const Grid& g) { return mass(s.u, g); }

/// int |u_x|^2 + (n^2 + v^2)/2 + n|u|^2. Independent of alpha.
inline double energy_zakharov(const ZakharovState& s, const Grid& g) {
  const ComplexField ux = spectral_derivative(s.u, g);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double u2 = std::norm(s.u[j]);
    acc += std::norm(ux[j]) + 0.5 * (s.n[j] * s.n[j] + s.v[j] * s.v[j]) + s.n[j] * u2;
  }
  return acc * g.dx();
}

/// Im int u conj(u_x) - (1/alpha) int v n.
inline double momentum_zakharov(const ZakharovState& s, const Grid& g, double alpha = 1.0) {
  const ComplexField ux = spectral_derivative(s.u, g);
  double a = 0.0, b = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    a += (s.u[j] * std::conj(ux[j])).imag();
    b += s.v[j] * s.n[j];
  }
  return (a - b / alpha) * g.dx();
}

/// int c^2|u|^2 + |u_x|^2 + c^{-2}|u_t|^2 + (n^2+v^2)/2 + n|u|^2.
inline double energy_kgz(const KGZState& s, const Grid& g, double c = 1.0) {
  const ComplexField ux = spectral_derivative(s.u, g);
  const double c2 = c * c;
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double u2 = std::norm(s.u[j]);
    acc += c2 * u2 + std::norm(ux[j]) + std::norm(s.ut[j]) / c2 +
           0.5 * (s.n[j] * s.n[j] + s.v[j] * s.v[j]) + s.n[j] * u2;
  }
  return acc * g.dx();
}

/// c^{-2} Re int conj(u_t) u_x - (1/(2 alpha)) int v n.
inline double momentum_kgz(const KGZState& s, const Grid& g, double c = 1.0, double alpha = 1.0) {
  const ComplexField ux = spectral_derivative(s.u, g);
  double a = 0.0, b = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    a += (std::conj(s.ut[j]) * ux[j]).real();
    b += s.v[j] * s.n[j];
  }
  return (a / (c * c) - b / (2.0 * alpha)) * g.dx();
}

/// int |u_x|^2 - sign (2/(p+1)) int |u|^{p+1}.
inline double energy_nls(const NLSState& s, const Grid& g, double p = 3.0, int sign = 1) {
  const ComplexField ux = spectral_derivative(s.u, g);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j)
    acc += std::norm(ux[j]) - sign * 2.0 / (p + 1.0) * std::pow(std::abs(s.u[j]), p + 1.0);
  return acc * g.dx();
}

inline double momentum_nls(const NLSState& s, const Grid& g) {
  const ComplexField ux = spectral_derivative(s.u, g);
  double a = 0.0;
  for (int j = 0; j < g.size(); ++j) a += (s.u[j] * std::conj(ux[j])).imag();
  return a * g.dx();
}

struct Conserved {
  double mass = 0.0;
  double energy = 0.0;
  double momentum = 0.0;
};

inline Conserved conserved(const ZakharovState& s, const Grid& g, const ModelParams& prm) {
  return {mass(s, g), energy_zakharov(s, g), momentum_zakharov(s, g, prm.alpha)};
}
inline Conserved conserved(const KGZState& s, const Grid& g, const ModelParams& prm) {
  return {mass(s, g), energy_kgz(s, g, prm.c), momentum_kgz(s, g, prm.c, prm.alpha)};
}
inline Conserved conserved(const NLSState& s, const Grid& g, const ModelParams& prm) {
  return {mass(s, g), energy_nls(s, g, prm.p, prm.sign), momentum_nls(s, g)};
}

/// Samples phi' on the grid; throws negative_weight if it dips below zero.
inline RealField weight_density(const WeightProfile& w, const Grid& g) {
  RealField d(g.size());
  for (int j = 0; j < g.size(); ++j) {
    d[j] = w.dphi(g.node(j));
    if (d[j] < 0)
      throw Error(Errc::negative_weight, std::string(family_name(w.family())) +
                                             " has phi' < 0 at x=" + std::to_string(g.node(j)));
  }
  return d;
}

template <class Field>
double weighted_l2(const Field& f, const WeightProfile& w, const Grid& g) {
  g.check(f.size());
  const RealField d = weight_density(w, g);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) acc += d[j] * std::norm(f[j]);
  return acc * g.dx();
}

template <class Field>
double weighted_h1(const Field& f, const WeightProfile& w, const Grid& g) {
  g.check(f.size());
  const RealField d = weight_density(w, g);
  const Field fx = spectral_derivative(f, g);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) acc += d[j] * (std::norm(fx[j]) + std::norm(f[j]));
  return acc * g.dx();
}

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

inline constexpr double kGagliardoNirenberg = std::numbers::sqrt3 / 3.0;

/// int |u|^4 against (sqrt3/3) ||u_x|| ||u||^3.
inline InequalityCheck gn_quartic_check(const ComplexField& u, const Grid& g) {
  const ComplexField ux = spectral_derivative(u, g);
  double q = 0.0;
  for (const auto& z : u) q += std::norm(z) * std::norm(z);
  q *= g.dx();
  const double m = l2_norm(u, g);
  const double rhs = kGagliardoNirenberg * l2_norm(ux, g) * m * m * m;
  return {q, rhs, q <= rhs * (1.0 + 1e-10)};
}

struct EnergyBoundCheck {
  double lhs = 0.0;      // int |u_x|^2 + (v^2 + n^2)/2
  double bound = 0.0;    // 2 E0 + (sqrt3/6) M0^3
  bool ok = true;
  double full_lhs = 0.0;    // lhs + int |u|^2
  double full_bound = 0.0;  // bound + M0
  double sharp_bound = 0.0;  // 2 E0 + M0^3 / 3
  bool sharp_ok = true;
};

inline EnergyBoundCheck energy_bound_check(const ZakharovState& s, const Grid& g, double M0,
                                           double E0) {
  const ComplexField ux = spectral_derivative(s.u, g);
  double lhs = 0.0;
  for (int j = 0; j < g.size(); ++j)
    lhs += std::norm(ux[j]) + 0.5 * (s.v[j] * s.v[j] + s.n[j] * s.n[j]);
  lhs *= g.dx();
  EnergyBoundCheck r;
  r.lhs = lhs;
  r.bound = 2.0 * E0 + std::numbers::sqrt3 / 6.0 * M0 * M0 * M0;
  r.ok = lhs <= r.bound + 1e-12 * std::max(1.0, std::abs(r.bound));
  r.full_lhs = lhs + mass(s, g);
  r.full_bound = r.bound + M0;
  r.sharp_bound = 2.0 * E0 + M0 * M0 * M0 / 3.0;
  r.sharp_ok = lhs <= r.sharp_bound + 1e-12 * std::max(1.0, std::abs(r.sharp_bound));
  return r;
}

/// (1/2) int |u_t|^2 + |u_x|^2 + |u|^2 + n^2 + v^2 against 2 E0 + (sqrt3/3) ||u(t)||^6 (c = 1).
inline InequalityCheck kgz_energy_bound_check(const KGZState& s, const Grid& g, double E0) {
  const ComplexField ux = spectral_derivative(s.u, g);
  double lhs = 0.0;
  for (int j = 0; j < g.size(); ++j)
    lhs += std::norm(s.ut[j]) + std::norm(ux[j]) + std::norm(s.u[j]) + s.n[j] * s.n[j] +
           s.v[j] * s.v[j];
  lhs *= 0.5 * g.dx();
  const double m = mass(s, g);
  const double bound = 2.0 * E0 + std::numbers::sqrt3 / 3.0 * m * m * m;
  return {lhs, bound, lhs <= bound + 1e-12 * std::max(1.0, std::abs(bound))};
}

inline double h2_norm(const ComplexField& u, const Grid& g) {
  const ComplexField ux = spectral_derivative(u, g);
  const ComplexField uxx = spectral_derivative(u, g, 2);
  const double a = l2_norm(u, g), b = l2_norm(ux, g), c = l2_norm(uxx, g);
  return std::sqrt(a * a + b * b + c * c);
}

/// Sum of |f|^2 dx over nodes in [lo, hi].
template <class Field>
double sq_norm_on(const Field& f, const Grid& g, const Interval& I) {
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    if (x >= I.lo && x <= I.hi) acc += std::norm(f[j]);
  }
  return acc * g.dx();
}

template <class Field>
double l2_on(const Field& f, const Grid& g, const Interval& I) {
  return std::sqrt(sq_norm_on(f, g, I));
}

/// L2 norm over [lo, hi] and its mirror image.
template <class Field>
double l2_on_mirrored(const Field& f, const Grid& g, const Interval& I) {
  return std::sqrt(sq_norm_on(f, g, I) + sq_norm_on(f, g, Interval{-I.hi, -I.lo}));
}

template <class Field>
double linf_on(const Field& f, const Grid& g, const Interval& I) {
  double m = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    if (x >= I.lo && x <= I.hi) m = std::max(m, std::abs(f[j]));
  }
  return m;
}

}  // namespace zvl
