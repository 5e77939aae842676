#pragma once

#include <cmath>
#include <string>

#include "zvl/grid.hpp"
#include "zvl/states.hpp"

namespace zvl {

struct SolitonParams {
  double omega = 1.0;
  double speed = 0.0;  // travelling speed; not the plasma frequency
  double center = 0.0;
};

/// Maps y into [-L, L).
inline double wrap(double y, double half_length) {
  const double period = 2.0 * half_length;
  double r = std::fmod(y + half_length, period);
  if (r < 0) r += period;
  return r - half_length;
}

inline double sech(double x) { return 1.0 / std::cosh(x); }

inline bool wu_valid(const SolitonParams& p) {
  return 4.0 * p.omega + p.speed * p.speed >= 0.0 && 1.0 - p.speed * p.speed > 0.0;
}

inline bool chen_valid(const SolitonParams& p) {
  return 1.0 - p.speed * p.speed - p.omega * p.omega > 0.0;
}

/// Zakharov travelling wave (alpha = 1):
///   u = A sech(k xi) exp(i(q xi + (w + c^2/2) t)),  xi = x - x0 - c t,
///   n = -(2w + c^2/2) sech^2(k xi),  v = c n,
/// with q = c/2, k = sqrt(4w + c^2)/2, A^2 = (4w + c^2)(1 - c^2)/2.
inline ZakharovState wu_soliton(const SolitonParams& p, double t, const Grid& g) {
  if (!wu_valid(p))
    throw Error(Errc::invalid_parameter,
                "Wu soliton needs 4*omega + speed^2 >= 0 and 1 - speed^2 > 0");
  const double c = p.speed;
  const double kappa = std::sqrt(4.0 * p.omega + c * c) / 2.0;
  const double amp = std::sqrt((4.0 * p.omega + c * c) * (1.0 - c * c) / 2.0);
  const double q = c / 2.0;
  const double beta = p.omega + c * c / 2.0;
  const double depth = 2.0 * p.omega + c * c / 2.0;

  ZakharovState s = zero_zakharov(g);
  s.t = t;
  for (int j = 0; j < g.size(); ++j) {
    const double xi = wrap(g.node(j) - p.center - c * t, g.half_length());
    const double sh = sech(kappa * xi);
    s.u[j] = amp * sh * std::polar(1.0, q * xi + beta * t);
    s.n[j] = -depth * sh * sh;
    s.v[j] = c * s.n[j];
  }
  return s;
}

/// KGZ travelling wave (alpha = c_plasma = 1):
///   u = e^{-i w t} e^{i q xi} U(xi),  U = sqrt(2(1-c^2-w^2)) sech(k xi),  xi = x - x0 - c t,
///   q = w c/(1-c^2),  k = sqrt(1-c^2-w^2)/(1-c^2),
///   u_t = -(i w + c d_x) u,  n = -2(1-c^2-w^2)/(1-c^2) sech^2(k xi),  v = c n.
inline KGZState chen_soliton(const SolitonParams& p, double t, const Grid& g) {
  if (!chen_valid(p))
    throw Error(Errc::invalid_parameter, "Chen soliton needs 1 - speed^2 - omega^2 > 0");
  const double c = p.speed;
  const double w = p.omega;
  const double gap = 1.0 - c * c - w * w;
  const double kappa = std::sqrt(gap) / (1.0 - c * c);
  const double amp = std::sqrt(2.0 * gap);
  const double q = w * c / (1.0 - c * c);
  const double depth = 2.0 * gap / (1.0 - c * c);
  const Complex i(0.0, 1.0);

  KGZState s = zero_kgz(g);
  s.t = t;
  for (int j = 0; j < g.size(); ++j) {
    const double xi = wrap(g.node(j) - p.center - c * t, g.half_length());
    const double sh = sech(kappa * xi);
    const double th = std::tanh(kappa * xi);
    const Complex phase = std::polar(1.0, q * xi - w * t);
    const Complex u = amp * sh * phase;
    const Complex ux = (i * q - kappa * th) * u;
    s.u[j] = u;
    s.ut[j] = -(i * w * u + c * ux);
    s.n[j] = -depth * sh * sh;
    s.v[j] = c * s.n[j];
  }
  return s;
}

/// Cubic focusing NLS ground state sqrt(2) sech(x) e^{it}.
inline NLSState nls_soliton(double t, const Grid& g) {
  NLSState s = zero_nls(g);
  s.t = t;
  for (int j = 0; j < g.size(); ++j)
    s.u[j] = std::sqrt(2.0) * sech(g.node(j)) * std::polar(1.0, t);
  return s;
}

inline double h1_norm(const ComplexField& u, const Grid& g) {
  const ComplexField ux = spectral_derivative(u, g);
  const double a = l2_norm(u, g), b = l2_norm(ux, g);
  return std::sqrt(a * a + b * b);
}

struct OddPacket {
  ZakharovState state;
  double h1 = 0.0;  // ||u||_{H^1} of the generated data
};

struct OddPacketKGZ {
  KGZState state;
  double h1 = 0.0;
};

/// u = a x e^{-x^2/w^2}, n = -a^2 e^{-x^2/w^2}, v = a^2 x e^{-x^2/w^2}.
inline OddPacket odd_packet(double amp, double width, const Grid& g) {
  if (!(amp >= 0) || !(width > 0))
    throw Error(Errc::invalid_parameter, "odd_packet needs amp >= 0 and width > 0");
  ZakharovState s = zero_zakharov(g);
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    const double e = std::exp(-x * x / (width * width));
    s.u[j] = amp * x * e;
    s.n[j] = -amp * amp * e;
    s.v[j] = amp * amp * x * e;
  }
  const double h1 = h1_norm(s.u, g);
  return {std::move(s), h1};
}

/// Odd packet whose u has the requested H^1 norm.
inline OddPacket odd_packet_h1(double target_h1, double width, const Grid& g) {
  const double unit = odd_packet(1.0, width, g).h1;
  return odd_packet(target_h1 / unit, width, g);
}

inline OddPacketKGZ odd_packet_kgz(double amp, double width, const Grid& g) {
  OddPacket z = odd_packet(amp, width, g);
  KGZState s{z.state.u, ComplexField(g.size()), z.state.n, z.state.v, 0.0};
  return {std::move(s), z.h1};
}

inline OddPacketKGZ odd_packet_kgz_h1(double target_h1, double width, const Grid& g) {
  const double unit = odd_packet(1.0, width, g).h1;
  return odd_packet_kgz(target_h1 / unit, width, g);
}

/// Generic localized data without symmetry:
/// u = a e^{-(x-x0)^2/w^2} e^{i k0 x}, n = b e^{-(x-x0)^2/w^2}, v = b (x-x0)/w e^{-(x-x0)^2/w^2}.
struct GaussianData {
  double amp_u = 0.5;
  double amp_n = 0.25;
  double width = 2.0;
  double center = 0.0;
  double kick = 0.0;
};

inline ZakharovState gaussian_zakharov(const GaussianData& d, const Grid& g) {
  ZakharovState s = zero_zakharov(g);
  for (int j = 0; j < g.size(); ++j) {
    const double y = (g.node(j) - d.center) / d.width;
    const double e = std::exp(-y * y);
    s.u[j] = d.amp_u * e * std::polar(1.0, d.kick * g.node(j));
    s.n[j] = d.amp_n * e;
    s.v[j] = d.amp_n * y * e;
  }
  return s;
}

inline KGZState gaussian_kgz(const GaussianData& d, const Grid& g) {
  ZakharovState z = gaussian_zakharov(d, g);
  return {z.u, ComplexField(g.size()), z.n, z.v, 0.0};
}

inline NLSState gaussian_nls(const GaussianData& d, const Grid& g) {
  return {gaussian_zakharov(d, g).u, 0.0};
}

}  // namespace zvl
