#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "zvl/grid.hpp"
#include "zvl/states.hpp"
#include "zvl/timeseries.hpp"

namespace zvl {

enum class System { zakharov, kgz, nls };

inline const char* system_name(System s) {
  switch (s) {
    case System::zakharov: return "zakharov";
    case System::kgz: return "kgz";
    case System::nls: return "nls";
  }
  return "?";
}

struct ModelParams {
  System system = System::zakharov;
  double alpha = 1.0;  // ion sound speed
  double c = 1.0;      // plasma frequency (KGZ)
  double p = 3.0;      // NLS power
  int sign = +1;       // +1 focusing
  bool dealias = false;

  void validate() const {
    if (!(alpha > 0)) throw Error(Errc::invalid_parameter, "alpha must be > 0");
    if (system == System::kgz && !(c > 0)) throw Error(Errc::invalid_parameter, "c must be > 0");
    if (system == System::nls) {
      if (!(p > 1 && p < 5)) throw Error(Errc::invalid_parameter, "p must lie in (1,5)");
      if (sign != 1 && sign != -1) throw Error(Errc::invalid_parameter, "sign must be +1 or -1");
    }
  }
};

enum class Scheme { rk4, strang_nls };

struct StepperConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::rk4;
  int record_every = 1;
  double t_final = 1.0;
  bool force = false;  // bypass the stability guard
};

template <class S>
constexpr System system_of() {
  if constexpr (std::is_same_v<S, ZakharovState>) return System::zakharov;
  else if constexpr (std::is_same_v<S, KGZState>) return System::kgz;
  else return System::nls;
}

namespace detail {

inline RealField product(const RealField& a, const RealField& b) {
  RealField out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

inline ComplexField product(const RealField& a, const ComplexField& b) {
  ComplexField out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

// Returns (-alpha v_x, -alpha (n + |u|^2)_x) using one transform pair.
inline std::pair<RealField, RealField> wave_rhs(const ComplexField& u, const RealField& n,
                                                const RealField& v, const Grid& g,
                                                const ModelParams& prm) {
  RealField w(n.size());
  for (std::size_t j = 0; j < n.size(); ++j) w[j] = n[j] + std::norm(u[j]);
  if (prm.dealias) dealias_two_thirds(w, g);
  auto [vx, wx] = spectral_derivative_pair(v, w, g);
  for (std::size_t j = 0; j < n.size(); ++j) {
    vx[j] *= -prm.alpha;
    wx[j] *= -prm.alpha;
  }
  return {std::move(vx), std::move(wx)};
}

template <class S, class Fn>
void zip_fields(S& a, const S& b, Fn&& fn) {
  auto fa = fields(a);
  auto fb = fields(b);
  [&]<std::size_t... I>(std::index_sequence<I...>) {
    (fn(std::get<I>(fa), std::get<I>(fb)), ...);
  }(std::make_index_sequence<std::tuple_size_v<decltype(fa)>>{});
}

template <class S, class Fn>
void for_fields(const S& a, Fn&& fn) {
  std::apply([&](const auto&... f) { (fn(f), ...); }, fields(a));
}

// y += h * k, field by field.
template <class S>
void axpy(S& y, double h, const S& k) {
  zip_fields(y, k, [h](auto& a, const auto& b) {
    for (std::size_t j = 0; j < a.size(); ++j) a[j] += h * b[j];
  });
}

template <class S>
std::vector<double> field_norms(const S& s) {
  std::vector<double> out;
  for_fields(s, [&](const auto& f) {
    double sq = 0.0;
    for (const auto& z : f) sq += std::norm(z);
    out.push_back(std::sqrt(sq));
  });
  return out;
}

}  // namespace detail

inline ZakharovState zakharov_rhs(const ZakharovState& s, const Grid& g, const ModelParams& prm) {
  ZakharovState d;
  d.t = s.t;
  ComplexField uxx = spectral_derivative(s.u, g, 2);
  ComplexField nu = detail::product(s.n, s.u);
  if (prm.dealias) dealias_two_thirds(nu, g);
  d.u.resize(s.u.size());
  for (std::size_t j = 0; j < s.u.size(); ++j) d.u[j] = Complex(0.0, 1.0) * (uxx[j] - nu[j]);
  std::tie(d.n, d.v) = detail::wave_rhs(s.u, s.n, s.v, g, prm);
  return d;
}

inline KGZState kgz_rhs(const KGZState& s, const Grid& g, const ModelParams& prm) {
  KGZState d;
  d.t = s.t;
  d.u = s.ut;
  const double c2 = prm.c * prm.c;
  ComplexField uxx = spectral_derivative(s.u, g, 2);
  ComplexField nu = detail::product(s.n, s.u);
  if (prm.dealias) dealias_two_thirds(nu, g);
  d.ut.resize(s.u.size());
  for (std::size_t j = 0; j < s.u.size(); ++j) d.ut[j] = c2 * (uxx[j] - c2 * s.u[j] - nu[j]);
  std::tie(d.n, d.v) = detail::wave_rhs(s.u, s.n, s.v, g, prm);
  return d;
}

inline NLSState nls_rhs(const NLSState& s, const Grid& g, const ModelParams& prm) {
  NLSState d;
  d.t = s.t;
  ComplexField uxx = spectral_derivative(s.u, g, 2);
  ComplexField nl(s.u.size());
  for (std::size_t j = 0; j < s.u.size(); ++j)
    nl[j] = prm.sign * std::pow(std::abs(s.u[j]), prm.p - 1.0) * s.u[j];
  if (prm.dealias) dealias_two_thirds(nl, g);
  d.u.resize(s.u.size());
  for (std::size_t j = 0; j < s.u.size(); ++j) d.u[j] = Complex(0.0, 1.0) * (uxx[j] + nl[j]);
  return d;
}

inline ZakharovState rhs(const ZakharovState& s, const Grid& g, const ModelParams& p) {
  return zakharov_rhs(s, g, p);
}
inline KGZState rhs(const KGZState& s, const Grid& g, const ModelParams& p) {
  return kgz_rhs(s, g, p);
}
inline NLSState rhs(const NLSState& s, const Grid& g, const ModelParams& p) {
  return nls_rhs(s, g, p);
}

/// Classical RK4. dt may be negative (backward integration).
template <class S>
S step_rk4(const S& s, const Grid& g, const ModelParams& prm, double dt) {
  const S k1 = rhs(s, g, prm);
  S y = s;
  detail::axpy(y, 0.5 * dt, k1);
  const S k2 = rhs(y, g, prm);
  y = s;
  detail::axpy(y, 0.5 * dt, k2);
  const S k3 = rhs(y, g, prm);
  y = s;
  detail::axpy(y, dt, k3);
  const S k4 = rhs(y, g, prm);

  S out = s;
  detail::axpy(out, dt / 6.0, k1);
  detail::axpy(out, dt / 3.0, k2);
  detail::axpy(out, dt / 3.0, k3);
  detail::axpy(out, dt / 6.0, k4);
  out.t = s.t + dt;

  const auto before = detail::field_norms(s);
  const auto after = detail::field_norms(out);
  double total = 0.0, grown = 0.0;
  for (double b : before) total += b;
  for (double a : after) {
    if (!std::isfinite(a)) throw UnstableStep(s.t, "non-finite field");
    grown += a;
  }
  if (grown > 10.0 * total) throw UnstableStep(s.t, "field norm grew more than 10x in one step");
  return out;
}

/// Strang splitting: half nonlinear phase, exact linear flow, half nonlinear phase.
inline NLSState step_strang_nls(const NLSState& s, const Grid& g, const ModelParams& prm,
                                double dt) {
  if (prm.system != System::nls)
    throw Error(Errc::invalid_parameter, "strang_nls applies to the nls system only");
  auto half_phase = [&](ComplexField& u) {
    for (auto& z : u) {
      const double rot = prm.sign * std::pow(std::abs(z), prm.p - 1.0) * 0.5 * dt;
      z *= std::polar(1.0, rot);
    }
  };
  NLSState out = s;
  half_phase(out.u);
  ComplexField uh = g.forward(out.u);
  for (int j = 0; j < g.size(); ++j) {
    const double k = g.wavenumbers()[j];
    uh[j] *= std::polar(1.0, -k * k * dt);
  }
  out.u = g.backward(uh);
  half_phase(out.u);
  out.t = s.t + dt;
  return out;
}

/// Largest dt the runner accepts for Schroedinger-type stiffness without --force.
inline double stability_limit(const Grid& g) {
  return 0.5 * g.dx() * g.dx() * (2.0 / std::numbers::pi);
}

template <class S>
struct Observer {
  std::vector<std::string> columns;
  std::function<void(const S&, std::vector<double>&)> record;
};

template <class S>
struct Trajectory {
  TimeSeries series;
  S final_state;
  bool truncated = false;
  std::string warning;
};

template <class S>
S step(const S& s, const Grid& g, const ModelParams& prm, double dt, Scheme scheme) {
  if constexpr (std::is_same_v<S, NLSState>) {
    if (scheme == Scheme::strang_nls) return step_strang_nls(s, g, prm, dt);
  }
  return step_rk4(s, g, prm, dt);
}

/// Integrates from state.t to cfg.t_final, recording every cfg.record_every
/// steps (and at the start). `stop`, if set, is consulted before each record
/// and truncates the run when it returns a non-empty reason.
template <class S>
Trajectory<S> evolve(S state, const Grid& g, const ModelParams& prm, const StepperConfig& cfg,
                     const std::vector<Observer<S>>& observers,
                     const std::function<std::string(const S&)>& stop = {}) {
  prm.validate();
  if (prm.system != system_of<S>())
    throw Error(Errc::invalid_parameter, "model system does not match the state type");
  if (!(cfg.dt > 0)) throw Error(Errc::invalid_parameter, "dt must be > 0");
  if (cfg.record_every < 1) throw Error(Errc::invalid_parameter, "record_every must be >= 1");
  if (cfg.scheme == Scheme::strang_nls && prm.system != System::nls)
    throw Error(Errc::invalid_parameter, "strang_nls applies to the nls system only");
  if (cfg.scheme == Scheme::rk4 && prm.system != System::kgz && !cfg.force &&
      cfg.dt > stability_limit(g))
    throw Error(Errc::invalid_parameter,
                "dt " + std::to_string(cfg.dt) + " exceeds the stability limit " +
                    std::to_string(stability_limit(g)) + " (use force to override)");
  const double t0 = state.t;
  const double span = cfg.t_final - t0;
  if (span < -1e-12 * std::max(1.0, std::abs(t0)))
    throw Error(Errc::invalid_parameter, "t_final precedes the initial time");
  const long long steps = std::max(0LL, std::llround(span / cfg.dt));

  std::vector<std::string> cols;
  for (const auto& o : observers) cols.insert(cols.end(), o.columns.begin(), o.columns.end());
  Trajectory<S> traj{TimeSeries(cols), state, false, {}};

  auto record = [&](const S& s) {
    std::vector<double> row{s.t};
    for (const auto& o : observers) {
      const std::size_t before = row.size();
      o.record(s, row);
      if (row.size() - before != o.columns.size())
        throw Error(Errc::invalid_parameter, "observer produced the wrong number of values");
    }
    traj.series.append(std::move(row));
  };

  auto should_stop = [&](const S& s) {
    if (!stop) return false;
    std::string why = stop(s);
    if (why.empty()) return false;
    traj.truncated = true;
    traj.warning = why;
    return true;
  };

  if (!should_stop(state)) {
    record(state);
    for (long long k = 1; k <= steps; ++k) {
      state = step(state, g, prm, cfg.dt, cfg.scheme);
      state.t = t0 + k * cfg.dt;
      if (k % cfg.record_every == 0 || k == steps) {
        if (should_stop(state)) break;
        record(state);
      }
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace zvl
