#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zvl/dynamics.hpp"
#include "zvl/functionals.hpp"
#include "zvl/grid.hpp"
#include "zvl/states.hpp"
#include "zvl/timeseries.hpp"
#include "zvl/weights.hpp"

namespace zvl {

enum class VirialKind {
  I_zak,
  K_mass,
  J_energy_zak,
  I_kgz,
  J_energy_kgz,
  local_mass_zak,
  local_energy_kgz,
};

inline const char* kind_name(VirialKind k) {
  switch (k) {
    case VirialKind::I_zak: return "I_zak";
    case VirialKind::K_mass: return "K_mass";
    case VirialKind::J_energy_zak: return "J_energy_zak";
    case VirialKind::I_kgz: return "I_kgz";
    case VirialKind::J_energy_kgz: return "J_energy_kgz";
    case VirialKind::local_mass_zak: return "local_mass_zak";
    case VirialKind::local_energy_kgz: return "local_energy_kgz";
  }
  return "?";
}

struct VirialSpec {
  VirialKind kind = VirialKind::I_zak;
  WeightProfile weight = WeightProfile::tanh_lambda(1.0);
  std::optional<Curve> curve;
  double alpha = 1.0;
  double c = 1.0;  // plasma frequency, KGZ kinds only
};

struct VirialRhs {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> terms;

  double term(const std::string& name) const {
    for (const auto& [k, v] : terms)
      if (k == name) return v;
    throw Error(Errc::invalid_parameter, "no virial term " + name);
  }
};

namespace detail {

inline bool time_dependent(VirialKind k) {
  return k == VirialKind::K_mass || k == VirialKind::J_energy_zak ||
         k == VirialKind::J_energy_kgz;
}

inline void check_spec(const VirialSpec& s, System sys) {
  const auto fam = s.weight.family();
  auto fail = [&](const std::string& why) {
    throw Error(Errc::incompatible_spec, std::string(kind_name(s.kind)) + ": " + why);
  };
  switch (s.kind) {
    case VirialKind::I_zak:
    case VirialKind::I_kgz:
      if (fam != WeightFamily::tanh_lambda && fam != WeightFamily::unit)
        fail("needs the tanh_lambda (or unit) weight");
      break;
    case VirialKind::K_mass:
    case VirialKind::J_energy_zak:
    case VirialKind::J_energy_kgz:
      if (fam != WeightFamily::cutoff && fam != WeightFamily::bump)
        fail("needs the cutoff or bump weight");
      if (!s.curve) fail("needs a curve");
      break;
    case VirialKind::local_mass_zak:
    case VirialKind::local_energy_kgz:
      if (fam != WeightFamily::sech_plain) fail("needs the sech_plain weight");
      break;
  }
  const bool zak_kind = s.kind == VirialKind::I_zak || s.kind == VirialKind::K_mass ||
                        s.kind == VirialKind::J_energy_zak ||
                        s.kind == VirialKind::local_mass_zak;
  const bool ok = sys == System::zakharov   ? zak_kind
                  : sys == System::kgz      ? !zak_kind
                                            : s.kind == VirialKind::K_mass;
  if (!ok) fail(std::string("not defined for the ") + system_name(sys) + " system");
  if (!(s.alpha > 0) || !(s.c > 0)) fail("alpha and c must be > 0");
}

struct Sampled {
  RealField phi, dphi, d3phi, y;
  double lambda = 1.0, dlambda = 0.0, mu = 0.0, dmu = 0.0;
};

inline Sampled sample_weight(const VirialSpec& s, const Grid& g, double t) {
  Sampled w;
  w.phi.resize(g.size());
  w.dphi.resize(g.size());
  w.d3phi.resize(g.size());
  w.y.resize(g.size());
  if (time_dependent(s.kind)) {
    w.lambda = s.curve->lambda(t);
    w.dlambda = s.curve->dlambda(t);
    w.mu = s.curve->mu(t);
    w.dmu = s.curve->dmu(t);
  }
  for (int j = 0; j < g.size(); ++j) {
    const double y = time_dependent(s.kind) ? (g.node(j) + w.mu) / w.lambda : g.node(j);
    const auto e = s.weight.eval(y);
    w.y[j] = y;
    w.phi[j] = e[0];
    w.dphi[j] = e[1];
    w.d3phi[j] = e[3];
  }
  return w;
}

// Shared -dI/dt structure of the two fixed-weight Morawetz identities.
inline VirialRhs morawetz_terms(const ComplexField& u, const ComplexField& ux, const RealField& n,
                                const RealField& v, const Sampled& w, const Grid& g) {
  double a = 0, b = 0, c = 0, d = 0, e = 0;
  for (int j = 0; j < g.size(); ++j) {
    const double u2 = std::norm(u[j]);
    a += w.dphi[j] * std::norm(ux[j]);
    b += w.d3phi[j] * u2;
    c += w.dphi[j] * n[j] * u2;
    d += w.dphi[j] * n[j] * n[j];
    e += w.dphi[j] * v[j] * v[j];
  }
  const double h = g.dx();
  VirialRhs r;
  r.terms = {{"ux_term", -2.0 * a * h},
             {"phi3_term", 0.5 * b * h},
             {"nu_term", -c * h},
             {"n2_term", -0.5 * d * h},
             {"v2_term", -0.5 * e * h}};
  return r;
}

inline void finish(VirialRhs& r) {
  r.total = 0.0;
  for (const auto& [k, v] : r.terms) r.total += v;
}

inline double mass_flux_density(const ComplexField& u, const ComplexField& ux, int j) {
  return (std::conj(u[j]) * ux[j]).imag();
}

}  // namespace detail

inline double eval(const VirialSpec& s, const ZakharovState& st, const Grid& g) {
  detail::check_spec(s, System::zakharov);
  const auto w = detail::sample_weight(s, g, st.t);
  const ComplexField ux = spectral_derivative(st.u, g);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double u2 = std::norm(st.u[j]);
    const double n = st.n[j], v = st.v[j];
    switch (s.kind) {
      case VirialKind::I_zak:
        acc += w.phi[j] * ((st.u[j] * std::conj(ux[j])).imag() - v * n / s.alpha);
        break;
      case VirialKind::local_mass_zak: acc += w.phi[j] * (u2 + v * v + n * n); break;
      case VirialKind::K_mass: acc += 0.5 * w.phi[j] * u2; break;
      case VirialKind::J_energy_zak:
        acc += w.phi[j] * (std::norm(ux[j]) + 0.5 * v * v + 0.5 * n * n + n * u2 + u2);
        break;
      default: break;
    }
  }
  return acc * g.dx();
}

inline double eval(const VirialSpec& s, const NLSState& st, const Grid& g) {
  detail::check_spec(s, System::nls);
  const auto w = detail::sample_weight(s, g, st.t);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) acc += 0.5 * w.phi[j] * std::norm(st.u[j]);
  return acc * g.dx();
}

inline double eval(const VirialSpec& s, const KGZState& st, const Grid& g) {
  detail::check_spec(s, System::kgz);
  const auto w = detail::sample_weight(s, g, st.t);
  const ComplexField ux = spectral_derivative(st.u, g);
  const double c2 = s.c * s.c;
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double u2 = std::norm(st.u[j]);
    const double n = st.n[j], v = st.v[j];
    const double e = c2 * u2 + std::norm(ux[j]) + std::norm(st.ut[j]) / c2;
    switch (s.kind) {
      case VirialKind::I_kgz:
        acc += 2.0 / c2 * w.phi[j] * (std::conj(ux[j]) * st.ut[j]).real() -
               w.phi[j] * v * n / s.alpha +
               w.dphi[j] / c2 * (std::conj(st.u[j]) * st.ut[j]).real();
        break;
      case VirialKind::local_energy_kgz: acc += 0.5 * w.phi[j] * (e + n * n + v * v); break;
      case VirialKind::J_energy_kgz:
        acc += 0.5 * w.phi[j] * (e + 0.5 * (n * n + v * v) + n * u2);
        break;
      default: break;
    }
  }
  return acc * g.dx();
}

/// d/dt of the functional, itemized.
inline VirialRhs rhs(const VirialSpec& s, const ZakharovState& st, const Grid& g) {
  detail::check_spec(s, System::zakharov);
  const auto w = detail::sample_weight(s, g, st.t);
  const ComplexField ux = spectral_derivative(st.u, g);
  const double h = g.dx();
  VirialRhs r;
  switch (s.kind) {
    case VirialKind::I_zak: r = detail::morawetz_terms(st.u, ux, st.n, st.v, w, g); break;
    case VirialKind::local_mass_zak: {
      double a = 0, b = 0, c = 0;
      for (int j = 0; j < g.size(); ++j) {
        a += w.dphi[j] * (st.u[j] * std::conj(ux[j])).imag();
        b += w.dphi[j] * st.v[j] * st.n[j];
        c += w.phi[j] * st.v[j] * (std::conj(st.u[j]) * ux[j]).real();
      }
      r.terms = {{"mass_flux", -2.0 * a * h},
                 {"wave_flux", 2.0 * s.alpha * b * h},
                 {"coupling", -4.0 * s.alpha * c * h}};
      break;
    }
    case VirialKind::K_mass: {
      double a = 0, b = 0, c = 0;
      for (int j = 0; j < g.size(); ++j) {
        const double u2 = std::norm(st.u[j]);
        a += w.dphi[j] * detail::mass_flux_density(st.u, ux, j);
        b += w.dphi[j] * u2;
        c += w.dphi[j] * w.y[j] * u2;
      }
      r.terms = {{"flux", a * h / w.lambda},
                 {"mu_term", w.dmu / (2.0 * w.lambda) * b * h},
                 {"lambda_term", -w.dlambda / (2.0 * w.lambda) * c * h}};
      break;
    }
    case VirialKind::J_energy_zak: {
      const ComplexField uxx = spectral_derivative(st.u, g, 2);
      double wave = 0, disp = 0, coup = 0, mflux = 0, b = 0, c = 0;
      for (int j = 0; j < g.size(); ++j) {
        const double u2 = std::norm(st.u[j]);
        const double n = st.n[j], v = st.v[j];
        const double im = detail::mass_flux_density(st.u, ux, j);
        wave += w.dphi[j] * (n + u2) * v;
        disp += w.dphi[j] * (std::conj(ux[j]) * uxx[j]).imag();
        coup += w.dphi[j] * n * im;
        mflux += w.dphi[j] * im;
        const double rho = std::norm(ux[j]) + 0.5 * v * v + 0.5 * n * n + n * u2 + u2;
        b += w.dphi[j] * rho;
        c += w.dphi[j] * w.y[j] * rho;
      }
      const double il = h / w.lambda;
      r.terms = {{"wave_flux", s.alpha * wave * il},
                 {"dispersive_flux", 2.0 * disp * il},
                 {"coupling_flux", 2.0 * coup * il},
                 {"mass_flux", 2.0 * mflux * il},
                 {"mu_term", w.dmu / w.lambda * b * h},
                 {"lambda_term", -w.dlambda / w.lambda * c * h}};
      break;
    }
    default: break;
  }
  detail::finish(r);
  return r;
}

inline VirialRhs rhs(const VirialSpec& s, const NLSState& st, const Grid& g) {
  detail::check_spec(s, System::nls);
  const auto w = detail::sample_weight(s, g, st.t);
  const ComplexField ux = spectral_derivative(st.u, g);
  const double h = g.dx();
  double a = 0, b = 0, c = 0;
  for (int j = 0; j < g.size(); ++j) {
    const double u2 = std::norm(st.u[j]);
    a += w.dphi[j] * detail::mass_flux_density(st.u, ux, j);
    b += w.dphi[j] * u2;
    c += w.dphi[j] * w.y[j] * u2;
  }
  VirialRhs r;
  r.terms = {{"flux", a * h / w.lambda},
             {"mu_term", w.dmu / (2.0 * w.lambda) * b * h},
             {"lambda_term", -w.dlambda / (2.0 * w.lambda) * c * h}};
  detail::finish(r);
  return r;
}

inline VirialRhs rhs(const VirialSpec& s, const KGZState& st, const Grid& g) {
  detail::check_spec(s, System::kgz);
  const auto w = detail::sample_weight(s, g, st.t);
  const ComplexField ux = spectral_derivative(st.u, g);
  const double h = g.dx();
  const double c2 = s.c * s.c;
  VirialRhs r;
  switch (s.kind) {
    case VirialKind::I_kgz: r = detail::morawetz_terms(st.u, ux, st.n, st.v, w, g); break;
    case VirialKind::local_energy_kgz: {
      double a = 0, b = 0, c = 0, d = 0;
      for (int j = 0; j < g.size(); ++j) {
        a += w.dphi[j] * (std::conj(st.ut[j]) * ux[j]).real();
        b += w.phi[j] * st.n[j] * (std::conj(st.u[j]) * st.ut[j]).real();
        c += w.dphi[j] * st.v[j] * st.n[j];
        d += w.phi[j] * st.v[j] * (std::conj(st.u[j]) * ux[j]).real();
      }
      r.terms = {{"energy_flux", -a * h},
                 {"source", -b * h},
                 {"wave_flux", s.alpha * c * h},
                 {"coupling", -2.0 * s.alpha * d * h}};
      break;
    }
    case VirialKind::J_energy_kgz: {
      double wave = 0, eflux = 0, b = 0, c = 0;
      for (int j = 0; j < g.size(); ++j) {
        const double u2 = std::norm(st.u[j]);
        const double n = st.n[j], v = st.v[j];
        wave += w.dphi[j] * (n + u2) * v;
        eflux += w.dphi[j] * (std::conj(st.ut[j]) * ux[j]).real();
        const double e = c2 * u2 + std::norm(ux[j]) + std::norm(st.ut[j]) / c2 +
                         0.5 * (n * n + v * v) + n * u2;
        b += w.dphi[j] * e;
        c += w.dphi[j] * w.y[j] * e;
      }
      const double il = h / w.lambda;
      r.terms = {{"wave_flux", 0.5 * s.alpha * wave * il},
                 {"energy_flux", -eflux * il},
                 {"mu_term", w.dmu / (2.0 * w.lambda) * b * h},
                 {"lambda_term", -w.dlambda / (2.0 * w.lambda) * c * h}};
      break;
    }
    default: break;
  }
  detail::finish(r);
  return r;
}

/// Observer recording `<prefix>_value`, `<prefix>_rhs` and each itemized term.
template <class S>
Observer<S> virial_observer(const VirialSpec& spec, const Grid& g, const std::string& prefix) {
  S probe;
  if constexpr (std::is_same_v<S, ZakharovState>) probe = zero_zakharov(g);
  else if constexpr (std::is_same_v<S, KGZState>) probe = zero_kgz(g);
  else probe = zero_nls(g);
  probe.t = spec.curve ? 2.0 : 0.0;
  std::vector<std::string> cols{prefix + "_value", prefix + "_rhs"};
  for (const auto& [name, v] : rhs(spec, probe, g).terms) cols.push_back(prefix + "_" + name);
  return {cols, [spec, g](const S& s, std::vector<double>& row) {
            row.push_back(eval(spec, s, g));
            const VirialRhs r = rhs(spec, s, g);
            row.push_back(r.total);
            for (const auto& term : r.terms) row.push_back(term.second);
          }};
}

/// 2 int phi'|u_x|^2 - (1/2) int phi'''|u|^2, summed over real and imaginary parts.
inline double bilinear_B(const ComplexField& u, const WeightProfile& w, const Grid& g) {
  if (w.family() != WeightFamily::tanh_lambda)
    throw Error(Errc::incompatible_spec, "bilinear_B needs the tanh_lambda weight");
  auto part = [&](const RealField& eta) {
    const RealField ex = spectral_derivative(eta, g);
    double acc = 0.0;
    for (int j = 0; j < g.size(); ++j) {
      const auto e = w.eval(g.node(j));
      acc += 2.0 * e[1] * ex[j] * ex[j] - 0.5 * e[3] * eta[j] * eta[j];
    }
    return acc * g.dx();
  };
  return part(real_part(u)) + part(imag_part(u));
}

inline double bilinear_B(const RealField& u, const WeightProfile& w, const Grid& g) {
  return bilinear_B(to_complex(u), w, g);
}

/// 2 int zeta_x^2 - lambda^{-2} int sech^2(x/lambda) zeta^2.
inline double bilinear_Bcal(const RealField& zeta, double lambda, const Grid& g) {
  const RealField zx = spectral_derivative(zeta, g);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double s = 1.0 / std::cosh(g.node(j) / lambda);
    acc += 2.0 * zx[j] * zx[j] - s * s * zeta[j] * zeta[j] / (lambda * lambda);
  }
  return acc * g.dx();
}

/// max over eta in {Re u, Im u} of |B(eta) - calB(omega eta)|.
inline double change_of_variables_check(const ComplexField& u, const WeightProfile& w,
                                        const Grid& g) {
  if (w.family() != WeightFamily::tanh_lambda)
    throw Error(Errc::incompatible_spec, "change of variables needs the tanh_lambda weight");
  double worst = 0.0;
  for (const RealField& eta : {real_part(u), imag_part(u)}) {
    RealField zeta(eta.size());
    for (int j = 0; j < g.size(); ++j) zeta[j] = w.omega(g.node(j)) * eta[j];
    worst = std::max(worst, std::abs(bilinear_B(eta, w, g) - bilinear_Bcal(zeta, w.lambda(), g)));
  }
  return worst;
}

struct ResidualReport {
  std::vector<double> t;
  std::vector<double> residual;
  double max_abs = 0.0;
  double rhs_scale = 0.0;  // max |rhs| over the same records
  double relative() const { return rhs_scale > 0 ? max_abs / rhs_scale : max_abs; }
};

/// Central-difference derivative of the functional minus the identity's rhs.
inline ResidualReport virial_residual(const std::vector<double>& t, const std::vector<double>& value,
                                      const std::vector<double>& rhs) {
  if (t.size() < 3 || value.size() != t.size() || rhs.size() != t.size())
    throw Error(Errc::too_few_records, "need at least 3 aligned records, got " +
                                           std::to_string(t.size()));
  const double h = t[1] - t[0];
  for (std::size_t k = 1; k + 1 < t.size(); ++k)
    if (std::abs((t[k + 1] - t[k]) - h) > 1e-9 * std::abs(h))
      throw Error(Errc::invalid_parameter, "records are not uniformly spaced");
  ResidualReport r;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double d = (value[k + 1] - value[k - 1]) / (2.0 * h) - rhs[k];
    r.t.push_back(t[k]);
    r.residual.push_back(d);
    r.max_abs = std::max(r.max_abs, std::abs(d));
    r.rhs_scale = std::max(r.rhs_scale, std::abs(rhs[k]));
  }
  return r;
}

inline ResidualReport virial_residual(const TimeSeries& series, const std::string& value_col,
                                      const std::string& rhs_col) {
  if (series.size() < 3)
    throw Error(Errc::too_few_records, "need at least 3 records, got " +
                                           std::to_string(series.size()));
  std::vector<double> t = series.times();
  // A truncated final step breaks uniform spacing; drop it.
  std::vector<double> v = series.column(value_col), r = series.column(rhs_col);
  if (t.size() >= 4) {
    const double h = t[1] - t[0];
    if (std::abs((t.back() - t[t.size() - 2]) - h) > 1e-9 * std::abs(h)) {
      t.pop_back();
      v.pop_back();
      r.pop_back();
    }
  }
  return virial_residual(t, v, r);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Odd sine series sum a_m m^{-2} sin(pi m x / L), a_m ~ N(0,1), m <= N/4.
inline RealField random_odd_field(std::uint64_t seed, const Grid& g) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int modes = g.size() / 4;
  std::vector<double> a(modes + 1, 0.0);
  for (int m = 1; m <= modes; ++m) a[m] = normal(rng) / (double(m) * m);
  // sin(pi m x_j / L) = (-1)^m sin(2 pi m j / N) on the grid nodes.
  ComplexField fh(g.size());
  const int n = g.size();
  for (int m = 1; m <= modes; ++m) {
    const double sgn = m % 2 == 0 ? 1.0 : -1.0;
    const Complex coef = Complex(0.0, -0.5 * n * sgn * a[m]);
    fh[m] += coef;
    fh[n - m] -= coef;
  }
  RealField f = real_part(g.backward(fh));
  return f;
}

struct CoercivityReport {
  int samples = 0;
  int violations = 0;
  double min_margin_ratio = 0.0;  // min calB(zeta) / int zeta_x^2
  double c0 = 0.0;                // min B(u) / ||u||^2_{H^1_omega}
  std::uint64_t c0_sample = 0;
};

/// Draws `count` odd fields per seed stream; throws coercivity_violation if
/// calB(zeta) < 1.5 int zeta_x^2 - 1e-9 scale for any of them.
inline CoercivityReport coercivity_sample(std::uint64_t seed, int count, double lambda,
                                          const Grid& g) {
  if (count < 1) throw Error(Errc::invalid_parameter, "count must be >= 1");
  const auto w = WeightProfile::tanh_lambda(lambda);
  CoercivityReport rep;
  rep.samples = count;
  rep.min_margin_ratio = std::numeric_limits<double>::infinity();
  rep.c0 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s0 = splitmix64(seed * 0x100000001b3ULL + 2 * std::uint64_t(k));
    const std::uint64_t s1 = splitmix64(seed * 0x100000001b3ULL + 2 * std::uint64_t(k) + 1);
    const RealField zeta = random_odd_field(s0, g);
    const RealField zx = spectral_derivative(zeta, g);
    double grad = 0.0;
    for (double d : zx) grad += d * d;
    grad *= g.dx();
    const double bcal = bilinear_Bcal(zeta, lambda, g);
    if (bcal < 1.5 * grad - 1e-9 * grad) {
      std::ostringstream os;
      os.precision(17);
      os << "sample " << k << " (seed " << s0 << "): calB=" << bcal << " < 1.5*" << grad;
      throw Error(Errc::coercivity_violation, os.str());
    }
    if (grad > 0) rep.min_margin_ratio = std::min(rep.min_margin_ratio, bcal / grad);

    const RealField im = random_odd_field(s1, g);
    ComplexField u(g.size());
    for (int j = 0; j < g.size(); ++j) u[j] = Complex(zeta[j], im[j]);
    const double norm = weighted_h1(u, w, g);
    if (norm > 0) {
      const double ratio = bilinear_B(u, w, g) / norm;
      if (ratio < rep.c0) {
        rep.c0 = ratio;
        rep.c0_sample = static_cast<std::uint64_t>(k);
      }
    }
  }
  return rep;
}

}  // namespace zvl
