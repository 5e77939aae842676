#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zvl/dynamics.hpp"
#include "zvl/error.hpp"
#include "zvl/exact_solutions.hpp"
#include "zvl/functionals.hpp"
#include "zvl/grid.hpp"
#include "zvl/states.hpp"
#include "zvl/timeseries.hpp"
#include "zvl/virial.hpp"
#include "zvl/weights.hpp"

namespace zvl {

enum class Scenario {
  compact_decay_zak,
  compact_decay_kgz,
  farfield_zak,
  farfield_kgz,
  farfield_nls,
  soliton_validation,
  coercivity,
  conservation_audit
};

inline constexpr Scenario kAllScenarios[] = {
    Scenario::compact_decay_zak, Scenario::compact_decay_kgz,  Scenario::farfield_zak,
    Scenario::farfield_kgz,      Scenario::farfield_nls,       Scenario::soliton_validation,
    Scenario::coercivity,        Scenario::conservation_audit};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::compact_decay_zak: return "compact_decay_zak";
    case Scenario::compact_decay_kgz: return "compact_decay_kgz";
    case Scenario::farfield_zak: return "farfield_zak";
    case Scenario::farfield_kgz: return "farfield_kgz";
    case Scenario::farfield_nls: return "farfield_nls";
    case Scenario::soliton_validation: return "soliton_validation";
    case Scenario::coercivity: return "coercivity";
    case Scenario::conservation_audit: return "conservation_audit";
  }
  return "?";
}

inline std::optional<Scenario> scenario_from(std::string_view name) {
  for (Scenario s : kAllScenarios)
    if (name == scenario_name(s)) return s;
  return std::nullopt;
}

/// System a scenario is bound to; nullopt when the config chooses.
inline std::optional<System> scenario_system(Scenario s) {
  switch (s) {
    case Scenario::compact_decay_zak:
    case Scenario::farfield_zak: return System::zakharov;
    case Scenario::compact_decay_kgz:
    case Scenario::farfield_kgz: return System::kgz;
    case Scenario::farfield_nls: return System::nls;
    default: return std::nullopt;
  }
}

enum class DataKind { odd_packet, gaussian, wu, chen, zero };

inline const char* data_kind_name(DataKind k) {
  switch (k) {
    case DataKind::odd_packet: return "odd_packet";
    case DataKind::gaussian: return "gaussian";
    case DataKind::wu: return "wu";
    case DataKind::chen: return "chen";
    case DataKind::zero: return "zero";
  }
  return "?";
}

inline std::optional<DataKind> data_kind_from(std::string_view name) {
  for (DataKind k : {DataKind::odd_packet, DataKind::gaussian, DataKind::wu, DataKind::chen,
                     DataKind::zero})
    if (name == data_kind_name(k)) return k;
  return std::nullopt;
}

struct DataSpec {
  DataKind kind = DataKind::odd_packet;
  double width = 2.0;  // odd packet and gaussian
  double amp_u = 0.5;  // gaussian
  double amp_n = 0.25;
  double center = 0.0;  // gaussian center; soliton position at t_start
  double kick = 0.0;
  double carrier = 0.0;  // kgz gaussian: u_t = i carrier u
  SolitonParams soliton;
};

enum class FMode { tracked, constant };

struct CurveParams {
  double delta = 0.5;
  FMode f_mode = FMode::tracked;
  double f_const = 1.0;
};

/// Frozen desk-scale thresholds.
struct Thresholds {
  double decay_ratio = 0.5;
  double window = 10.0;
  double farfield_ratio = 1e-3;
  double soliton_error = 1e-4;
  double drift = 1e-8;
  double order = 4.0;
  double order_tolerance = 0.3;
  double epsilon_max = 0.05;
  double ut_bound = 1.0;
  double parity = 1e-8;
  double virial = 1e-6;
  double c0_spread = 0.2;
};

struct ExperimentConfig {
  std::string name = "run";
  Scenario scenario = Scenario::compact_decay_zak;
  ModelParams model;
  double half_length = 64.0 * std::numbers::pi;
  int points = 2048;
  StepperConfig stepper;  // t_final is the horizon
  double t_start = 0.0;
  DataSpec data;
  double epsilon = 0.01;
  Interval interval{-5.0, 5.0};
  std::optional<CurveParams> curve;
  std::uint64_t seed = 42;
  double lambda = 1.0;  // tanh weight scale; coercivity lambda
  int samples = 10000;
  int reseeds = 1;
  bool expect_decay = true;
  bool order_study = false;
  double reference_dt = 5e-4;
  std::vector<double> dt_ladder{8e-3, 4e-3, 2e-3};
  Thresholds thresholds;

  void validate() const {
    auto bad = [](const char* field, const std::string& why) { throw ValidationError(field, why); };
    const bool far = scenario == Scenario::farfield_zak || scenario == Scenario::farfield_kgz ||
                     scenario == Scenario::farfield_nls;
    if (far && !curve) bad("curve", "far-field scenarios need a curve");
    if (!(half_length > 0)) bad("L", "must be > 0");
    if (points < 16 || !is_power_of_two(points)) bad("N", "must be a power of two >= 16");
    if (!(stepper.dt > 0)) bad("dt", "must be > 0");
    if (stepper.record_every < 1) bad("record_every", "must be >= 1");
    if (!(stepper.t_final >= t_start)) bad("t_final", "must not precede t_start");
    if (!(epsilon > 0)) bad("epsilon", "must be > 0");
    if (!(interval.lo < interval.hi)) bad("interval", "needs lo < hi");
    if (!(lambda > 0)) bad("lambda", "must be > 0");
    if (samples < 1) bad("samples", "must be >= 1");
    if (reseeds < 0) bad("reseeds", "must be >= 0");
    if (auto sys = scenario_system(scenario); sys && *sys != model.system)
      bad("system", std::string(scenario_name(scenario)) + " runs the " + system_name(*sys) +
                        " system");
    if (far && t_start < 2.0) bad("t_start", "the curve is defined for t >= 2");
    if (curve && !(curve->delta > 0)) bad("curve.delta", "must be > 0");
    if (curve && !(curve->f_const > 0)) bad("curve.f_const", "must be > 0");
    if (scenario == Scenario::soliton_validation && model.system == System::nls)
      bad("system", "soliton validation covers zakharov and kgz");
    if (order_study) {
      if (!(reference_dt > 0)) bad("reference_dt", "must be > 0");
      if (dt_ladder.size() < 2) bad("dt_ladder", "needs at least two steps");
      for (double h : dt_ladder)
        if (!(h > reference_dt)) bad("dt_ladder", "entries must exceed reference_dt");
    }
    try {
      model.validate();
    } catch (const Error& e) {
      bad("model", e.what());
    }
  }
};

struct Report {
  std::string name;
  std::string scenario;
  std::vector<std::pair<std::string, bool>> flags;
  std::vector<std::pair<std::string, double>> numbers;
  std::vector<std::string> warnings;
  bool hypothesis_required = false;
  bool hypothesis_ok = true;
  std::vector<std::string> hypothesis_failures;
  std::vector<std::pair<std::string, TimeSeries>> tables;

  void set_flag(const std::string& k, bool v) { flags.emplace_back(k, v); }
  void set_number(const std::string& k, double v) { numbers.emplace_back(k, v); }
  void fail_hypothesis(const std::string& why) {
    hypothesis_ok = false;
    hypothesis_failures.push_back(why);
  }

  bool flag(const std::string& k) const {
    for (const auto& [n, v] : flags)
      if (n == k) return v;
    throw Error(Errc::invalid_parameter, "no flag " + k);
  }
  bool has_flag(const std::string& k) const {
    return std::any_of(flags.begin(), flags.end(), [&](const auto& f) { return f.first == k; });
  }
  double number(const std::string& k) const {
    for (const auto& [n, v] : numbers)
      if (n == k) return v;
    throw Error(Errc::invalid_parameter, "no number " + k);
  }
  const TimeSeries& table(const std::string& k) const {
    for (const auto& [n, t] : tables)
      if (n == k) return t;
    throw Error(Errc::invalid_parameter, "no table " + k);
  }

  bool pass() const {
    if (hypothesis_required && !hypothesis_ok) return false;
    return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.second; });
  }
  std::string status() const {
    if (hypothesis_required && !hypothesis_ok) return "hypothesis-fail";
    return pass() ? "pass" : "fail";
  }

  /// One line: name scenario status flag=0/1 ... number=value ...
  std::string summary_line() const {
    std::ostringstream os;
    os.precision(6);
    os << name << " " << scenario << " " << status();
    for (const auto& [k, v] : flags) os << " " << k << "=" << (v ? 1 : 0);
    for (const auto& [k, v] : numbers) os << " " << k << "=" << v;
    return os.str();
  }
};

namespace detail {

inline double mean_on(const std::vector<double>& t, const std::vector<double>& v, double a,
                      double b) {
  double acc = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= a - 1e-9 && t[i] <= b + 1e-9) {
      acc += v[i];
      ++n;
    }
  return n ? acc / n : 0.0;
}

/// Cumulative trapezoid.
inline std::vector<double> running_integral(const std::vector<double>& t,
                                            const std::vector<double>& v) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return out;
}

inline double interp(const std::vector<double>& t, const std::vector<double>& v, double x) {
  if (t.empty()) return 0.0;
  if (x <= t.front()) return v.front();
  if (x >= t.back()) return v.back();
  const auto it = std::lower_bound(t.begin(), t.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double s = (x - t[i - 1]) / (t[i] - t[i - 1]);
  return v[i - 1] + s * (v[i] - v[i - 1]);
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

inline double sq_l2(const RealField& f, const Grid& g) {
  double acc = 0.0;
  for (double x : f) acc += x * x;
  return acc * g.dx();
}

/// Squared norm that the relative drifts are measured against.
inline double energy_scale(const ZakharovState& s, const Grid& g) {
  const double h = h1_norm(s.u, g);
  return h * h + sq_l2(s.n, g) + sq_l2(s.v, g);
}
inline double energy_scale(const KGZState& s, const Grid& g) {
  const double h = h1_norm(s.u, g);
  return h * h + mass(s.ut, g) + sq_l2(s.n, g) + sq_l2(s.v, g);
}
inline double energy_scale(const NLSState& s, const Grid& g) {
  const double h = h1_norm(s.u, g);
  return h * h;
}

inline double rel_drift(double q, double q0, double scale) {
  return std::abs(q - q0) / std::max({std::abs(q0), scale, 1e-300});
}

inline double sq_weighted(const ComplexField& f, const RealField& dens, const Grid& g) {
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) acc += dens[j] * std::norm(f[j]);
  return acc * g.dx();
}
inline double sq_weighted(const RealField& f, const RealField& dens, const Grid& g) {
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) acc += dens[j] * f[j] * f[j];
  return acc * g.dx();
}

template <class Field>
double h1_on(const Field& f, const Grid& g, const Interval& I) {
  const Field fx = spectral_derivative(f, g);
  return std::sqrt(sq_norm_on(f, g, I) + sq_norm_on(fx, g, I));
}

template <class Field>
double h1_on_mirrored(const Field& f, const Grid& g, const Interval& I) {
  const Field fx = spectral_derivative(f, g);
  const Interval M{-I.hi, -I.lo};
  return std::sqrt(sq_norm_on(f, g, I) + sq_norm_on(fx, g, I) + sq_norm_on(f, g, M) +
                   sq_norm_on(fx, g, M));
}

/// Time for the fastest resolved component of the data to cross the box.
template <class S>
double wrap_time(const S& s, const Grid& g, const ModelParams& prm) {
  const ComplexField uh = g.forward(s.u);
  double peak = 0.0;
  for (const auto& z : uh) peak = std::max(peak, std::abs(z));
  double kmax = 0.0;
  for (int m = 0; m < g.size(); ++m)
    if (std::abs(uh[m]) > 1e-6 * peak) kmax = std::max(kmax, std::abs(g.wavenumbers()[m]));
  double speed = 2.0 * kmax;
  if constexpr (std::is_same_v<S, KGZState>) speed = prm.c;
  if constexpr (!std::is_same_v<S, NLSState>) speed = std::max(speed, prm.alpha);
  double amax = 0.0;
  for (const auto& z : s.u) amax = std::max(amax, std::abs(z));
  double support = 0.0;
  for (int j = 0; j < g.size(); ++j)
    if (std::abs(s.u[j]) > 1e-6 * amax) support = std::max(support, std::abs(g.node(j)));
  if (speed <= 0) return std::numeric_limits<double>::infinity();
  return (g.half_length() - support) / speed;
}

}  // namespace detail

/// Initial data for the configured system at t_start.
template <class S>
S initial_state(const ExperimentConfig& cfg, const Grid& g) {
  const DataSpec& d = cfg.data;
  const GaussianData gd{d.amp_u, d.amp_n, d.width, d.center, d.kick};
  SolitonParams sp = d.soliton;
  sp.center = d.center - sp.speed * cfg.t_start;
  auto unsupported = [&]() {
    return ValidationError("data", std::string(data_kind_name(d.kind)) + " data is not defined for the " +
                                       system_name(system_of<S>()) + " system");
  };
  S s;
  if constexpr (std::is_same_v<S, ZakharovState>) {
    switch (d.kind) {
      case DataKind::odd_packet: s = odd_packet_h1(cfg.epsilon, d.width, g).state; break;
      case DataKind::gaussian: s = gaussian_zakharov(gd, g); break;
      case DataKind::wu: s = wu_soliton(sp, cfg.t_start, g); break;
      case DataKind::zero: s = zero_zakharov(g); break;
      default: throw unsupported();
    }
  } else if constexpr (std::is_same_v<S, KGZState>) {
    switch (d.kind) {
      case DataKind::odd_packet: s = odd_packet_kgz_h1(cfg.epsilon, d.width, g).state; break;
      case DataKind::gaussian:
        s = gaussian_kgz(gd, g);
        for (int j = 0; j < g.size(); ++j) s.ut[j] = Complex(0.0, d.carrier) * s.u[j];
        break;
      case DataKind::chen: s = chen_soliton(sp, cfg.t_start, g); break;
      case DataKind::zero: s = zero_kgz(g); break;
      default: throw unsupported();
    }
  } else {
    switch (d.kind) {
      case DataKind::odd_packet: s = NLSState{odd_packet_h1(cfg.epsilon, d.width, g).state.u, 0}; break;
      case DataKind::gaussian: s = gaussian_nls(gd, g); break;
      case DataKind::zero: s = zero_nls(g); break;
      default: throw unsupported();
    }
  }
  s.t = cfg.t_start;
  return s;
}

/// Relative drifts of the conserved quantities (KGZ has no mass law).
template <class S>
Observer<S> drift_observer(const S& s0, const Grid& g, const ModelParams& prm) {
  const Conserved q0 = conserved(s0, g, prm);
  const double scale = detail::energy_scale(s0, g);
  constexpr bool kgz = std::is_same_v<S, KGZState>;
  std::vector<std::string> cols;
  if (!kgz) cols.push_back("mass_drift");
  cols.insert(cols.end(), {"energy_drift", "momentum_drift"});
  return {cols, [q0, scale, g, prm](const S& s, std::vector<double>& row) {
            const Conserved q = conserved(s, g, prm);
            if (!kgz) row.push_back(detail::rel_drift(q.mass, q0.mass, scale));
            row.push_back(detail::rel_drift(q.energy, q0.energy, scale));
            row.push_back(detail::rel_drift(q.momentum, q0.momentum, scale));
          }};
}

namespace detail {

template <class S>
Report compact_decay(const ExperimentConfig& cfg) {
  constexpr bool kgz = std::is_same_v<S, KGZState>;
  const Grid g(cfg.half_length, cfg.points);
  const ModelParams& prm = cfg.model;
  const S s0 = initial_state<S>(cfg, g);
  const auto w = WeightProfile::tanh_lambda(cfg.lambda);
  const RealField dens = weight_density(w, g);
  const Interval I = cfg.interval;
  const double M0 = mass(s0, g);
  double E0 = 0.0;
  if constexpr (kgz) E0 = energy_kgz(s0, g, prm.c);
  else E0 = energy_zakharov(s0, g);

  std::vector<std::string> local_cols{"u_linf_I", "u_l2_I", "n_l2_I", "v_l2_I"};
  if (kgz) local_cols.insert(local_cols.end(), {"u_h1_I", "ut_l2_I"});
  std::vector<std::string> weighted_cols{"u_h1_w", "n_l2_w", "v_l2_w"};
  if (kgz) weighted_cols.push_back("ut_l2_w");
  std::vector<std::string> cols = local_cols;
  cols.insert(cols.end(), weighted_cols.begin(), weighted_cols.end());
  cols.insert(cols.end(), {"weighted_integrand", "parity", "u_h1"});
  if (kgz) cols.insert(cols.end(), {"ut_l2", "kgz_bound_lhs", "kgz_bound"});
  else cols.insert(cols.end(), {"e4_lhs", "e4_bound", "e4_sharp_bound"});

  Observer<S> local{cols, [&](const S& s, std::vector<double>& row) {
                      const ComplexField ux = spectral_derivative(s.u, g);
                      row.push_back(linf_on(s.u, g, I));
                      row.push_back(l2_on(s.u, g, I));
                      row.push_back(l2_on(s.n, g, I));
                      row.push_back(l2_on(s.v, g, I));
                      if constexpr (kgz) {
                        row.push_back(h1_on(s.u, g, I));
                        row.push_back(l2_on(s.ut, g, I));
                      }
                      const double uh = sq_weighted(s.u, dens, g) + sq_weighted(ux, dens, g);
                      const double nw = sq_weighted(s.n, dens, g);
                      const double vw = sq_weighted(s.v, dens, g);
                      row.push_back(std::sqrt(uh));
                      row.push_back(std::sqrt(nw));
                      row.push_back(std::sqrt(vw));
                      if constexpr (kgz) {
                        const double utw = sq_weighted(s.ut, dens, g);
                        row.push_back(std::sqrt(utw));
                        row.push_back(std::sqrt(utw) + std::sqrt(uh) + std::sqrt(nw) +
                                      std::sqrt(vw));
                      } else {
                        row.push_back(uh + 0.5 * vw + 0.5 * nw);
                      }
                      row.push_back(parity_violation(s, g));
                      row.push_back(h1_norm(s.u, g));
                      if constexpr (kgz) {
                        row.push_back(l2_norm(s.ut, g));
                        const InequalityCheck b = kgz_energy_bound_check(s, g, E0);
                        row.push_back(b.lhs);
                        row.push_back(b.rhs);
                      } else {
                        const EnergyBoundCheck b = energy_bound_check(s, g, M0, E0);
                        row.push_back(b.lhs);
                        row.push_back(b.bound);
                        row.push_back(b.sharp_bound);
                      }
                    }};
  const VirialSpec vs{kgz ? VirialKind::I_kgz : VirialKind::I_zak, w, std::nullopt, prm.alpha,
                      prm.c};
  StepperConfig sc = cfg.stepper;
  Trajectory<S> traj = evolve(s0, g, prm, sc,
                              {local, drift_observer(s0, g, prm), virial_observer<S>(vs, g, "I")});
  TimeSeries& ts = traj.series;

  Report rep;
  rep.name = cfg.name;
  rep.scenario = scenario_name(cfg.scenario);
  rep.hypothesis_required = cfg.expect_decay;
  const std::vector<double> t = ts.times();
  for (const auto& c : weighted_cols) ts.add_column("int_" + c, running_integral(t, ts.column(c)));
  const std::vector<double> R = running_integral(t, ts.column("weighted_integrand"));
  ts.add_column("weighted_integral", R);

  const double t0 = t.front(), T = t.back();
  const Thresholds& th = cfg.thresholds;
  if (T - t0 < 2.0 * th.window)
    rep.warnings.push_back("horizon shorter than two averaging windows");
  const double tw = wrap_time(s0, g, prm);
  rep.set_number("wrap_time", tw);
  if (T - t0 > tw)
    rep.warnings.push_back("horizon exceeds the estimated wrap-around time " + std::to_string(tw));

  // Norms that start at roundoff level (v of a resting soliton) carry no signal.
  const double floor = 1e-10 * std::sqrt(energy_scale(s0, g));
  bool any_decay = false;
  for (const auto& c : local_cols) {
    const std::vector<double> v = ts.column(c);
    const double a = mean_on(t, v, t0, t0 + th.window);
    const double b = mean_on(t, v, T - th.window, T);
    const double ratio = a > 0 ? b / a : std::numeric_limits<double>::quiet_NaN();
    const bool decayed = a > floor && a > 0 && ratio < th.decay_ratio;
    any_decay = any_decay || decayed;
    rep.set_number("ratio_" + c, ratio);
    if (cfg.expect_decay) rep.set_flag("decay_" + c, decayed);
  }
  if (!cfg.expect_decay) rep.set_flag("no_decay_flag", !any_decay);

  bool nondecreasing = true;
  for (std::size_t i = 1; i < R.size(); ++i)
    if (R[i] < R[i - 1] - 1e-15 * std::abs(R[i - 1])) nondecreasing = false;
  const double half = 0.5 * (t0 + T);
  const double inc_first = interp(t, R, half) - R.front();
  const double inc_second = R.back() - interp(t, R, half);
  rep.set_number("integral_first_half", inc_first);
  rep.set_number("integral_second_half", inc_second);
  if (cfg.expect_decay) {
    rep.set_flag("integral_nondecreasing", nondecreasing);
    rep.set_flag("increments_shrinking", inc_second < inc_first);
  }

  double worst_drift = 0.0;
  for (const char* c : {"mass_drift", "energy_drift", "momentum_drift"})
    if (ts.has(c)) {
      const double d = max_of(ts.column(c));
      rep.set_number(std::string("max_") + c, d);
      worst_drift = std::max(worst_drift, d);
    }
  rep.set_flag("conservation", worst_drift < th.drift);

  try {
    const ResidualReport rr = virial_residual(ts, "I_value", "I_rhs");
    rep.set_number("I_residual_rel", rr.relative());
  } catch (const Error&) {
    rep.warnings.push_back("too few records for the virial residual");
  }

  // Hypothesis audit.
  const double eps = h1_norm(s0.u, g);
  rep.set_number("epsilon_measured", eps);
  if (!(eps <= th.epsilon_max))
    rep.fail_hypothesis("||u0||_H1 = " + std::to_string(eps) + " exceeds epsilon_max");
  const double par = max_of(ts.column("parity"));
  rep.set_number("max_parity_violation", par);
  if (!(par <= th.parity)) rep.fail_hypothesis("parity violation " + std::to_string(par));
  if constexpr (kgz) {
    const double ut = max_of(ts.column("ut_l2"));
    rep.set_number("sup_ut_l2", ut);
    if (!(ut <= th.ut_bound)) rep.fail_hypothesis("sup ||u_t||_L2 exceeds the bound");
    bool ok = true;
    const auto l = ts.column("kgz_bound_lhs"), b = ts.column("kgz_bound");
    for (std::size_t i = 0; i < l.size(); ++i) ok = ok && l[i] <= b[i] + 1e-12 * std::max(1.0, std::abs(b[i]));
    rep.set_flag("kgz_energy_bound", ok);
  } else {
    bool ok = true, sharp = true;
    const auto l = ts.column("e4_lhs"), b = ts.column("e4_bound"), sb = ts.column("e4_sharp_bound");
    for (std::size_t i = 0; i < l.size(); ++i) {
      ok = ok && l[i] <= b[i] + 1e-12 * std::max(1.0, std::abs(b[i]));
      sharp = sharp && l[i] <= sb[i] + 1e-12 * std::max(1.0, std::abs(sb[i]));
    }
    rep.set_flag("e4_bound", ok);
    rep.set_number("e4_sharp_ok", sharp ? 1.0 : 0.0);
    if (!ok) rep.fail_hypothesis("energy-norm bound violated");
  }
  if (traj.truncated) rep.warnings.push_back(traj.warning);
  rep.set_number("t_reached", T);
  rep.tables.emplace_back("series", std::move(ts));
  return rep;
}

template <class S>
Report farfield(const ExperimentConfig& cfg) {
  constexpr bool kgz = std::is_same_v<S, KGZState>;
  constexpr bool nls = std::is_same_v<S, NLSState>;
  const Grid g(cfg.half_length, cfg.points);
  const ModelParams& prm = cfg.model;
  const S s0 = initial_state<S>(cfg, g);
  const CurveParams cp = *cfg.curve;
  auto env = std::make_shared<Envelope>();
  const Curve curve = cp.f_mode == FMode::tracked ? Curve::tracked(cp.delta, env)
                                                  : Curve::constant(cp.delta, cp.f_const);

  std::vector<std::string> cols{"h2",         "f",         "lambda",    "mu",
                                "region_lo",  "region_hi", "scaled_lo", "scaled_hi",
                                "u_l2_R"};
  if (!nls) cols.insert(cols.end(), {"u_h1_R", "n_l2_R", "v_l2_R"});
  if (kgz) cols.push_back("ut_l2_R");
  Observer<S> geom{cols, [&](const S& s, std::vector<double>& row) {
                     const double h2 = h2_norm(s.u, g);
                     if (curve.is_tracked()) env->push(s.t, h2);
                     const Interval R = curve.region(s.t);
                     row.push_back(h2);
                     row.push_back(curve.f(s.t));
                     row.push_back(curve.lambda(s.t));
                     row.push_back(curve.mu(s.t));
                     row.push_back(R.lo);
                     row.push_back(R.hi);
                     row.push_back(curve.scaled(-R.hi, s.t));
                     row.push_back(curve.scaled(-R.lo, s.t));
                     row.push_back(l2_on_mirrored(s.u, g, R));
                     if constexpr (!nls) {
                       row.push_back(h1_on_mirrored(s.u, g, R));
                       row.push_back(l2_on_mirrored(s.n, g, R));
                       row.push_back(l2_on_mirrored(s.v, g, R));
                     }
                     if constexpr (kgz) row.push_back(l2_on_mirrored(s.ut, g, R));
                   }};
  std::vector<Observer<S>> obs{geom, drift_observer(s0, g, prm)};
  std::vector<std::string> kinds;
  const auto cut = WeightProfile::cutoff();
  if (!kgz) {
    obs.push_back(virial_observer<S>({VirialKind::K_mass, cut, curve, prm.alpha, prm.c}, g, "K"));
    kinds.push_back("K");
  }
  if (!nls) {
    const VirialKind jk = kgz ? VirialKind::J_energy_kgz : VirialKind::J_energy_zak;
    obs.push_back(virial_observer<S>({jk, cut, curve, prm.alpha, prm.c}, g, "J"));
    kinds.push_back("J");
  }
  const std::function<std::string(const S&)> stop = [&](const S& s) -> std::string {
    const Interval R = curve.region(s.t);
    if (R.hi > g.half_length())
      return "region_out_of_box: region(" + std::to_string(s.t) + ") reaches " +
             std::to_string(R.hi) + " > L";
    return {};
  };
  Trajectory<S> traj = evolve(s0, g, prm, cfg.stepper, obs, stop);
  TimeSeries& ts = traj.series;

  Report rep;
  rep.name = cfg.name;
  rep.scenario = scenario_name(cfg.scenario);
  if (traj.truncated) rep.warnings.push_back(traj.warning);
  if (ts.empty()) {
    rep.set_flag("reached_records", false);
    rep.tables.emplace_back("series", std::move(ts));
    return rep;
  }
  const Thresholds& th = cfg.thresholds;
  const auto& last = ts.rows().back();
  rep.set_number("t_reached", last[0]);
  const double u0 = l2_norm(s0.u, g);
  rep.set_number("u0_l2", u0);
  rep.set_number("u_l2_R_final", last[ts.index("u_l2_R")]);
  rep.set_flag("farfield_u_l2", last[ts.index("u_l2_R")] < th.farfield_ratio * u0);
  if constexpr (!nls) {
    const double h = h1_norm(s0.u, g);
    const double nn = l2_norm(s0.n, g) > 0 ? l2_norm(s0.n, g) : h;
    const double vv = l2_norm(s0.v, g) > 0 ? l2_norm(s0.v, g) : h;
    rep.set_number("u_h1_R_final", last[ts.index("u_h1_R")]);
    rep.set_number("n_l2_R_final", last[ts.index("n_l2_R")]);
    rep.set_number("v_l2_R_final", last[ts.index("v_l2_R")]);
    rep.set_flag("farfield_u_h1", last[ts.index("u_h1_R")] < th.farfield_ratio * h);
    rep.set_flag("farfield_n_l2", last[ts.index("n_l2_R")] < th.farfield_ratio * nn);
    rep.set_flag("farfield_v_l2", last[ts.index("v_l2_R")] < th.farfield_ratio * vv);
  }
  const auto h2 = ts.column("h2");
  rep.set_number("h2_growth", max_of(h2) / h2.front());
  rep.set_number("f_final", last[ts.index("f")]);
  double geo = 0.0;
  for (const auto& r : ts.rows())
    geo = std::max({geo, std::abs(r[ts.index("scaled_lo")] + 0.75),
                    std::abs(r[ts.index("scaled_hi")] + 0.25)});
  rep.set_number("region_geometry_error", geo);
  rep.set_flag("region_geometry", geo < 1e-12);
  double worst = 0.0;
  for (const char* c : {"mass_drift", "energy_drift", "momentum_drift"})
    if (ts.has(c)) worst = std::max(worst, max_of(ts.column(c)));
  rep.set_number("max_drift", worst);
  rep.set_flag("conservation", worst < th.drift);
  for (const auto& k : kinds) {
    try {
      const ResidualReport rr = virial_residual(ts, k + "_value", k + "_rhs");
      rep.set_number(k + "_residual_rel", rr.relative());
    } catch (const Error&) {
      rep.warnings.push_back("too few records for the " + k + " residual");
    }
  }
  rep.tables.emplace_back("series", std::move(ts));
  return rep;
}

inline double combined_l2_distance(const ZakharovState& a, const ZakharovState& b, const Grid& g) {
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j)
    acc += std::norm(a.u[j] - b.u[j]) + std::pow(a.n[j] - b.n[j], 2) + std::pow(a.v[j] - b.v[j], 2);
  return std::sqrt(acc * g.dx());
}
inline double combined_l2_distance(const KGZState& a, const KGZState& b, const Grid& g) {
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j)
    acc += std::norm(a.u[j] - b.u[j]) + std::norm(a.ut[j] - b.ut[j]) +
           std::pow(a.n[j] - b.n[j], 2) + std::pow(a.v[j] - b.v[j], 2);
  return std::sqrt(acc * g.dx());
}

/// Least-squares slope of log(err) against log(dt).
inline double fitted_order(const std::vector<double>& dt, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(dt.size());
  for (std::size_t i = 0; i < dt.size(); ++i) {
    const double x = std::log(dt[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

template <class S>
Report soliton(const ExperimentConfig& cfg) {
  const Grid g(cfg.half_length, cfg.points);
  const ModelParams& prm = cfg.model;
  SolitonParams sp = cfg.data.soliton;
  sp.center = cfg.data.center - sp.speed * cfg.t_start;
  auto exact = [&](double t) {
    if constexpr (std::is_same_v<S, ZakharovState>) return wu_soliton(sp, t, g);
    else return chen_soliton(sp, t, g);
  };
  if constexpr (std::is_same_v<S, ZakharovState>) {
    if (prm.alpha != 1.0)
      throw Error(Errc::invalid_parameter, "the Wu soliton is written for alpha = 1");
  } else {
    if (prm.alpha != 1.0 || prm.c != 1.0)
      throw Error(Errc::invalid_parameter, "the Chen soliton is written for alpha = c = 1");
  }
  const S s0 = exact(cfg.t_start);
  Observer<S> err{{"error_l2", "error_u"}, [&](const S& s, std::vector<double>& row) {
                    const S e = exact(s.t);
                    row.push_back(combined_l2_distance(s, e, g));
                    ComplexField du(g.size());
                    for (int j = 0; j < g.size(); ++j) du[j] = s.u[j] - e.u[j];
                    row.push_back(l2_norm(du, g));
                  }};
  Trajectory<S> traj = evolve(s0, g, prm, cfg.stepper, {err, drift_observer(s0, g, prm)});
  TimeSeries& ts = traj.series;
  Report rep;
  rep.name = cfg.name;
  rep.scenario = scenario_name(cfg.scenario);
  const Thresholds& th = cfg.thresholds;
  const double e = max_of(ts.column("error_l2"));
  rep.set_number("max_error_l2", e);
  rep.set_flag("error", e < th.soliton_error);
  double worst = 0.0;
  for (const char* c : {"mass_drift", "energy_drift", "momentum_drift"})
    if (ts.has(c)) {
      const double d = max_of(ts.column(c));
      rep.set_number(std::string("max_") + c, d);
      worst = std::max(worst, d);
    }
  rep.set_flag("conservation", worst < th.drift);
  rep.tables.emplace_back("series", std::move(ts));

  if (cfg.order_study) {
    StepperConfig sc = cfg.stepper;
    sc.record_every = std::numeric_limits<int>::max();
    auto final_state = [&](double dt) {
      sc.dt = dt;
      return evolve(s0, g, prm, sc, {}).final_state;
    };
    const S ref = final_state(cfg.reference_dt);
    TimeSeries table = TimeSeries::keyed("dt", {"error_vs_reference", "error_vs_exact"});
    std::vector<double> errs;
    const S ex = exact(ref.t);
    for (double h : cfg.dt_ladder) {
      const S s = final_state(h);
      errs.push_back(combined_l2_distance(s, ref, g));
      table.append({h, errs.back(), combined_l2_distance(s, ex, g)});
    }
    for (std::size_t i = 1; i < errs.size(); ++i)
      rep.set_number("ratio_" + std::to_string(i), errs[i - 1] / errs[i]);
    const double order = fitted_order(cfg.dt_ladder, errs);
    rep.set_number("order", order);
    rep.set_flag("order", std::abs(order - th.order) <= th.order_tolerance);
    rep.tables.emplace_back("order", std::move(table));
  }
  return rep;
}

template <class S>
Report conservation(const ExperimentConfig& cfg) {
  constexpr bool kgz = std::is_same_v<S, KGZState>;
  const Grid g(cfg.half_length, cfg.points);
  const ModelParams& prm = cfg.model;
  const S s0 = initial_state<S>(cfg, g);
  const Conserved q0 = conserved(s0, g, prm);
  const double scale = energy_scale(s0, g);
  const std::vector<double> dts{cfg.stepper.dt, cfg.stepper.dt / 2, cfg.stepper.dt / 4};
  std::vector<std::string> names;
  std::vector<double> ref;
  if (!kgz) {
    names.push_back("mass");
    ref.push_back(q0.mass);
  }
  names.insert(names.end(), {"energy", "momentum"});
  ref.insert(ref.end(), {q0.energy, q0.momentum});

  TimeSeries table = TimeSeries::keyed("dt", names);
  std::vector<std::vector<double>> drift(names.size());
  for (double h : dts) {
    StepperConfig sc = cfg.stepper;
    sc.dt = h;
    sc.record_every = std::max(1, static_cast<int>(std::llround(cfg.stepper.record_every * cfg.stepper.dt / h)));
    Observer<S> q{names, [&](const S& s, std::vector<double>& row) {
                    const Conserved c = conserved(s, g, prm);
                    if (!kgz) row.push_back(c.mass);
                    row.push_back(c.energy);
                    row.push_back(c.momentum);
                  }};
    const TimeSeries ts = evolve(s0, g, prm, sc, {q}).series;
    std::vector<double> row{h};
    for (std::size_t i = 0; i < names.size(); ++i) {
      double d = 0.0;
      for (double v : ts.column(names[i])) d = std::max(d, std::abs(v - ref[i]));
      drift[i].push_back(d);
      row.push_back(d);
    }
    table.append(row);
  }

  Report rep;
  rep.name = cfg.name;
  rep.scenario = scenario_name(cfg.scenario);
  const Thresholds& th = cfg.thresholds;
  rep.set_number("scale", scale);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double finest = drift[i].back();
    const double rel = finest / std::max(scale, 1e-300);
    rep.set_number(names[i] + "_drift_rel", rel);
    rep.set_flag(names[i] + "_drift", rel < th.drift);
    if (*std::min_element(drift[i].begin(), drift[i].end()) < 1e-13 * scale) {
      rep.warnings.push_back(names[i] + " drift is at the roundoff floor; order not resolved");
      continue;
    }
    const double order = fitted_order(dts, drift[i]);
    rep.set_number(names[i] + "_order", order);
    rep.set_flag(names[i] + "_order", std::abs(order - th.order) <= th.order_tolerance);
  }
  rep.tables.emplace_back("drift", std::move(table));
  return rep;
}

}  // namespace detail

inline Report run_compact_decay(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.model.system == System::kgz) return detail::compact_decay<KGZState>(cfg);
  if (cfg.model.system == System::zakharov) return detail::compact_decay<ZakharovState>(cfg);
  throw ValidationError("system", "compact decay covers zakharov and kgz");
}

inline Report run_farfield(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.curve) throw ValidationError("curve", "far-field runs need a curve");
  switch (cfg.model.system) {
    case System::zakharov: return detail::farfield<ZakharovState>(cfg);
    case System::kgz: return detail::farfield<KGZState>(cfg);
    case System::nls: return detail::farfield<NLSState>(cfg);
  }
  throw ValidationError("system", "unknown system");
}

inline Report run_soliton_validation(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.model.system == System::kgz) return detail::soliton<KGZState>(cfg);
  return detail::soliton<ZakharovState>(cfg);
}

inline Report run_conservation_audit(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.model.system) {
    case System::zakharov: return detail::conservation<ZakharovState>(cfg);
    case System::kgz: return detail::conservation<KGZState>(cfg);
    case System::nls: return detail::conservation<NLSState>(cfg);
  }
  throw ValidationError("system", "unknown system");
}

inline Report run_coercivity(const ExperimentConfig& cfg) {
  cfg.validate();
  const Grid g(cfg.half_length, cfg.points);
  Report rep;
  rep.name = cfg.name;
  rep.scenario = scenario_name(Scenario::coercivity);
  TimeSeries table = TimeSeries::keyed(
      "seed", {"samples", "violations", "min_margin_ratio", "c0", "c0_sample"});
  std::vector<double> c0s;
  bool coercive = true;
  double margin = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= cfg.reseeds; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    try {
      const CoercivityReport c = coercivity_sample(seed, cfg.samples, cfg.lambda, g);
      table.append({double(seed), double(c.samples), double(c.violations), c.min_margin_ratio,
                    c.c0, double(c.c0_sample)});
      c0s.push_back(c.c0);
      margin = std::min(margin, c.min_margin_ratio);
    } catch (const Error& e) {
      if (e.code() != Errc::coercivity_violation) throw;
      coercive = false;
      rep.warnings.push_back(e.what());
    }
  }
  rep.set_flag("coercive", coercive && margin >= 1.5);
  rep.set_number("min_margin_ratio", margin);
  bool unit = !c0s.empty();
  for (double c : c0s) unit = unit && c > 0 && c < 1;
  rep.set_flag("c0_in_unit_interval", unit);
  double spread = 0.0;
  for (double c : c0s) spread = std::max(spread, std::abs(c - c0s.front()) / c0s.front());
  if (!c0s.empty()) rep.set_number("c0", c0s.front());
  rep.set_number("c0_spread", spread);
  if (c0s.size() > 1) rep.set_flag("c0_stable", spread <= cfg.thresholds.c0_spread);
  rep.tables.emplace_back("coercivity", std::move(table));
  return rep;
}

namespace detail {

template <class S>
Report virial_check(const ExperimentConfig& cfg) {
  const Grid g(cfg.half_length, cfg.points);
  const ModelParams& prm = cfg.model;
  const S s0 = initial_state<S>(cfg, g);
  std::vector<std::pair<std::string, VirialSpec>> specs;
  const auto tl = WeightProfile::tanh_lambda(cfg.lambda);
  const auto sp = WeightProfile::sech_plain();
  std::optional<Curve> curve;
  if (cfg.curve && cfg.t_start >= 2.0) curve = Curve::constant(cfg.curve->delta, cfg.curve->f_const);
  const auto cut = WeightProfile::cutoff();
  if constexpr (std::is_same_v<S, ZakharovState>) {
    specs.push_back({"I_zak", {VirialKind::I_zak, tl, std::nullopt, prm.alpha, prm.c}});
    specs.push_back({"local_mass_zak", {VirialKind::local_mass_zak, sp, std::nullopt, prm.alpha, prm.c}});
    if (curve) {
      specs.push_back({"K_mass", {VirialKind::K_mass, cut, curve, prm.alpha, prm.c}});
      specs.push_back({"J_energy_zak", {VirialKind::J_energy_zak, cut, curve, prm.alpha, prm.c}});
    }
  } else if constexpr (std::is_same_v<S, KGZState>) {
    specs.push_back({"I_kgz", {VirialKind::I_kgz, tl, std::nullopt, prm.alpha, prm.c}});
    specs.push_back({"local_energy_kgz", {VirialKind::local_energy_kgz, sp, std::nullopt, prm.alpha, prm.c}});
    if (curve) specs.push_back({"J_energy_kgz", {VirialKind::J_energy_kgz, cut, curve, prm.alpha, prm.c}});
  } else {
    if (curve) specs.push_back({"K_mass", {VirialKind::K_mass, cut, curve, prm.alpha, prm.c}});
  }
  Report rep;
  rep.name = cfg.name;
  rep.scenario = "virial_check";
  if (specs.empty()) {
    rep.warnings.push_back("no virial functional applies; time-dependent kinds need a curve and t_start >= 2");
    return rep;
  }
  std::vector<Observer<S>> obs;
  for (const auto& [name, spec] : specs) obs.push_back(virial_observer<S>(spec, g, name));
  const TimeSeries ts = evolve(s0, g, prm, cfg.stepper, obs).series;

  std::vector<std::string> cols;
  for (const auto& [name, spec] : specs)
    cols.insert(cols.end(), {name + "_value", name + "_rhs", name + "_residual"});
  TimeSeries out(cols);
  std::vector<ResidualReport> rr;
  for (const auto& [name, spec] : specs) rr.push_back(virial_residual(ts, name + "_value", name + "_rhs"));
  const auto t = ts.times();
  for (std::size_t k = 0; k < rr.front().t.size(); ++k) {
    std::vector<double> row{rr.front().t[k]};
    for (std::size_t i = 0; i < specs.size(); ++i) {
      row.push_back(ts.column(specs[i].first + "_value")[k + 1]);
      row.push_back(ts.column(specs[i].first + "_rhs")[k + 1]);
      row.push_back(rr[i].residual[k]);
    }
    out.append(row);
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string& name = specs[i].first;
    const ResidualReport& r = rr[i];
    rep.set_number(name + "_residual_abs", r.max_abs);
    rep.set_number(name + "_rhs_scale", r.rhs_scale);
    rep.set_number(name + "_residual_rel", r.relative());
    const auto v = ts.column(name + "_value");
    double dv = 0.0;
    for (double x : v) dv = std::max(dv, std::abs(x - v.front()));
    const bool vanishing = r.rhs_scale < 1e-8 && r.max_abs < 1e-8;
    rep.set_flag(name, vanishing || r.relative() < cfg.thresholds.virial);
    // Same records at twice the spacing.
    std::vector<double> t2, v2, r2;
    const auto rhs = ts.column(name + "_rhs");
    const std::size_t usable = r.t.size() + 2;
    for (std::size_t k = 0; k < usable; k += 2) {
      t2.push_back(t[k]);
      v2.push_back(v[k]);
      r2.push_back(rhs[k]);
    }
    if (t2.size() >= 3) {
      const ResidualReport coarse = virial_residual(t2, v2, r2);
      rep.set_number(name + "_spacing_ratio", r.max_abs > 0 ? coarse.max_abs / r.max_abs : 0.0);
    }
  }
  rep.tables.emplace_back("residual", std::move(out));
  return rep;
}

}  // namespace detail

/// Records every applicable virial functional along the configured run.
inline Report run_virial_check(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.model.system) {
    case System::zakharov: return detail::virial_check<ZakharovState>(cfg);
    case System::kgz: return detail::virial_check<KGZState>(cfg);
    case System::nls: return detail::virial_check<NLSState>(cfg);
  }
  throw ValidationError("system", "unknown system");
}

inline Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::compact_decay_zak:
    case Scenario::compact_decay_kgz: return run_compact_decay(cfg);
    case Scenario::farfield_zak:
    case Scenario::farfield_kgz:
    case Scenario::farfield_nls: return run_farfield(cfg);
    case Scenario::soliton_validation: return run_soliton_validation(cfg);
    case Scenario::coercivity: return run_coercivity(cfg);
    case Scenario::conservation_audit: return run_conservation_audit(cfg);
  }
  throw ValidationError("scenario", "unknown scenario");
}

}  // namespace zvl
