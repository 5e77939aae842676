#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "zvl/error.hpp"

namespace zvl {

enum class WeightFamily { tanh_lambda, cutoff, bump, sech_plain, unit };

inline const char* family_name(WeightFamily f) {
  switch (f) {
    case WeightFamily::tanh_lambda: return "tanh_lambda";
    case WeightFamily::cutoff: return "cutoff";
    case WeightFamily::bump: return "bump";
    case WeightFamily::sech_plain: return "sech_plain";
    case WeightFamily::unit: return "unit";
  }
  return "?";
}

/// phi and the derivatives the identities need. `unit` is phi = 1 (momentum).
class WeightProfile {
 public:
  static WeightProfile tanh_lambda(double lambda) {
    if (!(lambda > 0)) throw Error(Errc::invalid_parameter, "lambda must be > 0");
    return WeightProfile(WeightFamily::tanh_lambda, lambda);
  }
  static WeightProfile cutoff() { return WeightProfile(WeightFamily::cutoff, 1.0); }
  static WeightProfile bump() { return WeightProfile(WeightFamily::bump, 1.0); }
  static WeightProfile sech_plain() { return WeightProfile(WeightFamily::sech_plain, 1.0); }
  static WeightProfile unit() { return WeightProfile(WeightFamily::unit, 1.0); }

  WeightFamily family() const noexcept { return family_; }
  double lambda() const noexcept { return lambda_; }

  double phi(double x) const { return eval(x)[0]; }
  double dphi(double x) const { return eval(x)[1]; }
  double d3phi(double x) const { return eval(x)[3]; }

  /// sqrt(phi'), defined where phi' >= 0.
  double omega(double x) const {
    const double d = dphi(x);
    if (d < 0) throw Error(Errc::negative_weight, "phi' < 0 at x=" + std::to_string(x));
    return std::sqrt(d);
  }

  /// {phi, phi', phi'', phi'''} at x.
  std::array<double, 4> eval(double x) const {
    switch (family_) {
      case WeightFamily::tanh_lambda: {
        const double y = x / lambda_;
        const double s2 = 1.0 / (std::cosh(y) * std::cosh(y));
        const double th = std::tanh(y);
        return {lambda_ * th, s2, -2.0 * s2 * th / lambda_,
                (4.0 * s2 - 6.0 * s2 * s2) / (lambda_ * lambda_)};
      }
      case WeightFamily::cutoff: {
        if (x <= -1.0) return {1.0, 0.0, 0.0, 0.0};
        if (x >= 0.0) return {0.0, 0.0, 0.0, 0.0};
        const double r = x + 1.0;
        const double r2 = r * r, r3 = r2 * r;
        return {1.0 - (6.0 * r3 * r2 - 15.0 * r2 * r2 + 10.0 * r3),
                -30.0 * r2 * (1.0 - r) * (1.0 - r),
                -30.0 * (2.0 * r - 6.0 * r2 + 4.0 * r3),
                -60.0 * (1.0 - 6.0 * r + 6.0 * r2)};
      }
      case WeightFamily::bump: {
        const double z = 4.0 * x + 2.0;
        if (std::abs(z) >= 1.0) return {0.0, 0.0, 0.0, 0.0};
        const double w = 1.0 - z * z;
        const double e = std::exp(1.0 - 1.0 / w);
        const double g1 = -2.0 * z / (w * w);
        const double g2 = -2.0 / (w * w) - 8.0 * z * z / (w * w * w);
        const double g3 = -24.0 * z / (w * w * w) - 48.0 * z * z * z / (w * w * w * w);
        return {e, 4.0 * g1 * e, 16.0 * (g2 + g1 * g1) * e,
                64.0 * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1) * e};
      }
      case WeightFamily::sech_plain: {
        const double s = 1.0 / std::cosh(x);
        const double th = std::tanh(x);
        return {s, -s * th, s * (1.0 - 2.0 * s * s), -s * th * (1.0 - 6.0 * s * s)};
      }
      case WeightFamily::unit: return {1.0, 0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0, 0.0};
  }

 private:
  WeightProfile(WeightFamily f, double lambda) : family_(f), lambda_(lambda) {}

  WeightFamily family_;
  double lambda_;
};

/// sup |bump| / |cutoff'| and sup |bump'| / |cutoff'| over the bump support.
inline std::pair<double, double> bump_comparability(int samples = 20001) {
  const auto b = WeightProfile::bump();
  const auto c = WeightProfile::cutoff();
  double c0 = 0.0, c1 = 0.0;
  for (int i = 1; i < samples - 1; ++i) {
    const double s = -0.75 + 0.5 * i / (samples - 1);
    const auto be = b.eval(s);
    const double cp = std::abs(c.dphi(s));
    c0 = std::max(c0, be[0] / cp);
    c1 = std::max(c1, std::abs(be[1]) / cp);
  }
  return {c0, c1};
}

/// Non-decreasing envelope f(t) of a monitored norm, normalized to 1 at the
/// first knot; piecewise linear between knots.
class Envelope {
 public:
  void push(double t, double value) {
    if (!knots_.empty() && t <= knots_.back().first)
      throw Error(Errc::invalid_parameter, "envelope knots must increase in t");
    if (knots_.empty()) scale_ = value > 0 ? value : 1.0;
    running_ = std::max(running_, value / scale_);
    knots_.emplace_back(t, std::max(1.0, running_));
  }

  bool empty() const noexcept { return knots_.empty(); }
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

  double value(double t) const {
    if (knots_.empty()) return 1.0;
    if (t <= knots_.front().first) return knots_.front().second;
    if (t >= knots_.back().first) return knots_.back().second;
    const std::size_t i = segment(t);
    const auto [t0, f0] = knots_[i - 1];
    const auto [t1, f1] = knots_[i];
    return f0 + (f1 - f0) * (t - t0) / (t1 - t0);
  }

  /// Slope of the segment ending at or containing t.
  double slope(double t) const {
    if (knots_.size() < 2 || t <= knots_.front().first) return 0.0;
    const std::size_t i = t >= knots_.back().first ? knots_.size() - 1 : segment(t);
    const auto [t0, f0] = knots_[i - 1];
    const auto [t1, f1] = knots_[i];
    return (f1 - f0) / (t1 - t0);
  }

 private:
  std::size_t segment(double t) const {
    auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                               [](const auto& k, double v) { return k.first < v; });
    return static_cast<std::size_t>(it - knots_.begin());
  }

  std::vector<std::pair<double, double>> knots_;
  double scale_ = 1.0;
  double running_ = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// lambda(t) = t log^{1+delta}(t) f(t), mu = lambda, for t >= 2.
class Curve {
 public:
  static Curve constant(double delta, double f_const) {
    if (!(delta > 0)) throw Error(Errc::invalid_parameter, "delta must be > 0");
    if (!(f_const > 0)) throw Error(Errc::invalid_parameter, "f constant must be > 0");
    return Curve(delta, f_const, nullptr);
  }

  static Curve tracked(double delta, std::shared_ptr<const Envelope> env) {
    if (!(delta > 0)) throw Error(Errc::invalid_parameter, "delta must be > 0");
    return Curve(delta, 1.0, std::move(env));
  }

  double delta() const noexcept { return delta_; }
  bool is_tracked() const noexcept { return env_ != nullptr; }

  double f(double t) const { return env_ ? env_->value(t) : f_const_; }
  double df(double t) const { return env_ ? env_->slope(t) : 0.0; }

  double lambda(double t) const {
    check(t);
    return t * std::pow(std::log(t), 1.0 + delta_) * f(t);
  }

  double dlambda(double t) const {
    check(t);
    const double lg = std::log(t);
    const double base = std::pow(lg, 1.0 + delta_) + (1.0 + delta_) * std::pow(lg, delta_);
    return base * f(t) + t * std::pow(lg, 1.0 + delta_) * df(t);
  }

  double mu(double t) const { return lambda(t); }
  double dmu(double t) const { return dlambda(t); }

  /// Right half of the mirrored far-field region; the left half is its negative.
  Interval region(double t) const {
    const double l = lambda(t), m = mu(t);
    return {m + 0.25 * l, m + 0.75 * l};
  }

  double scaled(double x, double t) const { return (x + mu(t)) / lambda(t); }

 private:
  Curve(double delta, double f_const, std::shared_ptr<const Envelope> env)
      : delta_(delta), f_const_(f_const), env_(std::move(env)) {}

  static void check(double t) {
    if (!(t >= 2.0)) throw Error(Errc::invalid_parameter, "curve is defined for t >= 2");
  }

  double delta_;
  double f_const_;
  std::shared_ptr<const Envelope> env_;
};

}  // namespace zvl
