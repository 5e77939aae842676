#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "zvl/error.hpp"
#include "zvl/fft.hpp"

namespace zvl {

using Complex = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<Complex>;

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

/// Uniform periodic mesh on [-L, L) with its Fourier dual.
class Grid {
 public:
  Grid(double half_length, int num_points) : half_length_(half_length), n_(num_points) {
    if (!(half_length > 0) || !std::isfinite(half_length))
      throw Error(Errc::invalid_parameter, "half_length must be positive and finite");
    if (num_points < 16 || !is_power_of_two(num_points))
      throw Error(Errc::invalid_parameter,
                  "num_points must be a power of two >= 16, got " + std::to_string(num_points));
    dx_ = 2.0 * half_length / num_points;
    nodes_.resize(n_);
    k_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      nodes_[j] = -half_length + j * dx_;
      const int m = j < n_ / 2 ? j : j - n_;
      k_[j] = std::numbers::pi * m / half_length;
    }
    // x_{N-j} = -x_j must hold bit-exactly for parity bookkeeping.
    for (int j = 1; j < n_ / 2; ++j) nodes_[n_ - j] = -nodes_[j];
    nodes_[n_ / 2] = 0.0;
    plan_ = std::make_shared<detail::FftPlan>(n_);
  }

  double half_length() const noexcept { return half_length_; }
  int size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& wavenumbers() const noexcept { return k_; }
  double node(int j) const { return nodes_[j]; }
  double k_max() const noexcept { return std::numbers::pi * (n_ / 2) / half_length_; }

  /// Index of the node at -x_j.
  int reflect(int j) const noexcept { return (n_ - j) % n_; }

  ComplexField forward(const ComplexField& f) const {
    check(f.size());
    ComplexField out(n_);
    plan_->forward(f.data(), out.data());
    return out;
  }

  /// Normalized inverse transform.
  ComplexField backward(const ComplexField& fh) const {
    check(fh.size());
    ComplexField out(n_);
    plan_->backward(fh.data(), out.data());
    const double s = 1.0 / n_;
    for (auto& z : out) z *= s;
    return out;
  }

  void check(std::size_t size) const {
    if (size != static_cast<std::size_t>(n_))
      throw Error(Errc::invalid_parameter, "field length " + std::to_string(size) +
                                               " does not match grid size " + std::to_string(n_));
  }

 private:
  double half_length_;
  int n_;
  double dx_;
  std::vector<double> nodes_;
  std::vector<double> k_;
  std::shared_ptr<const detail::FftPlan> plan_;
};

inline Grid make_grid(double half_length, int num_points) { return Grid(half_length, num_points); }

template <class F>
RealField sample(const Grid& g, F&& f) {
  RealField out(g.size());
  for (int j = 0; j < g.size(); ++j) out[j] = f(g.node(j));
  return out;
}

template <class F>
ComplexField sample_complex(const Grid& g, F&& f) {
  ComplexField out(g.size());
  for (int j = 0; j < g.size(); ++j) out[j] = f(g.node(j));
  return out;
}

inline ComplexField to_complex(const RealField& f) { return ComplexField(f.begin(), f.end()); }

inline RealField real_part(const ComplexField& f) {
  RealField out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = f[j].real();
  return out;
}

inline RealField imag_part(const ComplexField& f) {
  RealField out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = f[j].imag();
  return out;
}

inline RealField abs2(const ComplexField& f) {
  RealField out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = std::norm(f[j]);
  return out;
}

namespace detail {

// (ik)^order for mode j; odd orders drop the Nyquist mode.
inline Complex derivative_symbol(const Grid& g, int j, int order) {
  if (order % 2 == 1 && j == g.size() / 2) return 0.0;
  const double k = g.wavenumbers()[j];
  const double kp = std::pow(k, order);
  switch (order % 4) {
    case 0: return kp;
    case 1: return Complex(0.0, kp);
    case 2: return -kp;
    default: return Complex(0.0, -kp);
  }
}

inline void check_order(int order) {
  if (order < 1) throw Error(Errc::invalid_parameter, "derivative order must be >= 1");
}

}  // namespace detail

inline ComplexField spectral_derivative(const ComplexField& f, const Grid& g, int order = 1) {
  detail::check_order(order);
  ComplexField fh = g.forward(f);
  for (int j = 0; j < g.size(); ++j) fh[j] *= detail::derivative_symbol(g, j, order);
  return g.backward(fh);
}

inline RealField spectral_derivative(const RealField& f, const Grid& g, int order = 1) {
  return real_part(spectral_derivative(to_complex(f), g, order));
}

/// Derivatives of two real fields with one complex transform pair.
inline std::pair<RealField, RealField> spectral_derivative_pair(const RealField& a,
                                                               const RealField& b, const Grid& g,
                                                               int order = 1) {
  g.check(a.size());
  g.check(b.size());
  ComplexField z(g.size());
  for (int j = 0; j < g.size(); ++j) z[j] = Complex(a[j], b[j]);
  const ComplexField dz = spectral_derivative(z, g, order);
  return {real_part(dz), imag_part(dz)};
}

inline double integrate(const RealField& f, const Grid& g) {
  g.check(f.size());
  double s = 0.0;
  for (double x : f) s += x;
  return s * g.dx();
}

inline Complex integrate(const ComplexField& f, const Grid& g) {
  g.check(f.size());
  Complex s = 0.0;
  for (const auto& z : f) s += z;
  return s * g.dx();
}

inline double l2_norm(const RealField& f, const Grid& g) {
  g.check(f.size());
  double s = 0.0;
  for (double x : f) s += x * x;
  return std::sqrt(s * g.dx());
}

inline double l2_norm(const ComplexField& f, const Grid& g) {
  g.check(f.size());
  double s = 0.0;
  for (const auto& z : f) s += std::norm(z);
  return std::sqrt(s * g.dx());
}

/// Primitive with zero mean; requires f itself to have (numerically) zero mean.
inline RealField antiderivative_zero_mean(const RealField& f, const Grid& g) {
  g.check(f.size());
  double sum = 0.0, sq = 0.0;
  for (double x : f) {
    sum += x;
    sq += x * x;
  }
  const double mean = sum / g.size();
  const double rms = std::sqrt(sq / g.size());
  if (std::abs(mean) > 1e-10 * rms)
    throw Error(Errc::nonzero_mean, "field mean " + std::to_string(mean) + " is not zero");
  ComplexField fh = g.forward(to_complex(f));
  fh[0] = 0.0;
  fh[g.size() / 2] = 0.0;
  for (int j = 1; j < g.size(); ++j) {
    if (j == g.size() / 2) continue;
    fh[j] /= Complex(0.0, g.wavenumbers()[j]);
  }
  return real_part(g.backward(fh));
}

/// Zero every mode with |m| > N/3.
inline void dealias_two_thirds(ComplexField& f, const Grid& g) {
  ComplexField fh = g.forward(f);
  const int cut = g.size() / 3;
  for (int j = 0; j < g.size(); ++j) {
    const int m = j < g.size() / 2 ? j : j - g.size();
    if (std::abs(m) > cut) fh[j] = 0.0;
  }
  f = g.backward(fh);
}

inline void dealias_two_thirds(RealField& f, const Grid& g) {
  ComplexField z = to_complex(f);
  dealias_two_thirds(z, g);
  f = real_part(z);
}

}  // namespace zvl
