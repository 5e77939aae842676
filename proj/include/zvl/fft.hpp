#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>

namespace zvl::detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Out-of-place complex DFT pair of fixed length. FFTW planning is not
// thread-safe, execution of an existing plan on new arrays is.
class FftPlan {
 public:
  explicit FftPlan(int n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_complex* a = fftw_alloc_complex(n);
    fftw_complex* b = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, flags);
    fftw_free(a);
    fftw_free(b);
  }

  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int size() const noexcept { return n_; }

  // `in` is not modified (out-of-place c2c preserves its input).
  void forward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(forward_, cast(in), reinterpret_cast<fftw_complex*>(out));
  }

  /// Unnormalized inverse.
  void backward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(backward_, cast(in), reinterpret_cast<fftw_complex*>(out));
  }

 private:
  static fftw_complex* cast(const std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
  }

  int n_;
  fftw_plan forward_;
  fftw_plan backward_;
};

}  // namespace zvl::detail
