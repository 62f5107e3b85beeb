#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace snakesynth {

/// Real-to-complex FFT of a fixed size, backed by FFTW. Each instance owns
/// its plans and buffers; distinct instances may run on different threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Unnormalized forward transform: n reals -> n/2+1 complex bins.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Inverse transform scaled by 1/n, so inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace snakesynth
