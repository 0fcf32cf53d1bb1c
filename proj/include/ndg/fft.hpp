#pragma once

#include <cstddef>
#include <vector>

#include "ndg/spectral_field.hpp"

namespace ndg {

/// Real <-> half-complex 2D transforms for one grid size, backed by FFTW.
///
/// forward() returns coefficients scaled by 1/n^2 with column 0 made exactly
/// Hermitian and Nyquist slots zeroed; inverse() evaluates the Fourier sum.
/// Instances are per thread (see local()); plans are created under a global
/// lock because the FFTW planner is not reentrant.
class Fft {
 public:
  explicit Fft(const Grid& grid);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  static Fft& local(const Grid& grid);

  std::size_t physical_size() const { return phys_; }

  /// Inverse transform of one or two half-layout arrays.
  void inverse(const cplx* a, double* pa);
  void inverse(const cplx* a, const cplx* b, double* pa, double* pb);
  /// Forward transform of one or two n x n real arrays.
  void forward(const double* pa, cplx* a);
  void forward(const double* pa, const double* pb, cplx* a, cplx* b);

 private:
  void finish_forward(cplx* out) const;

  const Grid& grid_;
  std::size_t phys_, slots_;
  double* rbuf_ = nullptr;
  cplx* cbuf_ = nullptr;
  void* fwd1_ = nullptr;
  void* fwd2_ = nullptr;
  void* inv1_ = nullptr;
  void* inv2_ = nullptr;
};

/// Physical-space samples of both components, each n x n row-major
/// (index i * n + j <-> x = (i dx, j dx)).
struct PhysicalField {
  int n = 0;
  std::vector<double> u1, u2;
};

PhysicalField to_physical(const SpectralField& u);
SpectralField from_physical(const GridPtr& grid, const std::vector<double>& u1, const std::vector<double>& u2);

}  // namespace ndg
