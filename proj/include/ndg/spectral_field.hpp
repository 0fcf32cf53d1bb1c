#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "ndg/grid.hpp"

namespace ndg {

using cplx = std::complex<double>;

/// Two-component periodic vector field held as Fourier coefficients in the
/// half layout of its Grid. Coefficients are normalized so that
/// u(x) = sum_k u_hat(k) exp(i k.x).
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(GridPtr grid);

  const GridPtr& grid() const { return grid_; }
  bool empty() const { return !grid_; }
  bool same_grid(const SpectralField& other) const;

  std::vector<cplx>& c1() { return c1_; }
  std::vector<cplx>& c2() { return c2_; }
  const std::vector<cplx>& c1() const { return c1_; }
  const std::vector<cplx>& c2() const { return c2_; }
  std::vector<cplx>& comp(int c) { return c == 0 ? c1_ : c2_; }
  const std::vector<cplx>& comp(int c) const { return c == 0 ? c1_ : c2_; }

  /// Interleaved (re, im) view of one component, 2 * slots doubles.
  double* raw(int c) { return reinterpret_cast<double*>(comp(c).data()); }
  const double* raw(int c) const { return reinterpret_cast<const double*>(comp(c).data()); }
  std::size_t raw_size() const { return 2 * c1_.size(); }

  /// Coefficient pair at integer wavevector (k1, k2); zero outside the grid.
  std::pair<cplx, cplx> mode(int k1, int k2) const;
  /// Sets (k1, k2) and its conjugate partner consistently.
  void set_mode(int k1, int k2, cplx a1, cplx a2);

  void set_zero();
  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

  /// Exact coefficient-wise equality (bitwise on values).
  bool identical(const SpectralField& o) const;

 private:
  void require_same(const SpectralField& o, const char* what) const;

  GridPtr grid_;
  std::vector<cplx> c1_, c2_;
};

}  // namespace ndg
