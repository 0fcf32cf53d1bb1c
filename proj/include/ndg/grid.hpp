#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace ndg {

/// Periodic square (0,L)^2 sampled on n x n collocation points.
///
/// Spectral coefficients are kept in the real-to-complex half layout:
/// slot (i, j) with i in [0, n) and j in [0, n/2], i.e. k1 in FFT order and
/// k2 >= 0. Modes with k2 < 0 are implied by Hermitian symmetry. Nyquist
/// rows/columns (|k1| = n/2 or k2 = n/2) are always zero.
struct GridSpec {
  int n = 64;
  double length = 6.283185307179586;
  double dealias_fraction = 2.0 / 3.0;

  void validate() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Precomputed wavevector tables for one GridSpec.
///
/// Per-mode real tables are stored "duplicated" (two equal entries per slot)
/// so they line up with interleaved (re, im) coefficient arrays.
class Grid {
 public:
  static std::shared_ptr<const Grid> get(const GridSpec& spec);

  explicit Grid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int n() const { return spec_.n; }
  int half() const { return spec_.n / 2 + 1; }
  std::size_t slots() const { return slots_; }
  std::size_t physical_size() const { return std::size_t(spec_.n) * spec_.n; }

  double length() const { return spec_.length; }
  double area() const { return spec_.length * spec_.length; }
  double dx() const { return spec_.length / spec_.n; }
  /// Wavenumber unit 2*pi/L.
  double k0() const { return k0_; }
  /// Smallest positive Stokes eigenvalue (2*pi/L)^2.
  double lambda1() const { return k0_ * k0_; }

  std::size_t slot(int i, int j) const { return std::size_t(i) * half() + j; }
  int k1(std::size_t s) const { return k1_[s]; }
  int k2(std::size_t s) const { return k2_[s]; }
  /// Integer wavevector -> slot index in the stored half, and whether the
  /// stored value must be conjugated to obtain it.
  bool lookup(int k1, int k2, std::size_t& slot, bool& conjugate) const;

  bool is_nyquist(std::size_t s) const { return nyquist_[s] != 0; }
  bool in_band(std::size_t s) const { return band_[2 * s] != 0.0; }
  /// Largest retained |k_i| under the dealiasing rule.
  int band_limit() const { return band_limit_; }
  /// One slot range [begin, end) per row with |k1| <= band_limit(),
  /// covering columns 0..band_limit(); every in-band slot lies in one.
  const std::vector<std::pair<std::size_t, std::size_t>>& band_spans() const { return band_spans_; }
  /// Conjugate partner in column j = 0 (slot of -k), or the slot itself.
  std::size_t column0_partner(std::size_t s) const { return partner_[s]; }

  // Duplicated per-mode tables (length 2 * slots()).
  const std::vector<double>& kx() const { return kx_; }
  const std::vector<double>& ky() const { return ky_; }
  const std::vector<double>& ksq() const { return ksq_; }
  const std::vector<double>& inv_ksq() const { return inv_ksq_; }
  const std::vector<double>& band_mask() const { return band_; }
  /// Parseval weights: multiplicity * |k|^(2p) for p = 0, 1, 2.
  const std::vector<double>& weight(int p) const { return weights_[p]; }

  /// Number of conjugate pairs available to low_mode_project.
  std::size_t pair_count() const { return pair_ksq_.size(); }
  /// Rank of the conjugate pair containing slot s (SIZE_MAX for k = 0 or
  /// Nyquist slots).
  std::size_t pair_rank(std::size_t s) const { return rank_[s]; }
  /// Physical |k|^2 of the pair with the given rank.
  double pair_eigenvalue(std::size_t rank) const { return pair_ksq_[rank]; }
  /// Integer wavevector (canonical member) of the pair with the given rank.
  std::pair<int, int> pair_wavevector(std::size_t rank) const { return pair_k_[rank]; }
  /// Number of pairs whose integer |k|^2 does not exceed ksq_int.
  std::size_t pairs_within(int ksq_int) const;

 private:
  GridSpec spec_;
  std::size_t slots_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> band_spans_;
  double k0_ = 1.0;
  int band_limit_ = 0;
  std::vector<int> k1_, k2_;
  std::vector<std::uint8_t> nyquist_;
  std::vector<std::size_t> partner_;
  std::vector<double> kx_, ky_, ksq_, inv_ksq_, band_;
  std::vector<double> weights_[3];
  std::vector<std::size_t> rank_;
  std::vector<double> pair_ksq_;
  std::vector<std::pair<int, int>> pair_k_;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace ndg
