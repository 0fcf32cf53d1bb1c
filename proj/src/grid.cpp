#include "ndg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ndg {

void GridSpec::validate() const {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("grid: n_points_per_axis must be an even integer >= 4, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("grid: domain side must be positive");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) throw std::invalid_argument("grid: dealias_fraction must lie in (0, 1]");
}

std::shared_ptr<const Grid> Grid::get(const GridSpec& spec) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, std::shared_ptr<const Grid>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(spec.n, spec.length, spec.dealias_fraction);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto grid = std::make_shared<const Grid>(spec);
  cache.emplace(key, grid);
  return grid;
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const int n = spec_.n;
  const int h = half();
  slots_ = std::size_t(n) * h;
  k0_ = 2.0 * std::numbers::pi / spec_.length;

  // Strict 2/3-type rule: keep |k_i| < fraction * n / 2.
  const double cut = spec_.dealias_fraction * n / 2.0;
  band_limit_ = int(std::ceil(cut - 1e-9)) - 1;
  band_limit_ = std::min(band_limit_, n / 2 - 1);
  for (int i = 0; i < n; ++i)
    if (std::min(i, n - i) <= band_limit_) band_spans_.emplace_back(slot(i, 0), slot(i, band_limit_ + 1));

  k1_.resize(slots_);
  k2_.resize(slots_);
  nyquist_.resize(slots_);
  partner_.resize(slots_);
  kx_.resize(2 * slots_);
  ky_.resize(2 * slots_);
  ksq_.resize(2 * slots_);
  inv_ksq_.resize(2 * slots_);
  band_.resize(2 * slots_);
  for (auto& w : weights_) w.resize(2 * slots_);

  for (int i = 0; i < n; ++i) {
    const int a = i < n / 2 ? i : i - n;
    for (int j = 0; j < h; ++j) {
      const std::size_t s = slot(i, j);
      k1_[s] = a;
      k2_[s] = j;
      const bool nyq = (i == n / 2) || (j == n / 2);
      nyquist_[s] = nyq;
      partner_[s] = (j == 0 && !nyq) ? slot(i == 0 ? 0 : n - i, 0) : s;
      const double kx = k0_ * a, ky = k0_ * j;
      const double ksq = kx * kx + ky * ky;
      const bool band = !nyq && std::abs(a) <= band_limit_ && j <= band_limit_;
      const double mult = nyq ? 0.0 : (j == 0 ? 1.0 : 2.0);
      for (int c = 0; c < 2; ++c) {
        kx_[2 * s + c] = kx;
        ky_[2 * s + c] = ky;
        ksq_[2 * s + c] = ksq;
        inv_ksq_[2 * s + c] = ksq > 0.0 ? 1.0 / ksq : 0.0;
        band_[2 * s + c] = band ? 1.0 : 0.0;
        weights_[0][2 * s + c] = mult;
        weights_[1][2 * s + c] = mult * ksq;
        weights_[2][2 * s + c] = mult * ksq * ksq;
      }
    }
  }

  // Conjugate-pair ordering: |k|^2 ascending, ties by (k1, k2) of the
  // canonical member (k1 > 0, or k1 == 0 and k2 > 0).
  struct Pair {
    int ksq, k1, k2;
  };
  std::vector<Pair> pairs;
  for (int a = -n / 2 + 1; a < n / 2; ++a)
    for (int b = -n / 2 + 1; b < n / 2; ++b)
      if (a > 0 || (a == 0 && b > 0)) pairs.push_back({a * a + b * b, a, b});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return std::tie(x.ksq, x.k1, x.k2) < std::tie(y.ksq, y.k1, y.k2);
  });
  pair_ksq_.resize(pairs.size());
  pair_k_.resize(pairs.size());
  std::map<std::pair<int, int>, std::size_t> rank_of;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    pair_ksq_[r] = k0_ * k0_ * pairs[r].ksq;
    pair_k_[r] = {pairs[r].k1, pairs[r].k2};
    rank_of[{pairs[r].k1, pairs[r].k2}] = r;
  }
  rank_.assign(slots_, std::numeric_limits<std::size_t>::max());
  for (std::size_t s = 0; s < slots_; ++s) {
    if (nyquist_[s]) continue;
    int a = k1_[s], b = k2_[s];
    if (a == 0 && b == 0) continue;
    if (!(a > 0 || (a == 0 && b > 0))) {
      a = -a;
      b = -b;
    }
    rank_[s] = rank_of.at({a, b});
  }
}

bool Grid::lookup(int a, int b, std::size_t& s, bool& conjugate) const {
  const int n = spec_.n;
  if (std::abs(a) >= n / 2 || std::abs(b) >= n / 2) return false;
  conjugate = b < 0;
  if (conjugate) {
    a = -a;
    b = -b;
  }
  s = slot(a >= 0 ? a : a + n, b);
  return true;
}

std::size_t Grid::pairs_within(int ksq_int) const {
  const double limit = k0_ * k0_ * (ksq_int + 0.5);
  return std::size_t(std::upper_bound(pair_ksq_.begin(), pair_ksq_.end(), limit) - pair_ksq_.begin());
}

}  // namespace ndg
