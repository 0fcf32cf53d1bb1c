#include "ndg/spectral_field.hpp"

#include <cstring>
#include <string>

#include "ndg/errors.hpp"

namespace ndg {

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("SpectralField: null grid");
  c1_.assign(grid_->slots(), cplx{});
  c2_.assign(grid_->slots(), cplx{});
}

bool SpectralField::same_grid(const SpectralField& other) const {
  if (!grid_ || !other.grid_) return false;
  return grid_ == other.grid_ || grid_->spec() == other.grid_->spec();
}

void SpectralField::require_same(const SpectralField& o, const char* what) const {
  if (!same_grid(o)) throw GridMismatch(std::string(what) + ": fields live on different grids");
}

std::pair<cplx, cplx> SpectralField::mode(int k1, int k2) const {
  std::size_t s;
  bool conj;
  if (!grid_->lookup(k1, k2, s, conj)) return {};
  if (conj) return {std::conj(c1_[s]), std::conj(c2_[s])};
  return {c1_[s], c2_[s]};
}

void SpectralField::set_mode(int k1, int k2, cplx a1, cplx a2) {
  std::size_t s;
  bool conj;
  if (!grid_->lookup(k1, k2, s, conj) || grid_->is_nyquist(s)) return;
  if (conj) {
    a1 = std::conj(a1);
    a2 = std::conj(a2);
  }
  c1_[s] = a1;
  c2_[s] = a2;
  const std::size_t p = grid_->column0_partner(s);
  if (p != s) {
    c1_[p] = std::conj(a1);
    c2_[p] = std::conj(a2);
  } else if (grid_->k2(s) == 0) {
    // k = 0 itself: only a real value is consistent.
    c1_[s] = a1.real();
    c2_[s] = a2.real();
  }
}

void SpectralField::set_zero() {
  std::fill(c1_.begin(), c1_.end(), cplx{});
  std::fill(c2_.begin(), c2_.end(), cplx{});
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same(o, "operator+=");
  for (std::size_t i = 0; i < c1_.size(); ++i) {
    c1_[i] += o.c1_[i];
    c2_[i] += o.c2_[i];
  }
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same(o, "operator-=");
  for (std::size_t i = 0; i < c1_.size(); ++i) {
    c1_[i] -= o.c1_[i];
    c2_[i] -= o.c2_[i];
  }
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : c1_) v *= s;
  for (auto& v : c2_) v *= s;
  return *this;
}

SpectralField& SpectralField::axpy(double s, const SpectralField& o) {
  require_same(o, "axpy");
  for (std::size_t i = 0; i < c1_.size(); ++i) {
    c1_[i] += s * o.c1_[i];
    c2_[i] += s * o.c2_[i];
  }
  return *this;
}

bool SpectralField::identical(const SpectralField& o) const {
  if (!same_grid(o)) return false;
  return std::memcmp(c1_.data(), o.c1_.data(), c1_.size() * sizeof(cplx)) == 0 &&
         std::memcmp(c2_.data(), o.c2_.data(), c2_.size() * sizeof(cplx)) == 0;
}

}  // namespace ndg
