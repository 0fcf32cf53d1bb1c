#include "ndg/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace ndg {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft::Fft(const Grid& grid) : grid_(grid), phys_(grid.physical_size()), slots_(grid.slots()) {
  const int n = grid.n();
  const int dims[2] = {n, n};
  const int cdist = int(slots_), rdist = int(phys_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  rbuf_ = fftw_alloc_real(2 * phys_);
  cbuf_ = reinterpret_cast<cplx*>(fftw_alloc_complex(2 * slots_));
  if (!rbuf_ || !cbuf_) throw std::bad_alloc();
  auto* cb = reinterpret_cast<fftw_complex*>(cbuf_);
  const unsigned flags = FFTW_ESTIMATE;
  fwd1_ = fftw_plan_dft_r2c_2d(n, n, rbuf_, cb, flags);
  inv1_ = fftw_plan_dft_c2r_2d(n, n, cb, rbuf_, flags);
  fwd2_ = fftw_plan_many_dft_r2c(2, dims, 2, rbuf_, nullptr, 1, rdist, cb, nullptr, 1, cdist, flags);
  inv2_ = fftw_plan_many_dft_c2r(2, dims, 2, cb, nullptr, 1, cdist, rbuf_, nullptr, 1, rdist, flags);
  if (!fwd1_ || !inv1_ || !fwd2_ || !inv2_) throw std::runtime_error("fft: plan creation failed");
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  for (void* p : {fwd1_, fwd2_, inv1_, inv2_})
    if (p) fftw_destroy_plan(static_cast<fftw_plan>(p));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

Fft& Fft::local(const Grid& grid) {
  thread_local std::map<int, std::unique_ptr<Fft>> engines;
  auto& e = engines[grid.n()];
  if (!e) e = std::make_unique<Fft>(grid);
  return *e;
}

void Fft::inverse(const cplx* a, double* pa) {
  std::memcpy(cbuf_, a, slots_ * sizeof(cplx));
  fftw_execute(static_cast<fftw_plan>(inv1_));
  std::memcpy(pa, rbuf_, phys_ * sizeof(double));
}

void Fft::inverse(const cplx* a, const cplx* b, double* pa, double* pb) {
  std::memcpy(cbuf_, a, slots_ * sizeof(cplx));
  std::memcpy(cbuf_ + slots_, b, slots_ * sizeof(cplx));
  fftw_execute(static_cast<fftw_plan>(inv2_));
  std::memcpy(pa, rbuf_, phys_ * sizeof(double));
  std::memcpy(pb, rbuf_ + phys_, phys_ * sizeof(double));
}

void Fft::forward(const double* pa, cplx* a) {
  std::memcpy(rbuf_, pa, phys_ * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(fwd1_));
  std::memcpy(a, cbuf_, slots_ * sizeof(cplx));
  finish_forward(a);
}

void Fft::forward(const double* pa, const double* pb, cplx* a, cplx* b) {
  std::memcpy(rbuf_, pa, phys_ * sizeof(double));
  std::memcpy(rbuf_ + phys_, pb, phys_ * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(fwd2_));
  std::memcpy(a, cbuf_, slots_ * sizeof(cplx));
  std::memcpy(b, cbuf_ + slots_, slots_ * sizeof(cplx));
  finish_forward(a);
  finish_forward(b);
}

void Fft::finish_forward(cplx* out) const {
  const double scale = 1.0 / double(phys_);
  const int n = grid_.n();
  for (std::size_t s = 0; s < slots_; ++s) out[s] = grid_.is_nyquist(s) ? cplx{} : out[s] * scale;
  out[0] = out[0].real();
  for (int i = 1; i < n / 2; ++i) {
    const std::size_t s = grid_.slot(i, 0), p = grid_.slot(n - i, 0);
    const cplx avg = 0.5 * (out[s] + std::conj(out[p]));
    out[s] = avg;
    out[p] = std::conj(avg);
  }
}

PhysicalField to_physical(const SpectralField& u) {
  const Grid& g = *u.grid();
  PhysicalField p;
  p.n = g.n();
  p.u1.resize(g.physical_size());
  p.u2.resize(g.physical_size());
  Fft::local(g).inverse(u.c1().data(), u.c2().data(), p.u1.data(), p.u2.data());
  return p;
}

SpectralField from_physical(const GridPtr& grid, const std::vector<double>& u1, const std::vector<double>& u2) {
  if (u1.size() != grid->physical_size() || u2.size() != grid->physical_size())
    throw std::invalid_argument("from_physical: sample arrays do not match the grid");
  SpectralField f(grid);
  Fft::local(*grid).forward(u1.data(), u2.data(), f.c1().data(), f.c2().data());
  return f;
}

}  // namespace ndg
