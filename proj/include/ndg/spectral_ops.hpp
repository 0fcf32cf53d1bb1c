#pragma once

#include <cstdint>

#include "ndg/kernels.hpp"
#include "ndg/spectral_field.hpp"

namespace ndg {

struct NormReport {
  double l2 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};

SpectralField project_leray(SpectralField u);
void project_leray_inplace(SpectralField& u);

/// Multiplication by |k|^2.
SpectralField stokes_apply(SpectralField u);

/// Zeroes every coefficient outside the dealiasing band.
void truncate_to_band(SpectralField& u);

/// P_sigma((u . grad) v), pseudo-spectral with dealiasing.
SpectralField bilinear(const SpectralField& u, const SpectralField& v);

/// B(u, u) through the traceless momentum flux (four transforms instead of
/// eight). Agrees with bilinear(u, u) for divergence-free u. Optionally
/// reports the largest collocation speed squared.
SpectralField advect_self(const SpectralField& u, kernels::SpeedStats* stats = nullptr);
void advect_self_into(const SpectralField& u, SpectralField& out, kernels::SpeedStats* stats = nullptr);

/// Keeps the m lowest conjugate pairs (see Grid::pair_rank).
SpectralField low_mode_project(SpectralField u, std::size_t m);

NormReport norms(const SpectralField& u);
double l2_norm(const SpectralField& u);
double h1_norm(const SpectralField& u);
double l2_distance(const SpectralField& a, const SpectralField& b);
double h1_distance(const SpectralField& a, const SpectralField& b);
/// L2 inner product over the domain.
double inner(const SpectralField& a, const SpectralField& b);

/// max_k |k . u_hat(k)|.
double divergence_residual(const SpectralField& u);
/// Largest violation of reality: column-0 conjugate mismatch, imaginary
/// mean, Nyquist content.
double hermitian_residual(const SpectralField& u);
/// |u_hat(0)|.
double mean_magnitude(const SpectralField& u);

/// Random divergence-free field with content on integer shells
/// kmin <= |k| <= kmax and amplitude ~ |k|^(-slope). Coefficients are keyed by
/// (seed, k1, k2) so the same seed gives the same field on any grid that
/// resolves the shells.
SpectralField random_field(const GridPtr& grid, std::uint64_t seed, double kmin, double kmax, double slope = 1.0);

}  // namespace ndg
