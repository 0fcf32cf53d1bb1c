#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndg/solver.hpp"
#include "ndg/spectral_field.hpp"
#include "ndg/spectral_ops.hpp"

namespace ndg {

enum class ObserverKind { fourier, volume_average };

/// Declarative description of an interpolant. For fourier, either `modes`
/// (conjugate pairs) or `max_ksq` (keep integer |k|^2 <= max_ksq) is used.
struct ObserverSpec {
  ObserverKind kind = ObserverKind::fourier;
  std::size_t modes = 0;
  int max_ksq = -1;
  int cells = 0;
  double mollify_width = 0.8;
};

std::string observer_kind_name(ObserverKind k);
ObserverKind parse_observer_kind(const std::string& s);

/// Linear interpolant I_h: low-mode projection or smoothed volume averages.
class ObservationOperator {
 public:
  ObservationOperator(GridPtr grid, const ObserverSpec& spec);

  static ObservationOperator fourier(GridPtr grid, std::size_t modes);
  static ObservationOperator volume_average(GridPtr grid, int cells, double mollify_width = 0.8);

  SpectralField apply(const SpectralField& u) const;
  /// apply() into an existing field on the same grid.
  void apply_into(const SpectralField& u, SpectralField& out) const;

  ObserverKind kind() const { return spec_.kind; }
  const ObserverSpec& spec() const { return spec_; }
  const GridPtr& grid() const { return grid_; }
  /// Conjugate pairs kept (fourier).
  std::size_t modes() const { return spec_.modes; }
  int cells() const { return spec_.cells; }
  /// lambda_{m+1}^{-1/2} (fourier) or the cell diameter (volume_average).
  double h_eff() const { return h_eff_; }
  /// Cell side length (volume_average).
  double cell_side() const { return side_; }
  /// Fourier output of a divergence-free input is divergence-free.
  bool preserves_divergence_free() const { return spec_.kind == ObserverKind::fourier; }
  /// Duplicated 0/1 mode mask (fourier only).
  const std::vector<double>& mask() const { return mask_; }

  /// Overlap bound for the enlarged supports (3 x 3 neighbourhood).
  int overlap_bound() const { return 9; }
  /// max |grad psi_j| * h_eff of the continuous profiles.
  double gradient_constant() const { return c0_grad_; }

  /// Collocation samples of the 1D profile of cell a (length n).
  const std::vector<double>& profile(int a) const { return profiles_[std::size_t(a)]; }
  /// sum_j coeffs_j psi_j on the collocation grid, coeffs indexed a * cells + b.
  void combine(const std::vector<double>& coeffs, double* out) const;
  /// Exact cell means of a collocation array.
  std::vector<double> cell_means(const double* samples) const;

 private:
  struct Span {
    int start;
    std::vector<double> w;
  };

  void build_profiles();

  GridPtr grid_;
  ObserverSpec spec_;
  double h_eff_ = 0.0, side_ = 0.0, c0_grad_ = 0.0;
  std::vector<double> mask_;
  std::vector<std::size_t> kept_;
  std::vector<std::vector<double>> profiles_;
  std::vector<Span> spans_;
};

/// Smooth step S(t) = f(t) / (f(t) + f(1 - t)), f(t) = exp(-1/t) for t > 0.
double smooth_step(double t);
double smooth_step_derivative(double t);

struct NoiseModel {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic noise field for observation n: per-cell vectors (volume)
/// or per-retained-pair perturbations (fourier), each of length <= epsilon.
SpectralField draw_noise(const NoiseModel& model, std::uint64_t n, const ObservationOperator& op);

struct ObservationStream {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  double kappa = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  ObserverSpec op;
  /// max |eta_n|_L2 over the stream.
  double e0_measured = 0.0;
  /// max ||eta_n||_H1 over the stream.
  double e1_measured = 0.0;

  std::size_t size() const { return times.size(); }
  double max_gap() const;
  /// Throws InputError if times do not increase or a gap exceeds kappa.
  void validate() const;
};

/// Writes u~ = P_sigma(I_h u + eta_n) into out; returns the noise norms.
NormReport observe(const ObservationOperator& op, const SpectralField& u, const NoiseModel& model, std::uint64_t n,
                   SpectralField& out);

/// u~(t_n) = P_sigma(I_h u(t_n) + eta_n) at each requested time, which must
/// be a stored sample of u.
ObservationStream observe_trajectory(const Trajectory& u, const std::vector<double>& times,
                                     const ObservationOperator& op, const NoiseModel& model, double kappa);

/// Manifest (manifest.json) plus one NDG2 snapshot per observation.
void write_stream(const std::string& dir, const ObservationStream& s);
ObservationStream read_stream(const std::string& dir);

/// max |phi - I_h phi|_L2 / (h_eff ||phi||_H1) over the corpus.
double estimate_c0(const ObservationOperator& op, const std::vector<SpectralField>& corpus);
/// max |I_h phi|_L2 / |phi|_L2 over non-zero corpus members.
double estimate_c1(const ObservationOperator& op, const std::vector<SpectralField>& corpus);

}  // namespace ndg
