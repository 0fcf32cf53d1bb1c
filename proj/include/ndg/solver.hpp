#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndg/spectral_field.hpp"

namespace ndg {

enum class Scheme { imex_cnab2, imex_euler };

Scheme parse_scheme(const std::string& s);
const char* scheme_name(Scheme s);

struct SolverConfig {
  double nu = 1.0;
  /// Interval between evaluations of the nonlinear term; also the maximum
  /// substep.
  double dt = 1e-3;
  Scheme scheme = Scheme::imex_cnab2;
  GridSpec grid;
  /// Courant limit: dt * max|u| <= cfl * dx.
  double cfl = 0.5;

  void validate() const;
};

/// Time integrator for du/dt + nu A u + B(u, u) = f with f piecewise constant.
///
/// Viscous term: theta-scheme (Crank-Nicolson for imex_cnab2, backward Euler
/// for imex_euler). B is re-evaluated every cfg.dt; in between, each substep
/// uses B extrapolated linearly (AB2) to the substep midpoint, so steps can be
/// cut anywhere to land on requested times without extra transforms. The
/// first evaluation has no history and falls back to Euler. The state is a
/// Galerkin approximation in the dealiasing band: the initial data is
/// truncated to it, and forcing is expected to be band-limited (rows beyond
/// the band are skipped).
class Stepper {
 public:
  Stepper(const SolverConfig& cfg, SpectralField u0, double t0 = 0.0);

  /// Advances to t_end (hit exactly) with forcing held constant.
  void advance_to(double t_end, const SpectralField& forcing);

  const SpectralField& state() const { return u_; }
  double time() const { return t_; }
  const SolverConfig& config() const { return cfg_; }
  std::size_t evaluations() const { return evaluations_; }
  std::size_t substeps() const { return substeps_; }
  /// max |u| on the collocation grid at the latest evaluation of B.
  double max_speed() const { return max_speed_; }

 private:
  void refresh();

  SolverConfig cfg_;
  GridPtr grid_;
  SpectralField u_, b_cur_, b_prev_;
  double t_ = 0.0, t_cur_ = 0.0, t_prev_ = 0.0;
  bool have_b_ = false, have_prev_ = false;
  double max_speed_ = 0.0;
  std::size_t evaluations_ = 0, substeps_ = 0;
};

/// One step of length cfg.dt from a cold start, forcing g + extra.
SpectralField step(const SpectralField& state, const SpectralField& g, const SpectralField& extra,
                   const SolverConfig& cfg);

/// Time-stamped field samples.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  double stride = 0.0;

  std::size_t size() const { return times.size(); }
  void append(double t, SpectralField f);
  /// Sample stored at exactly time t, or null.
  const SpectralField* find(double t) const;
  /// CSV with columns t, l2, h1, energy, enstrophy.
  void write_csv(const std::string& path) const;
};

/// Integrates from t0 to t1, landing exactly on every checkpoint and on each
/// multiple of sample_stride (if > 0). Samples are stored at t0, t1, the
/// checkpoints and the stride points.
Trajectory integrate(const SpectralField& u0, const SpectralField& g, double t0, double t1, const SolverConfig& cfg,
                     const std::vector<double>& checkpoints, double sample_stride = 0.0);

struct NormSample {
  double t, l2, h1;
};

struct SpinUpResult {
  SpectralField state;
  double m0_emp = 0.0;
  double m1_emp = 0.0;
  double duration = 0.0;
  std::vector<NormSample> series;
};

/// Integrates from a seeded random start for `duration` and returns the end
/// state with max |u|_L2 and max ||u||_H1 over the final half.
SpinUpResult spin_up(const SpectralField& g, const SolverConfig& cfg, double duration, std::uint64_t seed,
                     double sample_every = 0.0);

/// |g|_L2 / (nu^2 lambda1).
double grashof(const SpectralField& g, double nu, double lambda1);

/// (a sin x cos y, -a cos x sin y) exp(-2 nu t); requires L = 2 pi.
SpectralField taylor_green(double amplitude, double t, double nu, const GridPtr& grid);

/// Time-independent divergence-free forcing on integer shells
/// kmin <= |k| <= kmax with random phases, scaled to Grashof number G and
/// truncated to the dealiasing band.
SpectralField make_forcing(const GridPtr& grid, double G, double nu, double kmin, double kmax, std::uint64_t seed);

}  // namespace ndg
