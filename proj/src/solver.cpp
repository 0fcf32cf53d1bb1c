#include "ndg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "ndg/errors.hpp"
#include "ndg/kernels.hpp"
#include "ndg/rng.hpp"
#include "ndg/spectral_ops.hpp"

namespace ndg {

Scheme parse_scheme(const std::string& s) {
  if (s == "imex_cnab2") return Scheme::imex_cnab2;
  if (s == "imex_euler") return Scheme::imex_euler;
  throw InputError("unknown scheme '" + s + "' (expected imex_cnab2 or imex_euler)");
}

const char* scheme_name(Scheme s) { return s == Scheme::imex_cnab2 ? "imex_cnab2" : "imex_euler"; }

void SolverConfig::validate() const {
  grid.validate();
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InputError("solver: viscosity must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("solver: dt must be positive");
  if (!(cfl > 0.0)) throw InputError("solver: cfl must be positive");
}

Stepper::Stepper(const SolverConfig& cfg, SpectralField u0, double t0)
    : cfg_(cfg), grid_(Grid::get(cfg.grid)), u_(std::move(u0)), t_(t0) {
  cfg_.validate();
  if (u_.empty() || !(u_.grid()->spec() == cfg_.grid)) throw GridMismatch("Stepper: initial state not on cfg.grid");
  truncate_to_band(u_);
  b_cur_ = SpectralField(grid_);
  b_prev_ = SpectralField(grid_);
}

void Stepper::refresh() {
  project_leray_inplace(u_);
  std::swap(b_prev_, b_cur_);
  kernels::SpeedStats st;
  advect_self_into(u_, b_cur_, &st);
  ++evaluations_;
  if (!st.finite) throw BlowUp("non-finite velocity at t = " + std::to_string(t_));
  max_speed_ = std::sqrt(st.max_speed_sq);
  if (cfg_.dt * max_speed_ > cfg_.cfl * grid_->dx())
    throw CflViolation("CFL bound exceeded at t = " + std::to_string(t_) + ": dt*max|u|/dx = " +
                       std::to_string(cfg_.dt * max_speed_ / grid_->dx()));
  have_prev_ = have_b_;
  have_b_ = true;
  t_prev_ = t_cur_;
  t_cur_ = t_;
}

void Stepper::advance_to(double t_end, const SpectralField& forcing) {
  if (!forcing.same_grid(u_)) throw GridMismatch("Stepper: forcing not on the state grid");
  if (t_end < t_) throw std::invalid_argument("Stepper: cannot advance backwards");
  const auto& k = kernels::active();
  const double dt = cfg_.dt;
  const double theta = cfg_.scheme == Scheme::imex_cnab2 ? 0.5 : 1.0;
  const bool ab2 = cfg_.scheme == Scheme::imex_cnab2;
  const double* ksq = grid_->ksq().data();
  const auto rows = grid_->band_spans();
  while (t_ < t_end) {
    if (!have_b_ || t_ - t_cur_ >= dt * (1.0 - 1e-9)) refresh();
    const double s_end = std::min(t_end, t_cur_ + dt);
    kernels::SubstepParams p;
    p.nu = cfg_.nu;
    p.tau = s_end - t_;
    p.theta = theta;
    p.extrap = (ab2 && have_prev_) ? (t_ + 0.5 * p.tau - t_cur_) / (t_cur_ - t_prev_) : 0.0;
    // Outside the band the state, B and the (truncated) forcing are zero.
    for (int c = 0; c < 2; ++c) {
      const double* bp = (have_prev_ ? b_prev_ : b_cur_).raw(c);
      for (const auto& [lo, hi] : rows)
        k.substep(u_.raw(c) + 2 * lo, forcing.raw(c) + 2 * lo, b_cur_.raw(c) + 2 * lo, bp + 2 * lo, ksq + 2 * lo, p,
                  2 * (hi - lo));
    }
    ++substeps_;
    t_ = s_end;
  }
  t_ = t_end;
}

SpectralField step(const SpectralField& state, const SpectralField& g, const SpectralField& extra,
                   const SolverConfig& cfg) {
  Stepper s(cfg, state, 0.0);
  s.advance_to(cfg.dt, g + extra);
  return s.state();
}

void Trajectory::append(double t, SpectralField f) {
  if (!times.empty() && !(t > times.back())) throw std::invalid_argument("Trajectory: times must increase");
  times.push_back(t);
  fields.push_back(std::move(f));
}

const SpectralField* Trajectory::find(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) return nullptr;
  return &fields[std::size_t(it - times.begin())];
}

void Trajectory::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path);
  os.precision(17);
  os << "t,l2,h1,energy,enstrophy\n";
  for (std::size_t i = 0; i < size(); ++i) {
    const auto r = norms(fields[i]);
    os << times[i] << ',' << r.l2 << ',' << r.h1 << ',' << 0.5 * r.l2 * r.l2 << ',' << 0.5 * r.h1 * r.h1 << '\n';
  }
}

namespace {

std::vector<double> landing_times(double t0, double t1, const std::vector<double>& checkpoints, double stride) {
  std::vector<double> out;
  for (double c : checkpoints) {
    if (c < t0 || c > t1) throw InputError("integrate: checkpoint " + std::to_string(c) + " outside [t0, t1]");
    out.push_back(c);
  }
  if (stride > 0.0) {
    const auto count = std::size_t(std::floor((t1 - t0) / stride + 1e-9));
    for (std::size_t i = 1; i <= count; ++i) out.push_back(t0 + double(i) * stride);
  }
  out.push_back(t1);
  std::sort(out.begin(), out.end());
  std::vector<double> uniq;
  for (double t : out) {
    if (t <= t0) continue;
    if (!uniq.empty() && t - uniq.back() <= 1e-12 * std::max(1.0, std::abs(t))) {
      // Prefer an explicitly requested checkpoint over a stride point.
      if (std::find(checkpoints.begin(), checkpoints.end(), t) != checkpoints.end()) uniq.back() = t;
      continue;
    }
    uniq.push_back(std::min(t, t1));
  }
  return uniq;
}

}  // namespace

Trajectory integrate(const SpectralField& u0, const SpectralField& g, double t0, double t1, const SolverConfig& cfg,
                     const std::vector<double>& checkpoints, double sample_stride) {
  if (!(t1 > t0)) throw InputError("integrate: t1 must exceed t0");
  Trajectory traj;
  traj.stride = sample_stride;
  Stepper s(cfg, u0, t0);
  traj.append(t0, u0);
  for (double t : landing_times(t0, t1, checkpoints, sample_stride)) {
    s.advance_to(t, g);
    traj.append(t, s.state());
  }
  return traj;
}

SpinUpResult spin_up(const SpectralField& g, const SolverConfig& cfg, double duration, std::uint64_t seed,
                     double sample_every) {
  if (!(duration > 0.0)) throw InputError("spin_up: duration must be positive");
  auto grid = Grid::get(cfg.grid);
  const double gl2 = l2_norm(g);
  SpectralField u0 = random_field(grid, rng::derive(seed, "spinup-initial"), 1.0, std::min(8, grid->band_limit()));
  const double r = l2_norm(u0);
  if (r > 0.0) u0 *= 0.5 * gl2 / (cfg.nu * grid->lambda1()) / r;

  SpinUpResult out;
  out.duration = duration;
  if (!(sample_every > 0.0)) sample_every = cfg.dt;
  Stepper s(cfg, std::move(u0), 0.0);
  const auto count = std::size_t(std::ceil(duration / sample_every - 1e-9));
  auto record = [&](double t) {
    const auto n = norms(s.state());
    out.series.push_back({t, n.l2, n.h1});
    if (t >= 0.5 * duration) {
      out.m0_emp = std::max(out.m0_emp, n.l2);
      out.m1_emp = std::max(out.m1_emp, n.h1);
    }
  };
  record(0.0);
  for (std::size_t i = 1; i <= count; ++i) {
    const double t = std::min(duration, double(i) * sample_every);
    s.advance_to(t, g);
    record(t);
  }
  out.state = s.state();
  return out;
}

double grashof(const SpectralField& g, double nu, double lambda1) {
  if (!(nu > 0.0) || !(lambda1 > 0.0)) throw InputError("grashof: nu and lambda1 must be positive");
  return l2_norm(g) / (nu * nu * lambda1);
}

SpectralField taylor_green(double amplitude, double t, double nu, const GridPtr& grid) {
  if (std::abs(grid->length() - 2.0 * std::numbers::pi) > 1e-12)
    throw InputError("taylor_green: requires domain side 2*pi");
  SpectralField f(grid);
  const double s = 0.25 * amplitude * std::exp(-2.0 * nu * t);
  f.set_mode(1, 1, cplx(0, -s), cplx(0, s));
  f.set_mode(1, -1, cplx(0, -s), cplx(0, -s));
  return f;
}

SpectralField make_forcing(const GridPtr& grid, double G, double nu, double kmin, double kmax, std::uint64_t seed) {
  if (G < 0.0) throw InputError("forcing: Grashof target must be non-negative");
  SpectralField g = random_field(grid, seed, kmin, kmax, 0.0);
  truncate_to_band(g);
  const double r = l2_norm(g);
  if (r == 0.0) {
    if (G > 0.0) throw InputError("forcing: the requested band contains no resolved modes");
    return g;
  }
  g *= G * nu * nu * grid->lambda1() / r;
  return g;
}

}  // namespace ndg
