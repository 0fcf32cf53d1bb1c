#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ndg/observers.hpp"
#include "ndg/solver.hpp"

namespace ndg {

/// Attractor and noise bounds entering the condition checks.
struct Bounds {
  double M0 = 0.0;
  double M1 = 0.0;
  double E0 = 0.0;
  double E1 = 0.0;
};

struct NudgingParams {
  double beta = 0.0;
  double kappa = 0.0;
  ObserverSpec op;
  double epsilon = 0.0;
  /// Stands in for every unspecified absolute constant in the conditions.
  double safety_c = 1.0;
  Bounds bounds;
};

struct Condition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

/// Advisory report; never blocks a run.
struct ConditionReport {
  std::vector<Condition> items;
  bool overall = true;
  /// Largest admissible kappa and the minimum entry it came from.
  double kappa_max = 0.0;
  std::vector<double> kappa_entries;
  double beta_kappa = 0.0;
  /// beta * kappa <= 1/2.
  bool beta_kappa_ok = true;

  void add(std::string name, double lhs, double rhs, bool ok);
  const Condition* find(const std::string& name) const;
};

/// beta >= c M1^2 / nu;  lambda_{m+1} >= 6 beta / nu;  kappa <= (c / beta) min{8 entries}.
ConditionReport check_conditions_fourier(const NudgingParams& p, double nu, double lambda1, double lambda_m1);

/// beta >= c (M1+E1)^2 / nu (1 + log((M1+E1)/(nu lambda1^1/2)));
/// kappa <= (c / beta) min{6 entries};  h <= (nu / beta)^1/2 / (2 c0).
ConditionReport check_conditions_general(const NudgingParams& p, double nu, double lambda1, double c0_emp, double h);

/// Observations consumed in increasing index order.
class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  virtual std::size_t size() const = 0;
  virtual double time(std::size_t n) const = 0;
  virtual const SpectralField& observation(std::size_t n) = 0;
  virtual double kappa() const = 0;
};

class StoredObservations : public ObservationSource {
 public:
  explicit StoredObservations(const ObservationStream& s) : s_(s) {}
  std::size_t size() const override { return s_.size(); }
  double time(std::size_t n) const override { return s_.times[n]; }
  const SpectralField& observation(std::size_t n) override { return s_.fields[n]; }
  double kappa() const override { return s_.kappa; }

 private:
  const ObservationStream& s_;
};

struct AssimilationOptions {
  /// Invoke on_observation (and store) at every k-th observation time.
  std::size_t record_every = 1;
  /// Also record the final state at t_end.
  bool record_end = true;
  /// Keep recorded states in the returned Trajectory.
  bool store = false;
  std::function<void(std::size_t n, double t, const SpectralField& v)> on_observation;
};

/// Discrete-in-time nudging: on [t_n, t_{n+1}) integrates the NSE with the
/// constant forcing g - beta P_sigma(I_h v(t_n) - u~(t_n)), continuing the
/// same integrator across intervals. Starts at the first observation time.
Trajectory assimilate(const SpectralField& v0, ObservationSource& obs, const SpectralField& g,
                      const NudgingParams& params, const SolverConfig& cfg, double t_end,
                      const AssimilationOptions& options = {});

struct DiagnosticRecord {
  double t = 0.0;
  double w_l2 = 0.0, w_h1 = 0.0;
  double v_l2 = 0.0, v_h1 = 0.0;
  bool observation_time = false;
};

struct DiagnosticSeries {
  std::vector<DiagnosticRecord> records;

  void add(double t, const SpectralField& u, const SpectralField& v, bool observation_time);
  /// |w|_L2 (or ||w||_H1) at observation times.
  std::vector<double> observation_series(bool h1 = false) const;
  /// CSV: t, w_l2, w_h1, v_l2, v_h1, is_observation_time.
  void write_csv(const std::string& path) const;
};

/// w = v - u at the common sample times (which must match exactly).
DiagnosticSeries error_series(const Trajectory& u, const Trajectory& v, const std::vector<double>& observation_times = {});

struct ContractionFit {
  double theta = std::numeric_limits<double>::quiet_NaN();
  double plateau = 0.0;
  bool converged = false;
  std::size_t used = 0;
};

/// Fits w_{n+1} = theta w_n + b, as w_{n+1}/w_n = theta + b / w_n so every
/// step weighs the same regardless of magnitude; plateau = b / (1 - theta).
ContractionFit fit_contraction(const std::vector<double>& w);

/// Length of the leading part of w that keeps contracting: stops at the
/// first n >= skip with w_{n+1} >= w_n (round-off floor or noise plateau).
std::size_t contracting_prefix(const std::vector<double>& w, std::size_t skip = 3);

}  // namespace ndg
