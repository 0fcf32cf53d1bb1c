#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndg/nudging.hpp"
#include "ndg/observers.hpp"
#include "ndg/solver.hpp"
#include "ndg/statistics.hpp"

namespace ndg {

struct ForcingConfig {
  double grashof = 50.0;
  double kmin = 2.0, kmax = 4.0;
  std::uint64_t seed = 1;
};

struct SpinUpConfig {
  double duration = 20.0;
  std::uint64_t seed = 3;
};

struct ObservationConfig {
  ObserverSpec op{ObserverKind::fourier, 0, 42, 0, 0.8};
  double kappa = 0.01 / 420.0;
  double epsilon = 0.0;
  std::uint64_t seed = 11;
};

struct RunConfig {
  double length = 1.5;
  /// Diagnostics stride in time units (rounded to whole observations).
  double record_every = 0.02;
  std::uint64_t v0_seed = 5;
  /// "L2" (|v0| = fraction * M0), "H1" (||v0|| = fraction * M1) or "auto"
  /// (L2 for fourier, H1 for volume averages); "reference" starts from u(t0).
  std::string v0_ball = "auto";
  double v0_fraction = 1.0;
  /// Snapshots of u and v kept for the empirical Lipschitz constants.
  std::size_t lipschitz_samples = 24;
};

struct StatsConfig {
  std::string observable = "energy";
  /// Window [window_start, window_start + T] for each ladder entry; the
  /// headline report uses the last one (or the whole run when empty).
  double window_start = 0.0;
  std::vector<double> ladder;
};

struct SweepConfig {
  std::string axis;
  std::vector<double> values;
};

/// Everything needed to reproduce a run. Derived quantities (lambda1, G,
/// band limits) are recomputed, never read.
struct ExperimentConfig {
  GridSpec grid{128, 6.283185307179586, 2.0 / 3.0};
  double nu = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::imex_cnab2;
  double cfl = 0.5;
  ForcingConfig forcing;
  SpinUpConfig spinup;
  ObservationConfig observation;
  double beta = 420.0;
  double safety_c = 1.0;
  RunConfig run;
  StatsConfig stats;
  SweepConfig sweep;

  SolverConfig solver() const;
  NudgingParams nudging() const;
  /// Throws InputError on any invalid or inconsistent field.
  void validate() const;
  /// Reseeds spin-up, observation noise and v0 from one master seed.
  void reseed(std::uint64_t master);
  /// Sets one sweep axis (beta, kappa, epsilon, m_or_h).
  void set_axis(const std::string& axis, double value);
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Unknown keys are rejected; absent keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Spin-up output: forcing, end state on the attractor and its bounds.
struct Reference {
  SpectralField forcing;
  SpectralField state;
  double m0_emp = 0.0, m1_emp = 0.0;
  double grashof = 0.0;
};

Reference make_reference(const ExperimentConfig& c);
/// reference.ndg2 plus bounds.json in dir.
void write_reference(const std::string& dir, const ExperimentConfig& c, const Reference& r);
/// Rebuilds the forcing from c; throws InputError if dir does not match c.
Reference read_reference(const std::string& dir, const ExperimentConfig& c);

/// Live observations of a reference trajectory advanced alongside the
/// assimilation run, on the grid t_n = t0 + n kappa.
class TwinSource : public ObservationSource {
 public:
  TwinSource(const SolverConfig& cfg, const SpectralField& u0, const SpectralField& forcing,
             const ObservationOperator& op, const NoiseModel& noise, double kappa, double length, double t0 = 0.0);

  std::size_t size() const override { return count_; }
  double time(std::size_t n) const override { return t0_ + double(n) * kappa_; }
  const SpectralField& observation(std::size_t n) override;
  double kappa() const override { return kappa_; }

  /// Reference state at t (advancing it if needed).
  const SpectralField& reference_at(double t);
  double e0_measured() const { return e0_; }
  double e1_measured() const { return e1_; }

 private:
  Stepper ref_;
  const SpectralField& forcing_;
  const ObservationOperator& op_;
  NoiseModel noise_;
  double kappa_, t0_;
  std::size_t count_;
  SpectralField buf_;
  double e0_ = 0.0, e1_ = 0.0;
};

struct InvariantStats {
  std::size_t checked = 0;
  std::size_t failures = 0;
  /// Relative divergence and Hermitian residuals.
  double worst_divergence = 0.0;
  double worst_hermitian = 0.0;

  void check(const SpectralField& u);
  bool ok() const { return failures == 0; }
};

struct TwinResult {
  DiagnosticSeries diagnostics;
  std::map<std::string, ScalarSeries> observables_u, observables_v;
  std::vector<Observable> observables;
  /// Observations between records.
  std::size_t record_stride = 1;
  std::size_t observations = 0;
  bool error_in_h1 = false;
  double initial_error = 0.0;
  /// Largest error over the final quarter of the records.
  double plateau_emp = 0.0;
  /// log10 of initial over smallest recorded error.
  double decades = 0.0;
  /// Fit on the contracting prefix of the record series.
  ContractionFit fit;
  std::size_t fit_prefix = 0;
  /// Per-observation contraction factor theta^(1 / record_stride).
  double theta_per_observation = 0.0;
  double e0_measured = 0.0, e1_measured = 0.0;
  ConditionReport conditions;
  AverageReport stats;
  LadderTrend ladder;
  InvariantStats invariants;
  bool diverged = false;
  std::string divergence;
  double seconds = 0.0;
};

struct TwinOptions {
  /// Report conditions with the general (volume) checker needs c0.
  std::size_t c0_corpus = 16;
  /// Check divergence/Hermitian invariants at every record.
  bool check_invariants = true;
};

TwinResult run_twin(const ExperimentConfig& c, const Reference& ref, const TwinOptions& opt = {});

nlohmann::json to_json(const ConditionReport& r);
nlohmann::json summary_json(const TwinResult& r);

/// Process exit codes.
namespace exit_code {
inline constexpr int ok = 0, diverged = 2, invariant = 3, config = 4;
}

/// Command entry points; progress and summaries go to log when given.
int cmd_spinup(const ExperimentConfig& c, const std::string& out, std::ostream* log = nullptr);
int cmd_twin(const ExperimentConfig& c, const std::string& out, const std::string& reference_dir,
             std::ostream* log = nullptr);
int cmd_sweep(const ExperimentConfig& c, const std::string& out, const std::string& reference_dir, unsigned threads,
              std::ostream* log = nullptr);
int cmd_verify_observers(const ExperimentConfig& c, const std::string& out, std::ostream* log = nullptr);
int cmd_stats(const ExperimentConfig& c, const std::string& twin_dir, const std::string& out,
              std::ostream* log = nullptr);

}  // namespace ndg
