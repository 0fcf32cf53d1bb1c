#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ndg/solver.hpp"

namespace ndg {

struct Observable {
  std::string name;
  std::function<double(const SpectralField&)> eval;
  /// Largest |phi(u) - phi(v)| / |u - v|_L2 seen over sampled pairs.
  double lipschitz_emp = std::numeric_limits<double>::quiet_NaN();
};

/// energy, enstrophy, dissipation and |u^(k)| for each listed wavevector.
std::vector<Observable> builtin_observables(double nu, const std::vector<std::pair<int, int>>& modes = {{1, 0}, {0, 1}});
const Observable& find_observable(const std::vector<Observable>& list, const std::string& name);

/// Sup over all sample pairs; also stored into phi.lipschitz_emp.
double estimate_lipschitz(Observable& phi, const std::vector<SpectralField>& samples);

/// Values sampled at increasing times.
struct ScalarSeries {
  std::vector<double> t;
  std::vector<double> y;

  void add(double time, double value);
};

ScalarSeries evaluate(const Trajectory& traj, const Observable& phi);

/// Trapezoidal mean over [t0, t1]; endpoints between samples are linearly
/// interpolated.
double time_average(const ScalarSeries& s, double t0, double t1);
double time_average(const Trajectory& traj, const Observable& phi, double t0, double t1);

struct AverageReport {
  std::string observable;
  double t0 = 0.0, t1 = 0.0;
  double mean_u = 0.0, mean_v = 0.0;
  double diff = 0.0;
  /// safety_c * L * E1 / lambda1^1/2
  double bound = 0.0;
  double lipschitz_emp = 0.0;
  double E1 = 0.0;
  bool within = true;
};

AverageReport compare_averages(const ScalarSeries& u, const ScalarSeries& v, const Observable& phi, double t0, double t1,
                               double E1, double lambda1, double safety_c);
AverageReport compare_averages(const Trajectory& u, const Trajectory& v, const Observable& phi, double t0, double t1,
                               double E1, double lambda1, double safety_c);

/// Differences over growing windows [t0, t0 + T_i].
struct LadderTrend {
  std::vector<double> T;
  std::vector<double> diff;
  /// Each diff at most 1.1 times its predecessor.
  bool decreasing = true;
};

LadderTrend ladder_trend(const ScalarSeries& u, const ScalarSeries& v, double t0, const std::vector<double>& T);

/// Least-squares slope of log y against log x.
double power_law_exponent(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json to_json(const AverageReport& r, const LadderTrend* trend = nullptr);

}  // namespace ndg
