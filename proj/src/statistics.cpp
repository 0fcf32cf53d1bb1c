#include "ndg/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "ndg/errors.hpp"
#include "ndg/spectral_ops.hpp"

namespace ndg {

std::vector<Observable> builtin_observables(double nu, const std::vector<std::pair<int, int>>& modes) {
  std::vector<Observable> out;
  out.push_back({"energy", [](const SpectralField& u) {
                   const double a = l2_norm(u);
                   return 0.5 * a * a;
                 }});
  out.push_back({"enstrophy", [](const SpectralField& u) {
                   const double a = h1_norm(u);
                   return 0.5 * a * a;
                 }});
  out.push_back({"dissipation", [nu](const SpectralField& u) {
                   const double a = h1_norm(u);
                   return nu * a * a;
                 }});
  for (const auto& [k1, k2] : modes) {
    out.push_back({"mode_" + std::to_string(k1) + "_" + std::to_string(k2), [k1, k2](const SpectralField& u) {
                     const auto [a1, a2] = u.mode(k1, k2);
                     return std::sqrt(std::norm(a1) + std::norm(a2));
                   }});
  }
  return out;
}

const Observable& find_observable(const std::vector<Observable>& list, const std::string& name) {
  for (const auto& o : list)
    if (o.name == name) return o;
  throw InputError("unknown observable '" + name + "'");
}

double estimate_lipschitz(Observable& phi, const std::vector<SpectralField>& samples) {
  std::vector<double> vals;
  vals.reserve(samples.size());
  for (const auto& s : samples) vals.push_back(phi.eval(s));
  double l = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double d = l2_distance(samples[i], samples[j]);
      if (d > 0.0) l = std::max(l, std::abs(vals[i] - vals[j]) / d);
    }
  phi.lipschitz_emp = l;
  return l;
}

void ScalarSeries::add(double time, double value) {
  if (!t.empty() && !(time > t.back())) throw InputError("series times must increase");
  t.push_back(time);
  y.push_back(value);
}

ScalarSeries evaluate(const Trajectory& traj, const Observable& phi) {
  ScalarSeries s;
  for (std::size_t i = 0; i < traj.size(); ++i) s.add(traj.times[i], phi.eval(traj.fields[i]));
  return s;
}

double time_average(const ScalarSeries& s, double t0, double t1) {
  if (!(t1 > t0)) throw InputError("time_average: empty window");
  if (s.t.size() < 2) throw InputError("time_average: need at least two samples");
  const double slack = 1e-9 * std::max(1.0, std::abs(s.t.back()));
  if (t0 < s.t.front() - slack || t1 > s.t.back() + slack)
    throw InputError("time_average: window [" + std::to_string(t0) + ", " + std::to_string(t1) +
                     "] outside the sampled span");
  t0 = std::max(t0, s.t.front());
  t1 = std::min(t1, s.t.back());
  auto at = [&](double t) {
    const auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
    const std::size_t j = std::min<std::size_t>(std::size_t(it - s.t.begin()), s.t.size() - 1);
    const std::size_t i = j - 1;
    const double f = (t - s.t[i]) / (s.t[j] - s.t[i]);
    return s.y[i] + f * (s.y[j] - s.y[i]);
  };
  double acc = 0.0, prev_t = t0, prev_y = at(t0);
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (s.t[i] <= t0) continue;
    if (s.t[i] >= t1) break;
    acc += 0.5 * (s.t[i] - prev_t) * (s.y[i] + prev_y);
    prev_t = s.t[i];
    prev_y = s.y[i];
  }
  acc += 0.5 * (t1 - prev_t) * (at(t1) + prev_y);
  return acc / (t1 - t0);
}

double time_average(const Trajectory& traj, const Observable& phi, double t0, double t1) {
  return time_average(evaluate(traj, phi), t0, t1);
}

AverageReport compare_averages(const ScalarSeries& u, const ScalarSeries& v, const Observable& phi, double t0, double t1,
                               double E1, double lambda1, double safety_c) {
  auto covers = [&](const ScalarSeries& s) {
    const double slack = 1e-9 * std::max(1.0, std::abs(t1));
    return s.t.size() >= 2 && t0 >= s.t.front() - slack && t1 <= s.t.back() + slack;
  };
  if (!covers(u) || !covers(v)) throw InputError("compare_averages: window mismatch");
  AverageReport r;
  r.observable = phi.name;
  r.t0 = t0;
  r.t1 = t1;
  r.mean_u = time_average(u, t0, t1);
  r.mean_v = time_average(v, t0, t1);
  r.diff = std::abs(r.mean_v - r.mean_u);
  r.lipschitz_emp = std::isfinite(phi.lipschitz_emp) ? phi.lipschitz_emp : 0.0;
  r.E1 = E1;
  r.bound = safety_c * r.lipschitz_emp * E1 / std::sqrt(lambda1);
  r.within = r.diff <= r.bound;
  return r;
}

AverageReport compare_averages(const Trajectory& u, const Trajectory& v, const Observable& phi, double t0, double t1,
                               double E1, double lambda1, double safety_c) {
  return compare_averages(evaluate(u, phi), evaluate(v, phi), phi, t0, t1, E1, lambda1, safety_c);
}

LadderTrend ladder_trend(const ScalarSeries& u, const ScalarSeries& v, double t0, const std::vector<double>& T) {
  LadderTrend tr;
  for (double len : T) {
    const double d = std::abs(time_average(v, t0, t0 + len) - time_average(u, t0, t0 + len));
    if (!tr.diff.empty() && d > 1.1 * tr.diff.back()) tr.decreasing = false;
    tr.T.push_back(len);
    tr.diff.push_back(d);
  }
  return tr;
}

double power_law_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("power_law_exponent: need two or more matching points");
  double mx = 0.0, my = 0.0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("power_law_exponent: values must be positive");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw InputError("power_law_exponent: x values coincide");
  return sxy / sxx;
}

nlohmann::json to_json(const AverageReport& r, const LadderTrend* trend) {
  nlohmann::json j{{"observable", r.observable},
                   {"window", {r.t0, r.t1}},
                   {"mean_u", r.mean_u},
                   {"mean_v", r.mean_v},
                   {"diff", r.diff},
                   {"bound", r.bound},
                   {"lipschitz_emp", r.lipschitz_emp},
                   {"E1", r.E1},
                   {"within_bound", r.within}};
  if (trend) j["T_ladder"] = {{"T", trend->T}, {"diff", trend->diff}, {"decreasing", trend->decreasing}};
  return j;
}

}  // namespace ndg
