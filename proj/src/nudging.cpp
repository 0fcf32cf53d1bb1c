#include "ndg/nudging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ndg/errors.hpp"
#include "ndg/kernels.hpp"
#include "ndg/spectral_ops.hpp"

namespace ndg {

void ConditionReport::add(std::string name, double lhs, double rhs, bool ok) {
  items.push_back({std::move(name), lhs, rhs, ok});
  overall = overall && ok;
}

const Condition* ConditionReport::find(const std::string& name) const {
  for (const auto& c : items)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("conditions: ") + what + " must be positive");
}

void kappa_condition(ConditionReport& r, const NudgingParams& p, const std::vector<double>& entries) {
  r.kappa_entries = entries;
  const double m = *std::min_element(entries.begin(), entries.end());
  r.kappa_max = p.safety_c / p.beta * m;
  r.add("kappa_small", p.kappa, r.kappa_max, p.kappa <= r.kappa_max);
  r.beta_kappa = p.beta * p.kappa;
  r.beta_kappa_ok = r.beta_kappa <= 0.5;
}

}  // namespace

ConditionReport check_conditions_fourier(const NudgingParams& p, double nu, double lambda1, double lambda_m1) {
  require_positive(p.beta, "beta");
  require_positive(p.kappa, "kappa");
  require_positive(nu, "nu");
  require_positive(lambda1, "lambda1");
  require_positive(lambda_m1, "lambda_{m+1}");
  require_positive(p.safety_c, "safety_c");
  const auto& b = p.bounds;
  require_positive(b.M0, "M0");
  require_positive(b.M1, "M1");
  ConditionReport r;
  const double beta = p.beta;
  r.add("beta_large", beta, p.safety_c * b.M1 * b.M1 / nu, beta >= p.safety_c * b.M1 * b.M1 / nu);
  r.add("modes_large", lambda_m1, 6.0 * beta / nu, lambda_m1 >= 6.0 * beta / nu);
  const double me = b.M0 + b.E0, nl = nu * lambda1;
  kappa_condition(r, p,
                  {1.0, nu / me, nu * nu / (me * me), std::pow(nu, 1.5) * std::sqrt(beta) / (b.M0 * b.M1),
                   nu * nu * std::sqrt(lambda1) / (b.M0 * b.M1), std::cbrt(nl / beta), std::sqrt(nl / beta),
                   (nl / beta) * (nl / beta)});
  return r;
}

ConditionReport check_conditions_general(const NudgingParams& p, double nu, double lambda1, double c0_emp, double h) {
  require_positive(p.beta, "beta");
  require_positive(p.kappa, "kappa");
  require_positive(nu, "nu");
  require_positive(lambda1, "lambda1");
  require_positive(c0_emp, "c0");
  require_positive(h, "h");
  require_positive(p.safety_c, "safety_c");
  const auto& b = p.bounds;
  require_positive(b.M0, "M0");
  require_positive(b.M1, "M1");
  ConditionReport r;
  const double beta = p.beta, me = b.M1 + b.E1, nl = nu * lambda1;
  const double beta_min = p.safety_c * me * me / nu * (1.0 + std::log(me / (nu * std::sqrt(lambda1))));
  r.add("beta_large", beta, beta_min, beta >= beta_min);
  kappa_condition(r, p,
                  {1.0, std::pow(nu, 1.5) * std::sqrt(beta) / (b.M0 * b.M1),
                   nu * nu * std::sqrt(lambda1) / (b.M0 * b.M1), nu * nu * lambda1 / (me * me), std::sqrt(nl / beta),
                   (nl / beta) * (nl / beta)});
  const double h_max = std::sqrt(nu / beta) / (2.0 * c0_emp);
  r.add("h_small", h, h_max, h <= h_max);
  return r;
}

Trajectory assimilate(const SpectralField& v0, ObservationSource& obs, const SpectralField& g,
                      const NudgingParams& params, const SolverConfig& cfg, double t_end,
                      const AssimilationOptions& options) {
  if (obs.size() == 0) throw InputError("assimilate: empty observation stream");
  const GridPtr grid = Grid::get(cfg.grid);
  if (!g.same_grid(v0) || !(v0.grid()->spec() == cfg.grid)) throw GridMismatch("assimilate: fields not on cfg.grid");
  const ObservationOperator op(grid, params.op);
  const double t0 = obs.time(0);
  if (!(t_end > t0)) throw InputError("assimilate: t_end must exceed the first observation time");
  const double kappa = obs.kappa();
  const std::size_t every = std::max<std::size_t>(1, options.record_every);
  const bool feedback = params.beta != 0.0;
  const auto& k = kernels::active();
  const auto rows = grid->band_spans();

  Stepper stepper(cfg, v0, t0);
  SpectralField forcing = g;
  Trajectory traj;
  double last_recorded = -std::numeric_limits<double>::infinity();
  auto record = [&](std::size_t n, double t) {
    if (options.on_observation) options.on_observation(n, t, stepper.state());
    if (options.store) traj.append(t, stepper.state());
    last_recorded = t;
  };

  std::size_t n = 0;
  for (;; ++n) {
    const double tn = obs.time(n);
    if (tn >= t_end) break;
    const double next = n + 1 < obs.size() ? std::min(obs.time(n + 1), t_end) : t_end;
    if (next - tn > kappa + 1e-12 * (kappa + std::abs(next)))
      throw InputError("assimilate: observation gap " + std::to_string(next - tn) + " exceeds kappa at t = " +
                       std::to_string(tn));
    const SpectralField& u_obs = obs.observation(n);
    if (n % every == 0) record(n, tn);
    if (feedback) {
      const SpectralField& v = stepper.state();
      if (op.kind() == ObserverKind::fourier) {
        for (int c = 0; c < 2; ++c)
          for (const auto& [lo, hi] : rows)
            k.residual(forcing.raw(c) + 2 * lo, g.raw(c) + 2 * lo, v.raw(c) + 2 * lo, u_obs.raw(c) + 2 * lo,
                       op.mask().data() + 2 * lo, -params.beta, 2 * (hi - lo));
      } else {
        SpectralField d = op.apply(v);
        project_leray_inplace(d);
        d -= u_obs;
        truncate_to_band(d);
        forcing = g;
        forcing.axpy(-params.beta, d);
      }
    }
    stepper.advance_to(next, feedback ? forcing : g);
    if (n + 1 >= obs.size() || next >= t_end) {
      ++n;
      break;
    }
  }
  if (options.record_end && last_recorded != stepper.time()) record(n, stepper.time());
  return traj;
}

void DiagnosticSeries::add(double t, const SpectralField& u, const SpectralField& v, bool observation_time) {
  const auto nv = norms(v);
  records.push_back({t, l2_distance(v, u), h1_distance(v, u), nv.l2, nv.h1, observation_time});
}

std::vector<double> DiagnosticSeries::observation_series(bool h1) const {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.observation_time) out.push_back(h1 ? r.w_h1 : r.w_l2);
  return out;
}

void DiagnosticSeries::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path);
  os.precision(17);
  os << "t,w_l2,w_h1,v_l2,v_h1,is_observation_time\n";
  for (const auto& r : records)
    os << r.t << ',' << r.w_l2 << ',' << r.w_h1 << ',' << r.v_l2 << ',' << r.v_h1 << ',' << (r.observation_time ? 1 : 0)
       << '\n';
}

DiagnosticSeries error_series(const Trajectory& u, const Trajectory& v, const std::vector<double>& observation_times) {
  DiagnosticSeries s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = v.times[i];
    const SpectralField* ut = u.find(t);
    if (!ut) throw InputError("error_series: time " + std::to_string(t) + " missing from the reference");
    const bool is_obs = std::binary_search(observation_times.begin(), observation_times.end(), t);
    s.add(t, *ut, v.fields[i], is_obs);
  }
  return s;
}

ContractionFit fit_contraction(const std::vector<double>& w) {
  if (w.size() < 10) throw InputError("fit_contraction: need at least 10 values");
  ContractionFit f;
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
    f.converged = true;
    return f;
  }
  std::vector<double> x, r;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    x.push_back(1.0 / w[i]);
    r.push_back(w[i + 1] / w[i]);
  }
  f.used = x.size();
  if (x.size() < 2) {
    f.theta = r.empty() ? 0.0 : r.front();
    f.converged = true;
    return f;
  }
  const double m = double(x.size());
  double mx = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / m;
    mr += r[i] / m;
  }
  double sxx = 0.0, sxr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxr += (x[i] - mx) * (r[i] - mr);
  }
  const double slope = sxx > 1e-300 * mx * mx ? sxr / sxx : 0.0;
  f.theta = mr - slope * mx;
  const double b = slope;
  f.plateau = f.theta < 1.0 ? std::max(0.0, b / (1.0 - f.theta)) : std::numeric_limits<double>::infinity();
  f.converged = f.theta < 1.0;
  return f;
}

std::size_t contracting_prefix(const std::vector<double>& w, std::size_t skip) {
  for (std::size_t n = skip; n + 1 < w.size(); ++n)
    if (w[n + 1] >= w[n]) return n + 1;
  return w.size();
}

}  // namespace ndg
