#include "ndg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "ndg/errors.hpp"
#include "ndg/rng.hpp"
#include "ndg/snapshot.hpp"
#include "ndg/spectral_ops.hpp"

namespace ndg {

namespace fs = std::filesystem;
using nlohmann::json;

SolverConfig ExperimentConfig::solver() const {
  SolverConfig s;
  s.nu = nu;
  s.dt = dt;
  s.scheme = scheme;
  s.grid = grid;
  s.cfl = cfl;
  return s;
}

NudgingParams ExperimentConfig::nudging() const {
  NudgingParams p;
  p.beta = beta;
  p.kappa = observation.kappa;
  p.op = observation.op;
  p.epsilon = observation.epsilon;
  p.safety_c = safety_c;
  return p;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError("config: " + what);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

const std::set<std::string> kAxes{"beta", "kappa", "epsilon", "m_or_h"};

}  // namespace

void ExperimentConfig::validate() const {
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  solver().validate();
  require(positive(nu), "nu must be positive");
  require(forcing.grashof >= 0.0 && std::isfinite(forcing.grashof), "forcing.grashof must be >= 0");
  require(positive(forcing.kmin) && forcing.kmax >= forcing.kmin, "forcing band must satisfy 0 < kmin <= kmax");
  const auto g = Grid::get(grid);
  require(forcing.kmax <= g->band_limit(), "forcing.kmax exceeds the dealiased band " + std::to_string(g->band_limit()));
  require(positive(spinup.duration), "spinup.duration must be positive");
  require(positive(observation.kappa), "observation.kappa must be positive");
  require(observation.epsilon >= 0.0 && std::isfinite(observation.epsilon), "observation.epsilon must be >= 0");
  ObservationOperator op(g, observation.op);
  require(beta >= 0.0 && std::isfinite(beta), "nudging.beta must be >= 0");
  require(positive(safety_c), "nudging.safety_c must be positive");
  require(positive(run.length), "run.length must be positive");
  require(positive(run.record_every), "run.record_every must be positive");
  require(run.v0_ball == "auto" || run.v0_ball == "L2" || run.v0_ball == "H1" || run.v0_ball == "reference",
          "run.v0_ball must be auto, L2, H1 or reference");
  require(positive(run.v0_fraction), "run.v0_fraction must be positive");
  require(stats.window_start >= 0.0, "statistics.window_start must be >= 0");
  for (double T : stats.ladder) require(positive(T), "statistics.ladder entries must be positive");
  if (!stats.ladder.empty())
    require(stats.window_start + stats.ladder.back() <= run.length * (1.0 + 1e-12),
            "statistics.ladder exceeds run.length");
  require(std::is_sorted(stats.ladder.begin(), stats.ladder.end()), "statistics.ladder must increase");
  builtin_observables(nu);
  find_observable(builtin_observables(nu), stats.observable);
  if (!sweep.axis.empty()) require(kAxes.count(sweep.axis) == 1, "sweep.axis must be beta, kappa, epsilon or m_or_h");
}

void ExperimentConfig::reseed(std::uint64_t master) {
  spinup.seed = rng::derive(master, "spinup");
  observation.seed = rng::derive(master, "noise");
  run.v0_seed = rng::derive(master, "v0");
}

void ExperimentConfig::set_axis(const std::string& axis, double value) {
  if (axis == "beta") {
    beta = value;
  } else if (axis == "kappa") {
    observation.kappa = value;
  } else if (axis == "epsilon") {
    observation.epsilon = value;
  } else if (axis == "m_or_h") {
    if (observation.op.kind == ObserverKind::fourier) {
      observation.op.max_ksq = int(std::lround(value));
    } else {
      observation.op.cells = int(std::lround(value));
    }
  } else {
    throw InputError("config: unknown sweep axis '" + axis + "'");
  }
}

json to_json(const ExperimentConfig& c) {
  json op{{"kind", observer_kind_name(c.observation.op.kind)}};
  if (c.observation.op.kind == ObserverKind::fourier) {
    if (c.observation.op.max_ksq >= 0) {
      op["max_ksq"] = c.observation.op.max_ksq;
    } else {
      op["modes"] = c.observation.op.modes;
    }
  } else {
    op["cells_per_axis"] = c.observation.op.cells;
    op["mollify_width"] = c.observation.op.mollify_width;
  }
  op["kappa"] = c.observation.kappa;
  op["epsilon"] = c.observation.epsilon;
  op["seed"] = c.observation.seed;
  json j{{"grid", {{"n", c.grid.n}, {"L", c.grid.length}, {"dealias", c.grid.dealias_fraction}}},
         {"nu", c.nu},
         {"time", {{"dt", c.dt}, {"scheme", scheme_name(c.scheme)}, {"cfl", c.cfl}}},
         {"forcing",
          {{"grashof", c.forcing.grashof}, {"kmin", c.forcing.kmin}, {"kmax", c.forcing.kmax}, {"seed", c.forcing.seed}}},
         {"spinup", {{"duration", c.spinup.duration}, {"seed", c.spinup.seed}}},
         {"observation", op},
         {"nudging", {{"beta", c.beta}, {"safety_c", c.safety_c}}},
         {"run",
          {{"length", c.run.length},
           {"record_every", c.run.record_every},
           {"v0_seed", c.run.v0_seed},
           {"v0_ball", c.run.v0_ball},
           {"v0_fraction", c.run.v0_fraction},
           {"lipschitz_samples", c.run.lipschitz_samples}}},
         {"statistics",
          {{"observable", c.stats.observable}, {"window_start", c.stats.window_start}, {"ladder", c.stats.ladder}}}};
  if (!c.sweep.axis.empty()) j["sweep"] = {{"axis", c.sweep.axis}, {"values", c.sweep.values}};
  return j;
}

namespace {

/// Reads the keys of one JSON object, rejecting any it was not asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError("config: '" + path_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InputError("config: '" + path_ + key + "' has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  Section sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, path_ + key + ".");
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw InputError("config: unknown key '" + path_ + k + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Section root(j, "");
  {
    auto s = root.sub("grid");
    s.get("n", c.grid.n);
    s.get("L", c.grid.length);
    s.get("dealias", c.grid.dealias_fraction);
    s.finish();
  }
  root.get("nu", c.nu);
  {
    auto s = root.sub("time");
    s.get("dt", c.dt);
    std::string scheme = scheme_name(c.scheme);
    s.get("scheme", scheme);
    try {
      c.scheme = parse_scheme(scheme);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("config: ") + e.what());
    }
    s.get("cfl", c.cfl);
    s.finish();
  }
  {
    auto s = root.sub("forcing");
    s.get("grashof", c.forcing.grashof);
    s.get("kmin", c.forcing.kmin);
    s.get("kmax", c.forcing.kmax);
    s.get("seed", c.forcing.seed);
    s.finish();
  }
  {
    auto s = root.sub("spinup");
    s.get("duration", c.spinup.duration);
    s.get("seed", c.spinup.seed);
    s.finish();
  }
  {
    auto s = root.sub("observation");
    std::string kind = observer_kind_name(c.observation.op.kind);
    s.get("kind", kind);
    try {
      c.observation.op.kind = parse_observer_kind(kind);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("config: ") + e.what());
    }
    if (s.has("modes")) c.observation.op.max_ksq = -1;
    s.get("modes", c.observation.op.modes);
    s.get("max_ksq", c.observation.op.max_ksq);
    s.get("cells_per_axis", c.observation.op.cells);
    s.get("mollify_width", c.observation.op.mollify_width);
    s.get("kappa", c.observation.kappa);
    s.get("epsilon", c.observation.epsilon);
    s.get("seed", c.observation.seed);
    s.finish();
  }
  {
    auto s = root.sub("nudging");
    s.get("beta", c.beta);
    s.get("safety_c", c.safety_c);
    s.finish();
  }
  {
    auto s = root.sub("run");
    s.get("length", c.run.length);
    s.get("record_every", c.run.record_every);
    s.get("v0_seed", c.run.v0_seed);
    s.get("v0_ball", c.run.v0_ball);
    s.get("v0_fraction", c.run.v0_fraction);
    s.get("lipschitz_samples", c.run.lipschitz_samples);
    s.finish();
  }
  {
    auto s = root.sub("statistics");
    s.get("observable", c.stats.observable);
    s.get("window_start", c.stats.window_start);
    s.get("ladder", c.stats.ladder);
    s.finish();
  }
  {
    auto s = root.sub("sweep");
    s.get("axis", c.sweep.axis);
    s.get("values", c.sweep.values);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw InputError("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

Reference make_reference(const ExperimentConfig& c) {
  c.validate();
  const auto cfg = c.solver();
  const auto grid = Grid::get(c.grid);
  Reference r;
  r.forcing = make_forcing(grid, c.forcing.grashof, c.nu, c.forcing.kmin, c.forcing.kmax, c.forcing.seed);
  auto s = spin_up(r.forcing, cfg, c.spinup.duration, c.spinup.seed);
  r.state = std::move(s.state);
  r.m0_emp = s.m0_emp;
  r.m1_emp = s.m1_emp;
  r.grashof = grashof(r.forcing, c.nu, grid->lambda1());
  return r;
}

namespace {

json reference_key(const ExperimentConfig& c) {
  const json full = to_json(c);
  return {{"grid", full["grid"]}, {"nu", full["nu"]}, {"time", full["time"]}, {"forcing", full["forcing"]},
          {"spinup", full["spinup"]}};
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw InputError("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

}  // namespace

void write_reference(const std::string& dir, const ExperimentConfig& c, const Reference& r) {
  fs::create_directories(dir);
  write_snapshot((fs::path(dir) / "reference.ndg2").string(), r.state);
  const auto grid = Grid::get(c.grid);
  write_json(fs::path(dir) / "bounds.json", {{"format", "ndg-bounds"},
                                             {"version", 1},
                                             {"config", to_json(c)},
                                             {"reference", reference_key(c)},
                                             {"snapshot", "reference.ndg2"},
                                             {"M0_emp", r.m0_emp},
                                             {"M1_emp", r.m1_emp},
                                             {"grashof", r.grashof},
                                             {"lambda1", grid->lambda1()},
                                             {"nu_G", c.nu * r.grashof},
                                             {"band_limit", grid->band_limit()}});
}

Reference read_reference(const std::string& dir, const ExperimentConfig& c) {
  std::ifstream is(fs::path(dir) / "bounds.json");
  if (!is) throw InputError("no spin-up artifacts (bounds.json) in " + dir);
  json b;
  try {
    b = json::parse(is);
  } catch (const json::exception& e) {
    throw InputError("bounds.json: " + std::string(e.what()));
  }
  if (b.value("format", "") != "ndg-bounds") throw InputError("bounds.json: wrong format");
  if (b.at("reference") != reference_key(c))
    throw InputError("spin-up artifacts in " + dir + " were produced with different grid/forcing/spin-up settings");
  Reference r;
  r.state = read_snapshot((fs::path(dir) / b.at("snapshot").get<std::string>()).string(), c.grid.dealias_fraction);
  if (!(r.state.grid()->spec() == c.grid)) throw InputError("reference snapshot grid does not match the config");
  const auto grid = Grid::get(c.grid);
  r.forcing = make_forcing(grid, c.forcing.grashof, c.nu, c.forcing.kmin, c.forcing.kmax, c.forcing.seed);
  r.m0_emp = b.at("M0_emp").get<double>();
  r.m1_emp = b.at("M1_emp").get<double>();
  r.grashof = grashof(r.forcing, c.nu, grid->lambda1());
  return r;
}

TwinSource::TwinSource(const SolverConfig& cfg, const SpectralField& u0, const SpectralField& forcing,
                       const ObservationOperator& op, const NoiseModel& noise, double kappa, double length, double t0)
    : ref_(cfg, u0, t0),
      forcing_(forcing),
      op_(op),
      noise_(noise),
      kappa_(kappa),
      t0_(t0),
      count_(std::size_t(std::ceil(length / kappa - 1e-9)) + 1),
      buf_(op.grid()) {
  if (!(kappa > 0.0) || !(length > 0.0)) throw InputError("twin: kappa and length must be positive");
}

const SpectralField& TwinSource::reference_at(double t) {
  if (t > ref_.time()) ref_.advance_to(t, forcing_);
  return ref_.state();
}

const SpectralField& TwinSource::observation(std::size_t n) {
  const auto r = observe(op_, reference_at(time(n)), noise_, n, buf_);
  e0_ = std::max(e0_, r.l2);
  e1_ = std::max(e1_, r.h1);
  return buf_;
}

void InvariantStats::check(const SpectralField& u) {
  const auto n = norms(u);
  const double div = divergence_residual(u) / std::max(1.0, n.h1);
  const double herm = hermitian_residual(u) / std::max(1.0, n.l2);
  worst_divergence = std::max(worst_divergence, div);
  worst_hermitian = std::max(worst_hermitian, herm);
  ++checked;
  if (!(div <= 1e-10) || !(herm <= 1e-12)) ++failures;
}

TwinResult run_twin(const ExperimentConfig& c, const Reference& ref, const TwinOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  c.validate();
  const auto cfg = c.solver();
  const auto grid = Grid::get(c.grid);
  const ObservationOperator op(grid, c.observation.op);
  const bool volume = op.kind() == ObserverKind::volume_average;

  SpectralField v0 = random_field(grid, c.run.v0_seed, 1.0, std::min(8, grid->band_limit()));
  project_leray_inplace(v0);
  truncate_to_band(v0);
  const std::string ball = c.run.v0_ball == "auto" ? (volume ? "H1" : "L2") : c.run.v0_ball;
  const double radius = c.run.v0_fraction * (ball == "H1" ? ref.m1_emp : ref.m0_emp);
  const double len = ball == "H1" ? h1_norm(v0) : l2_norm(v0);
  v0 *= len > 0.0 ? radius / len : 0.0;
  if (ball == "reference") v0 = ref.state;

  const double kappa = c.observation.kappa;
  TwinSource src(cfg, ref.state, ref.forcing, op, NoiseModel{c.observation.epsilon, c.observation.seed}, kappa,
                 c.run.length);
  NudgingParams p = c.nudging();

  TwinResult r;
  r.error_in_h1 = volume;
  r.record_stride = std::max<std::size_t>(1, std::size_t(std::llround(c.run.record_every / kappa)));
  r.observables = builtin_observables(c.nu);
  const std::size_t records = src.size() / r.record_stride + 2;
  const std::size_t keep_every = std::max<std::size_t>(1, records / std::max<std::size_t>(1, c.run.lipschitz_samples));
  std::vector<SpectralField> samples;
  std::size_t record_index = 0;

  AssimilationOptions ao;
  ao.record_every = r.record_stride;
  ao.on_observation = [&](std::size_t n, double t, const SpectralField& v) {
    const SpectralField& u = src.reference_at(t);
    r.diagnostics.add(t, u, v, n % r.record_stride == 0 && n < src.size());
    for (const auto& o : r.observables) {
      r.observables_u[o.name].add(t, o.eval(u));
      r.observables_v[o.name].add(t, o.eval(v));
    }
    if (opt.check_invariants) {
      r.invariants.check(u);
      r.invariants.check(v);
    }
    if (record_index++ % keep_every == 0) {
      samples.push_back(u);
      samples.push_back(v);
    }
    const auto& rec = r.diagnostics.records.back();
    const double w = volume ? rec.w_h1 : rec.w_l2;
    if (r.diagnostics.records.size() == 1) r.initial_error = w;
    if (!std::isfinite(w) || w > 1e6 * std::max(1.0, r.initial_error))
      throw BlowUp("assimilation error diverged at t = " + std::to_string(t));
  };
  try {
    assimilate(v0, src, ref.forcing, p, cfg, c.run.length, ao);
  } catch (const BlowUp& e) {
    r.diverged = true;
    r.divergence = e.what();
  } catch (const CflViolation& e) {
    r.diverged = true;
    r.divergence = e.what();
  }
  r.observations = std::min(src.size(), std::size_t(std::ceil(c.run.length / kappa - 1e-9)) + 1);
  r.e0_measured = src.e0_measured();
  r.e1_measured = src.e1_measured();

  std::vector<double> w;
  for (const auto& rec : r.diagnostics.records) w.push_back(volume ? rec.w_h1 : rec.w_l2);
  if (!w.empty()) {
    const std::size_t q = w.size() - std::max<std::size_t>(1, w.size() / 4);
    r.plateau_emp = *std::max_element(w.begin() + std::ptrdiff_t(q), w.end());
    double floor = std::numeric_limits<double>::infinity();
    for (double x : w)
      if (x > 0.0) floor = std::min(floor, x);
    r.decades = std::isfinite(floor) && r.initial_error > 0.0 ? std::log10(r.initial_error / floor) : 0.0;
  }
  r.fit_prefix = contracting_prefix(w);
  if (r.fit_prefix >= 10) {
    r.fit = fit_contraction(std::vector<double>(w.begin(), w.begin() + std::ptrdiff_t(r.fit_prefix)));
  } else if (w.size() >= 10) {
    r.fit_prefix = w.size();
    r.fit = fit_contraction(w);
  }
  r.theta_per_observation = std::pow(r.fit.theta, 1.0 / double(r.record_stride));

  p.bounds = {ref.m0_emp, ref.m1_emp, r.e0_measured, r.e1_measured};
  if (p.beta > 0.0 && ref.m0_emp > 0.0 && ref.m1_emp > 0.0) {
    if (volume) {
      std::vector<SpectralField> corpus;
      for (std::size_t i = 0; i < opt.c0_corpus; ++i) {
        auto f = random_field(grid, rng::derive(c.run.v0_seed, "c0-corpus") + i, 1.0, grid->band_limit(), 2.0);
        corpus.push_back(project_leray(std::move(f)));
      }
      r.conditions = check_conditions_general(p, c.nu, grid->lambda1(), estimate_c0(op, corpus), op.h_eff());
    } else {
      const double lam = op.modes() < grid->pair_count() ? grid->pair_eigenvalue(op.modes())
                                                         : std::numeric_limits<double>::infinity();
      r.conditions = check_conditions_fourier(p, c.nu, grid->lambda1(), lam);
    }
  }

  Observable phi = find_observable(r.observables, c.stats.observable);
  if (samples.size() >= 2) estimate_lipschitz(phi, samples);
  const auto& su = r.observables_u[phi.name];
  const auto& sv = r.observables_v[phi.name];
  if (su.t.size() >= 2 && !r.diverged) {
    const double t0 = c.stats.window_start;
    const double t1 = c.stats.ladder.empty() ? su.t.back() : t0 + c.stats.ladder.back();
    if (t1 > t0 && t1 <= su.t.back() * (1.0 + 1e-12)) {
      r.stats = compare_averages(su, sv, phi, t0, std::min(t1, su.t.back()), r.e1_measured, grid->lambda1(),
                                 c.safety_c);
      if (!c.stats.ladder.empty()) r.ladder = ladder_trend(su, sv, t0, c.stats.ladder);
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

json to_json(const ConditionReport& r) {
  json items = json::array();
  for (const auto& c : r.items)
    items.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"satisfied", c.satisfied}});
  return {{"conditions", items},         {"overall", r.overall},       {"kappa_max", r.kappa_max},
          {"kappa_entries", r.kappa_entries}, {"beta_kappa", r.beta_kappa}, {"beta_kappa_ok", r.beta_kappa_ok}};
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json summary_json(const TwinResult& r) {
  return {{"error_norm", r.error_in_h1 ? "H1" : "L2"},
          {"observations", r.observations},
          {"record_stride", r.record_stride},
          {"records", r.diagnostics.records.size()},
          {"initial_error", r.initial_error},
          {"plateau_emp", r.plateau_emp},
          {"decades", r.decades},
          {"theta_emp", finite_or_null(r.fit.theta)},
          {"theta_per_observation", finite_or_null(r.theta_per_observation)},
          {"fit_plateau", finite_or_null(r.fit.plateau)},
          {"fit_points", r.fit.used},
          {"fit_prefix", r.fit_prefix},
          {"E0_measured", r.e0_measured},
          {"E1_measured", r.e1_measured},
          {"invariants",
           {{"checked", r.invariants.checked},
            {"failures", r.invariants.failures},
            {"worst_divergence", r.invariants.worst_divergence},
            {"worst_hermitian", r.invariants.worst_hermitian}}},
          {"diverged", r.diverged},
          {"divergence", r.divergence},
          {"seconds", r.seconds}};
}

}  // namespace ndg
