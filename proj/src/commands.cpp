#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ndg/errors.hpp"
#include "ndg/experiment.hpp"
#include "ndg/rng.hpp"
#include "ndg/spectral_ops.hpp"

namespace ndg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw InputError("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

void write_observables_csv(const fs::path& p, const TwinResult& r) {
  std::ofstream os(p);
  if (!os) throw InputError("cannot write " + p.string());
  os.precision(17);
  os << 't';
  for (const auto& o : r.observables) os << ",u_" << o.name << ",v_" << o.name;
  os << '\n';
  const auto& t = r.observables_u.at(r.observables.front().name).t;
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t[i];
    for (const auto& o : r.observables)
      os << ',' << r.observables_u.at(o.name).y[i] << ',' << r.observables_v.at(o.name).y[i];
    os << '\n';
  }
}

json stats_json(const TwinResult& r) {
  if (r.stats.observable.empty()) return json::object();
  return to_json(r.stats, r.ladder.T.empty() ? nullptr : &r.ladder);
}

int twin_exit(const TwinResult& r) {
  if (r.diverged) return exit_code::diverged;
  if (!r.invariants.ok()) return exit_code::invariant;
  return exit_code::ok;
}

void write_twin(const fs::path& dir, const ExperimentConfig& c, const TwinResult& r) {
  fs::create_directories(dir);
  r.diagnostics.write_csv((dir / "errors.csv").string());
  if (!r.observables_u.empty() && !r.observables_u.begin()->second.t.empty())
    write_observables_csv(dir / "observables.csv", r);
  write_json(dir / "conditions.json", to_json(r.conditions));
  write_json(dir / "stats.json", stats_json(r));
  write_json(dir / "summary.json", {{"format", "ndg-twin"},
                                    {"version", 1},
                                    {"config", to_json(c)},
                                    {"summary", summary_json(r)},
                                    {"conditions", to_json(r.conditions)},
                                    {"stats", stats_json(r)}});
}

}  // namespace

int cmd_spinup(const ExperimentConfig& c, const std::string& out, std::ostream* log) {
  const Reference r = make_reference(c);
  write_reference(out, c, r);
  if (log) *log << "spinup: G = " << r.grashof << "  M0_emp = " << r.m0_emp << "  M1_emp = " << r.m1_emp << '\n';
  return exit_code::ok;
}

int cmd_twin(const ExperimentConfig& c, const std::string& out, const std::string& reference_dir, std::ostream* log) {
  const Reference ref = read_reference(reference_dir, c);
  const TwinResult r = run_twin(c, ref);
  write_twin(out, c, r);
  if (log) *log << summary_json(r).dump(2) << '\n';
  return twin_exit(r);
}

int cmd_sweep(const ExperimentConfig& c, const std::string& out, const std::string& reference_dir, unsigned threads,
              std::ostream* log) {
  if (c.sweep.axis.empty() || c.sweep.values.empty()) throw InputError("sweep: config needs sweep.axis and sweep.values");
  std::vector<ExperimentConfig> runs;
  for (double v : c.sweep.values) {
    ExperimentConfig e = c;
    e.set_axis(c.sweep.axis, v);
    e.validate();
    runs.push_back(e);
  }
  const Reference ref = read_reference(reference_dir, c);
  std::vector<TwinResult> results(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < runs.size();) {
      results[i] = run_twin(runs[i], ref);
      std::ostringstream name;
      name << c.sweep.axis << '_' << i;
      write_twin(fs::path(out) / name.str(), runs[i], results[i]);
      std::lock_guard lock(io);
      if (log) *log << "sweep " << c.sweep.axis << " = " << c.sweep.values[i] << " done\n";
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, unsigned(runs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream os(fs::path(out) / "sweep.csv");
  if (!os) throw InputError("cannot write sweep.csv");
  os.precision(17);
  os << "value,theta_emp,plateau_emp,diverged,conditions_satisfied\n";
  bool invariant_ok = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = results[i];
    os << c.sweep.values[i] << ',' << r.fit.theta << ',' << r.plateau_emp << ',' << (r.diverged ? 1 : 0) << ','
       << (r.conditions.overall && !r.conditions.items.empty() ? 1 : 0) << '\n';
    invariant_ok = invariant_ok && r.invariants.ok();
  }
  write_json(fs::path(out) / "sweep.json", {{"format", "ndg-sweep"}, {"version", 1}, {"config", to_json(c)}});
  return invariant_ok ? exit_code::ok : exit_code::invariant;
}

int cmd_verify_observers(const ExperimentConfig& c, const std::string& out, std::ostream* log) {
  const auto grid = Grid::get(c.grid);
  const double eps = c.observation.epsilon > 0.0 ? c.observation.epsilon : 1e-3;
  const std::uint64_t seed = rng::derive(c.observation.seed, "verify");
  std::vector<SpectralField> corpus;
  for (std::size_t i = 0; i < 100; ++i)
    corpus.push_back(project_leray(random_field(grid, rng::derive(seed, "corpus") + i, 1.0, grid->band_limit(), 2.0)));

  json report{{"format", "ndg-verify"}, {"version", 1}, {"config", to_json(c)}, {"epsilon", eps}};
  bool pass = true;
  const double root_area = std::sqrt(grid->area());

  ObserverSpec fs_spec{ObserverKind::fourier, 0, 42, 0, 0.8};
  if (c.observation.op.kind == ObserverKind::fourier) fs_spec = c.observation.op;
  const ObservationOperator f(grid, fs_spec);
  const double fc0 = estimate_c0(f, corpus), fc1 = estimate_c1(f, corpus);
  const bool fourier_ok = fc0 <= 1.0 && fc1 <= 1.0 + 1e-12;
  report["fourier"] = {{"modes", f.modes()}, {"c0_emp", fc0}, {"c1_emp", fc1}, {"pass", fourier_ok}};
  pass = pass && fourier_ok;

  json cells = json::array();
  for (int m : {8, 16, 32}) {
    if (grid->n() % m != 0) continue;
    const auto op = ObservationOperator::volume_average(grid, m, c.observation.op.mollify_width);
    double pou = 0.0;
    std::vector<double> ones(std::size_t(m) * m, 1.0), sum(grid->physical_size());
    op.combine(ones, sum.data());
    for (double s : sum) pou = std::max(pou, std::abs(s - 1.0));
    const double c0 = estimate_c0(op, corpus), c1 = estimate_c1(op, corpus);
    const double h1_bound = op.gradient_constant() * std::sqrt(2.0 * op.overlap_bound()) * (eps / op.h_eff()) * root_area;
    std::size_t l2_viol = 0, h1_viol = 0;
    double l2_worst = 0.0, h1_worst = 0.0;
    for (std::uint64_t n = 0; n < 1000; ++n) {
      const auto r = norms(draw_noise({eps, seed}, n, op));
      l2_worst = std::max(l2_worst, r.l2 / (eps * root_area));
      h1_worst = std::max(h1_worst, r.h1 / h1_bound);
      l2_viol += r.l2 > eps * root_area;
      h1_viol += r.h1 > h1_bound;
    }
    const bool ok = pou <= 1e-12 && std::isfinite(c0) && l2_viol == 0 && h1_viol == 0;
    pass = pass && ok;
    cells.push_back({{"cells_per_axis", m},
                     {"h_eff", op.h_eff()},
                     {"partition_of_unity_error", pou},
                     {"c0_emp", c0},
                     {"c1_emp", c1},
                     {"gradient_constant", op.gradient_constant()},
                     {"noise_draws", 1000},
                     {"l2_worst_ratio", l2_worst},
                     {"l2_violations", l2_viol},
                     {"h1_worst_ratio", h1_worst},
                     {"h1_violations", h1_viol},
                     {"pass", ok}});
  }
  report["volume_average"] = cells;
  report["pass"] = pass;
  fs::create_directories(out);
  write_json(fs::path(out) / "verify.json", report);
  if (log) *log << report.dump(2) << '\n';
  return pass ? exit_code::ok : exit_code::invariant;
}

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

}  // namespace

int cmd_stats(const ExperimentConfig& c, const std::string& twin_dir, const std::string& out, std::ostream* log) {
  std::ifstream is(fs::path(twin_dir) / "observables.csv");
  if (!is) throw InputError("stats: no observables.csv in " + twin_dir);
  std::string line;
  std::getline(is, line);
  const auto header = split(line);
  std::size_t iu = 0, iv = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "u_" + c.stats.observable) iu = i;
    if (header[i] == "v_" + c.stats.observable) iv = i;
  }
  if (iu == 0 || iv == 0) throw InputError("stats: observable '" + c.stats.observable + "' not in observables.csv");
  ScalarSeries u, v;
  while (std::getline(is, line)) {
    const auto cols = split(line);
    if (cols.size() != header.size()) throw InputError("stats: malformed observables.csv");
    const double t = std::stod(cols[0]);
    u.add(t, std::stod(cols[iu]));
    v.add(t, std::stod(cols[iv]));
  }
  std::ifstream ss(fs::path(twin_dir) / "summary.json");
  if (!ss) throw InputError("stats: no summary.json in " + twin_dir);
  const json summary = json::parse(ss);
  const double e1 = summary.at("summary").at("E1_measured").get<double>();
  Observable phi{c.stats.observable, {}, 0.0};
  const auto& st = summary.at("stats");
  if (st.contains("observable") && st.at("observable") == c.stats.observable) phi.lipschitz_emp = st.at("lipschitz_emp");
  const double t0 = c.stats.window_start;
  const double t1 = c.stats.ladder.empty() ? u.t.back() : t0 + c.stats.ladder.back();
  const auto grid = Grid::get(c.grid);
  const auto r = compare_averages(u, v, phi, t0, t1, e1, grid->lambda1(), c.safety_c);
  LadderTrend tr;
  if (!c.stats.ladder.empty()) tr = ladder_trend(u, v, t0, c.stats.ladder);
  const json j = to_json(r, c.stats.ladder.empty() ? nullptr : &tr);
  fs::create_directories(out);
  write_json(fs::path(out) / "stats.json", {{"format", "ndg-stats"}, {"version", 1}, {"config", to_json(c)}, {"report", j}});
  if (log) *log << j.dump(2) << '\n';
  return exit_code::ok;
}

}  // namespace ndg
