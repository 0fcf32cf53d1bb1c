#include "ndg/observers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ndg/errors.hpp"
#include "ndg/fft.hpp"
#include "ndg/rng.hpp"
#include "ndg/snapshot.hpp"
#include "ndg/spectral_ops.hpp"

namespace ndg {

std::string observer_kind_name(ObserverKind k) { return k == ObserverKind::fourier ? "fourier" : "volume_average"; }

ObserverKind parse_observer_kind(const std::string& s) {
  if (s == "fourier") return ObserverKind::fourier;
  if (s == "volume_average") return ObserverKind::volume_average;
  throw InputError("unknown observer kind '" + s + "' (expected fourier or volume_average)");
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double s = 1.0 - t;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / s);
  const double da = a / (t * t), db = b / (s * s);
  return (da * b + a * db) / ((a + b) * (a + b));
}

ObservationOperator::ObservationOperator(GridPtr grid, const ObserverSpec& spec) : grid_(std::move(grid)), spec_(spec) {
  if (!grid_) throw std::invalid_argument("observer: null grid");
  if (spec_.kind == ObserverKind::fourier) {
    if (spec_.max_ksq >= 0) spec_.modes = grid_->pairs_within(spec_.max_ksq);
    if (spec_.modes > grid_->pair_count()) throw InputError("observer: more modes requested than the grid holds");
    h_eff_ = spec_.modes < grid_->pair_count() ? 1.0 / std::sqrt(grid_->pair_eigenvalue(spec_.modes)) : 0.0;
    mask_.assign(2 * grid_->slots(), 0.0);
    for (std::size_t s = 0; s < grid_->slots(); ++s)
      if (grid_->pair_rank(s) < spec_.modes) {
        mask_[2 * s] = mask_[2 * s + 1] = 1.0;
        kept_.push_back(s);
      }
    return;
  }
  const int n = grid_->n();
  if (spec_.cells < 3 || n % spec_.cells != 0)
    throw InputError("observer: cells_per_axis must be >= 3 and divide the grid size " + std::to_string(n));
  if (!(spec_.mollify_width > 0.0 && spec_.mollify_width < 1.0))
    throw InputError("observer: mollify_width must lie in (0, 1)");
  side_ = grid_->length() / spec_.cells;
  h_eff_ = std::sqrt(2.0) * side_;
  build_profiles();
}

ObservationOperator ObservationOperator::fourier(GridPtr grid, std::size_t modes) {
  ObserverSpec s;
  s.kind = ObserverKind::fourier;
  s.modes = modes;
  return ObservationOperator(std::move(grid), s);
}

ObservationOperator ObservationOperator::volume_average(GridPtr grid, int cells, double mollify_width) {
  ObserverSpec s;
  s.kind = ObserverKind::volume_average;
  s.cells = cells;
  s.mollify_width = mollify_width;
  return ObservationOperator(std::move(grid), s);
}

void ObservationOperator::build_profiles() {
  const int n = grid_->n(), c = spec_.cells;
  const double L = grid_->length(), s = side_, delta = 0.5 * spec_.mollify_width * s;
  auto profile_at = [&](double y) {
    return smooth_step((y + 0.5 * s + delta) / (2 * delta)) - smooth_step((y - 0.5 * s + delta) / (2 * delta));
  };
  profiles_.assign(std::size_t(c), std::vector<double>(std::size_t(n), 0.0));
  for (int a = 0; a < c; ++a) {
    const double centre = (a + 0.5) * s;
    for (int i = 0; i < n; ++i) {
      double y = i * grid_->dx() - centre;
      y -= L * std::floor(y / L + 0.5);
      profiles_[a][i] = profile_at(y);
    }
  }
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int a = 0; a < c; ++a) sum += profiles_[a][i];
    for (int a = 0; a < c; ++a) profiles_[a][i] /= sum;
  }
  spans_.clear();
  for (int a = 0; a < c; ++a) {
    // Support is one contiguous periodic arc; find its first index.
    int start = 0;
    for (int i = 0; i < n; ++i)
      if (profiles_[a][i] != 0.0 && profiles_[a][(i + n - 1) % n] == 0.0) start = i;
    Span sp{start, {}};
    for (int t = 0; t < n && profiles_[a][(start + t) % n] != 0.0; ++t) sp.w.push_back(profiles_[a][(start + t) % n]);
    spans_.push_back(std::move(sp));
  }

  // Gradient constant from the continuous profile on a fine sampling.
  const int m = 2001;
  std::vector<double> phi(m), dphi(m);
  for (int i = 0; i < m; ++i) {
    const double y = -0.5 * s - delta + (s + 2 * delta) * i / (m - 1);
    phi[i] = profile_at(y);
    dphi[i] = (smooth_step_derivative((y + 0.5 * s + delta) / (2 * delta)) -
               smooth_step_derivative((y - 0.5 * s + delta) / (2 * delta))) /
              (2 * delta);
  }
  double g2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g2 = std::max(g2, dphi[i] * dphi[i] * phi[j] * phi[j] + phi[i] * phi[i] * dphi[j] * dphi[j]);
  c0_grad_ = std::sqrt(g2) * h_eff_;
}

std::vector<double> ObservationOperator::cell_means(const double* samples) const {
  const int n = grid_->n(), c = spec_.cells, p = n / c;
  std::vector<double> means(std::size_t(c) * c, 0.0);
  for (int i = 0; i < n; ++i) {
    const int a = i / p;
    for (int j = 0; j < n; ++j) means[std::size_t(a) * c + j / p] += samples[std::size_t(i) * n + j];
  }
  for (auto& v : means) v /= double(p) * p;
  return means;
}

void ObservationOperator::combine(const std::vector<double>& coeffs, double* out) const {
  const int n = grid_->n(), c = spec_.cells;
  std::vector<double> t(std::size_t(c) * n, 0.0);
  for (int a = 0; a < c; ++a) {
    double* row = &t[std::size_t(a) * n];
    for (int b = 0; b < c; ++b) {
      const double v = coeffs[std::size_t(a) * c + b];
      const Span& sp = spans_[b];
      for (std::size_t q = 0; q < sp.w.size(); ++q) row[(sp.start + q) % n] += v * sp.w[q];
    }
  }
  std::fill(out, out + std::size_t(n) * n, 0.0);
  for (int a = 0; a < c; ++a) {
    const double* row = &t[std::size_t(a) * n];
    const Span& sp = spans_[a];
    for (std::size_t q = 0; q < sp.w.size(); ++q) {
      double* dst = out + std::size_t((sp.start + q) % n) * n;
      const double w = sp.w[q];
      for (int j = 0; j < n; ++j) dst[j] += w * row[j];
    }
  }
}

SpectralField ObservationOperator::apply(const SpectralField& u) const {
  if (!(u.grid()->spec() == grid_->spec())) throw GridMismatch("observer: field and operator grids differ");
  if (spec_.kind == ObserverKind::fourier) return low_mode_project(u, spec_.modes);
  const auto phys = to_physical(u);
  std::vector<double> o1(phys.u1.size()), o2(phys.u2.size());
  combine(cell_means(phys.u1.data()), o1.data());
  combine(cell_means(phys.u2.data()), o2.data());
  return from_physical(grid_, o1, o2);
}

void ObservationOperator::apply_into(const SpectralField& u, SpectralField& out) const {
  if (!(u.grid()->spec() == grid_->spec()) || !out.same_grid(u)) throw GridMismatch("observer: field and operator grids differ");
  if (spec_.kind != ObserverKind::fourier) {
    out = apply(u);
    return;
  }
  out.set_zero();
  for (std::size_t s : kept_) {
    out.c1()[s] = u.c1()[s];
    out.c2()[s] = u.c2()[s];
  }
}

SpectralField draw_noise(const NoiseModel& model, std::uint64_t n, const ObservationOperator& op) {
  const GridPtr& g = op.grid();
  if (model.epsilon == 0.0) return SpectralField(g);
  if (op.kind() == ObserverKind::fourier) {
    SpectralField eta(g);
    const double h = 0.5 * model.epsilon;
    for (std::size_t r = 0; r < op.modes(); ++r) {
      auto u = [&](int c) { return h * (2.0 * rng::uniform(model.seed, n, r, std::uint64_t(c)) - 1.0); };
      const auto [k1, k2] = g->pair_wavevector(r);
      eta.set_mode(k1, k2, cplx(u(0), u(1)), cplx(u(2), u(3)));
    }
    return eta;
  }
  // Uniform in the box inscribed in the disc of radius epsilon.
  const int c = op.cells();
  const double h = model.epsilon / std::sqrt(2.0);
  std::vector<double> e1(std::size_t(c) * c), e2(std::size_t(c) * c);
  for (std::size_t j = 0; j < e1.size(); ++j) {
    e1[j] = h * (2.0 * rng::uniform(model.seed, n, j, 0) - 1.0);
    e2[j] = h * (2.0 * rng::uniform(model.seed, n, j, 1) - 1.0);
  }
  std::vector<double> p1(g->physical_size()), p2(g->physical_size());
  op.combine(e1, p1.data());
  op.combine(e2, p2.data());
  return from_physical(g, p1, p2);
}

double ObservationStream::max_gap() const {
  double m = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) m = std::max(m, times[i] - times[i - 1]);
  return m;
}

void ObservationStream::validate() const {
  if (times.size() != fields.size()) throw InputError("observations: times and fields differ in length");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InputError("observations: times must strictly increase");
    if (times[i] - times[i - 1] > kappa * (1.0 + 1e-12))
      throw InputError("observations: gap " + std::to_string(times[i] - times[i - 1]) + " exceeds kappa");
  }
}

NormReport observe(const ObservationOperator& op, const SpectralField& u, const NoiseModel& model, std::uint64_t n,
                   SpectralField& out) {
  op.apply_into(u, out);
  if (model.epsilon == 0.0) {
    if (!op.preserves_divergence_free()) project_leray_inplace(out);
    return {};
  }
  SpectralField eta = draw_noise(model, n, op);
  const auto r = norms(eta);
  if (op.preserves_divergence_free()) {
    out += project_leray(std::move(eta));
  } else {
    out += eta;
    project_leray_inplace(out);
  }
  return r;
}

ObservationStream observe_trajectory(const Trajectory& u, const std::vector<double>& times,
                                     const ObservationOperator& op, const NoiseModel& model, double kappa) {
  ObservationStream s;
  s.kappa = kappa;
  s.epsilon = model.epsilon;
  s.seed = model.seed;
  s.op = op.spec();
  for (std::size_t n = 0; n < times.size(); ++n) {
    const SpectralField* un = u.find(times[n]);
    if (!un) throw InputError("observations: time " + std::to_string(times[n]) + " is not a stored sample");
    SpectralField obs(op.grid());
    const auto r = observe(op, *un, model, n, obs);
    s.e0_measured = std::max(s.e0_measured, r.l2);
    s.e1_measured = std::max(s.e1_measured, r.h1);
    s.times.push_back(times[n]);
    s.fields.push_back(std::move(obs));
  }
  s.validate();
  return s;
}

namespace {

nlohmann::json spec_to_json(const ObserverSpec& s) {
  nlohmann::json j;
  j["kind"] = observer_kind_name(s.kind);
  if (s.kind == ObserverKind::fourier) {
    j["modes"] = s.modes;
  } else {
    j["cells_per_axis"] = s.cells;
    j["mollify_width"] = s.mollify_width;
  }
  return j;
}

ObserverSpec spec_from_json(const nlohmann::json& j) {
  ObserverSpec s;
  s.kind = parse_observer_kind(j.at("kind").get<std::string>());
  if (s.kind == ObserverKind::fourier) {
    s.modes = j.at("modes").get<std::size_t>();
  } else {
    s.cells = j.at("cells_per_axis").get<int>();
    s.mollify_width = j.value("mollify_width", 0.8);
  }
  return s;
}

}  // namespace

void write_stream(const std::string& dir, const ObservationStream& s) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json m;
  m["format"] = "ndg-observations";
  m["version"] = 1;
  m["kappa"] = s.kappa;
  m["epsilon"] = s.epsilon;
  m["seed"] = s.seed;
  m["e0_measured"] = s.e0_measured;
  m["e1_measured"] = s.e1_measured;
  m["operator"] = spec_to_json(s.op);
  m["times"] = s.times;
  auto files = nlohmann::json::array();
  for (std::size_t n = 0; n < s.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "obs_%06zu.ndg2", n);
    write_snapshot((fs::path(dir) / name).string(), s.fields[n]);
    files.push_back(name);
  }
  m["snapshots"] = files;
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw InputError("observations: cannot write manifest in " + dir);
  os << m.dump(2) << '\n';
}

ObservationStream read_stream(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw InputError("observations: no manifest.json in " + dir);
  ObservationStream s;
  try {
    const auto m = nlohmann::json::parse(is);
    if (m.at("format").get<std::string>() != "ndg-observations") throw InputError("observations: wrong manifest format");
    s.kappa = m.at("kappa").get<double>();
    s.epsilon = m.at("epsilon").get<double>();
    s.seed = m.at("seed").get<std::uint64_t>();
    s.e0_measured = m.value("e0_measured", 0.0);
    s.e1_measured = m.value("e1_measured", 0.0);
    s.op = spec_from_json(m.at("operator"));
    s.times = m.at("times").get<std::vector<double>>();
    for (const auto& f : m.at("snapshots")) s.fields.push_back(read_snapshot((fs::path(dir) / f.get<std::string>()).string()));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("observations: malformed manifest: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

void require_corpus(const std::vector<SpectralField>& corpus) {
  if (corpus.empty()) throw InputError("estimator: empty corpus");
}

}  // namespace

double estimate_c0(const ObservationOperator& op, const std::vector<SpectralField>& corpus) {
  require_corpus(corpus);
  double c0 = 0.0;
  for (const auto& phi : corpus) {
    const double res = l2_distance(phi, op.apply(phi));
    const double den = op.h_eff() * h1_norm(phi);
    if (den == 0.0) {
      if (res > 1e-13 * std::max(1.0, l2_norm(phi))) return std::numeric_limits<double>::infinity();
      continue;
    }
    c0 = std::max(c0, res / den);
  }
  return c0;
}

double estimate_c1(const ObservationOperator& op, const std::vector<SpectralField>& corpus) {
  require_corpus(corpus);
  double c1 = 0.0;
  for (const auto& phi : corpus) {
    const double d = l2_norm(phi);
    if (d == 0.0) continue;
    c1 = std::max(c1, l2_norm(op.apply(phi)) / d);
  }
  return c1;
}

}  // namespace ndg
