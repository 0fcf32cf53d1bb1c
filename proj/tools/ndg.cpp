#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "ndg/errors.hpp"
#include "ndg/experiment.hpp"
#include "ndg/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nudging data assimilation for 2D periodic Navier-Stokes"};
  app.require_subcommand(1);
  std::string config_path, out = "out", reference, twin_dir, axis;
  std::optional<std::uint64_t> seed;
  std::vector<double> values;
  unsigned threads = 1;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    s->add_option("--out", out, "output directory");
    s->add_option("--seed", seed, "master seed overriding spin-up, noise and v0 seeds");
  };
  auto* spinup = app.add_subcommand("spinup", "spin up the reference flow and write its bounds");
  common(spinup);
  auto* twin = app.add_subcommand("twin", "run a twin experiment against a spun-up reference");
  common(twin);
  twin->add_option("--reference", reference, "spin-up directory (default: --out)");
  auto* sweep = app.add_subcommand("sweep", "one twin run per value of a parameter");
  common(sweep);
  sweep->add_option("--reference", reference, "spin-up directory (default: --out)");
  sweep->add_option("--axis", axis, "beta, kappa, epsilon or m_or_h (overrides the config)");
  sweep->add_option("--values", values, "sweep values (override the config)");
  sweep->add_option("--threads", threads, "concurrent runs")->check(CLI::PositiveNumber);
  auto* verify = app.add_subcommand("verify-observers", "measure interpolant constants and noise bounds");
  common(verify);
  auto* stats = app.add_subcommand("stats", "time-average comparison from a twin output directory");
  common(stats);
  stats->add_option("--twin", twin_dir, "twin output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ndg::ExperimentConfig c = config_path.empty() ? ndg::ExperimentConfig{} : ndg::load_config(config_path);
    if (seed) c.reseed(*seed);
    if (!axis.empty()) c.sweep.axis = axis;
    if (!values.empty()) c.sweep.values = values;
    c.validate();
    std::cerr << "kernels: " << ndg::kernels::name(ndg::kernels::active().isa) << '\n';
    const std::string ref = reference.empty() ? out : reference;
    if (spinup->parsed()) return ndg::cmd_spinup(c, out, &std::cout);
    if (twin->parsed()) return ndg::cmd_twin(c, out, ref, &std::cout);
    if (sweep->parsed()) return ndg::cmd_sweep(c, out, ref, threads, &std::cout);
    if (verify->parsed()) return ndg::cmd_verify_observers(c, out, &std::cout);
    return ndg::cmd_stats(c, twin_dir, out, &std::cout);
  } catch (const ndg::BlowUp& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return ndg::exit_code::diverged;
  } catch (const ndg::CflViolation& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return ndg::exit_code::diverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ndg::exit_code::config;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ndg::exit_code::config;
  }
}
