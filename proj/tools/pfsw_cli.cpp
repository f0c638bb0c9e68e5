#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pfsw/config.hpp"
#include "pfsw/error.hpp"
#include "pfsw/harness.hpp"
#include "pfsw/output.hpp"
#include "pfsw/parallel.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDegeneracy = 3;
constexpr int kModelFailure = 4;

struct Options {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

pfsw::ExperimentConfig resolve(const Options& o) {
  if (o.config.empty() && o.preset.empty())
    throw pfsw::ConfigError("need --config or --preset");
  pfsw::ExperimentConfig cfg;
  if (!o.preset.empty()) cfg = pfsw::preset(o.preset);
  if (!o.config.empty()) cfg = pfsw::load_config(o.config, o.preset.empty() ? nullptr : &cfg);
  if (o.seed) {
    cfg.truth_seed = *o.seed;
    cfg.ensemble_seed = *o.seed + 1;
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

int cmd_presets(const Options& o) {
  if (!o.preset.empty()) {
    std::cout << pfsw::config_to_json(pfsw::preset(o.preset));
    return kOk;
  }
  for (const auto& c : pfsw::scenario_presets())
    std::cout << c.name << "  (" << pfsw::to_string(c.model) << ", " << c.steps << " steps, every "
              << c.assimilation_interval << (c.assimilate ? "" : ", no assimilation") << ")\n";
  return kOk;
}

int cmd_truth(const Options& o) {
  const auto cfg = resolve(o);
  const auto setup = pfsw::make_setup(cfg, pfsw::Execution::parallel);
  const auto truth = pfsw::generate_truth(cfg, setup);
  std::filesystem::create_directories(cfg.output_dir);
  const std::filesystem::path d(cfg.output_dir);
  pfsw::write_obs_csv((d / "obs.csv").string(), truth.observations);
  if (cfg.model == pfsw::ModelKind::srsw) {
    const auto& g = dynamic_cast<const pfsw::SrswModel&>(*setup.model).params().grid;
    for (std::size_t k = 0; k < truth.states.size(); ++k)
      if (k == 0 || k % static_cast<std::size_t>(cfg.assimilation_interval) == 0)
        pfsw::write_snapshot((d / ("truth_" + std::to_string(k))).string(),
                             pfsw::unpack(truth.states[k], g), g, static_cast<long>(k));
  } else {
    pfsw::write_truth_csv((d / "truth.csv").string(), truth.states, setup.time_per_step);
  }
  std::cout << "truth: " << truth.states.size() - 1 << " steps, " << truth.observations.size()
            << " observations -> " << cfg.output_dir << "\n";
  return kOk;
}

int cmd_run(const Options& o) {
  const auto cfg = resolve(o);
  const auto res = pfsw::run_experiment(cfg, cfg.output_dir);
  const auto& m = res.metrics;
  double rmse = 0.0, es = 0.0;
  for (std::size_t i = 0; i < m.rmse.size(); ++i) {
    rmse += m.rmse[i];
    es += m.es[i];
  }
  const auto n = static_cast<double>(m.rmse.size());
  std::cout << cfg.name << ": mean rmse " << rmse / n << ", mean es " << es / n << ", "
            << m.traces.size() << " analyses -> " << cfg.output_dir << "\n";
  if (m.cfl_warnings)
    std::cerr << "warning: CFL number above limit on " << m.cfl_warnings << " model steps\n";
  return kOk;
}

int cmd_validate(const Options& o) {
  if (!o.config.empty() || !o.preset.empty()) {
    const auto cfg = resolve(o);
    std::cout << "config ok: " << cfg.name << "\n";
  }
  if (o.out.empty()) return kOk;
  const std::filesystem::path d(o.out);
  const auto cfg = pfsw::load_config((d / "config.json").string());
  const auto bad = pfsw::check_trace_file((d / "trace.json").string(), cfg.filter);
  for (const auto& b : bad) std::cout << "violation: " << b << "\n";
  if (!bad.empty()) return kDegeneracy;
  std::cout << "trace ok: " << (d / "trace.json").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle filter with tempering and jittering for Lorenz '63 and stochastic shallow water"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)");
    sub->add_option("--preset", o.preset, "Named scenario preset");
    sub->add_option("--seed", o.seed, "Truth seed; the ensemble uses seed + 1");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "OpenMP threads (0: runtime default)");
  };
  auto* truth = app.add_subcommand("truth", "Generate the truth trajectory and observations");
  auto* run = app.add_subcommand("run", "Run a twin experiment");
  auto* presets = app.add_subcommand("presets", "List presets, or print one with --preset");
  auto* validate = app.add_subcommand("validate", "Check a config and/or the trace in --out");
  for (auto* s : {truth, run, presets, validate}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    pfsw::set_thread_count(o.threads);
    if (*presets) return cmd_presets(o);
    if (*truth) return cmd_truth(o);
    if (*run) return cmd_run(o);
    if (*validate) return cmd_validate(o);
  } catch (const pfsw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const pfsw::DegeneracyError& e) {
    std::cerr << "filter failure: " << e.what() << "\n";
    return kDegeneracy;
  } catch (const pfsw::ModelError& e) {
    std::cerr << "model failure: " << e.what() << "\n";
    return kModelFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
