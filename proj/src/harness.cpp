#include "pfsw/harness.hpp"

#include <algorithm>
#include <cmath>

#include "pfsw/error.hpp"
#include "pfsw/lorenz63.hpp"
#include "pfsw/noise_spectral.hpp"
#include "pfsw/output.hpp"
#include "pfsw/parallel.hpp"
#include "pfsw/srsw.hpp"

namespace pfsw {

namespace {

// Gaussian correlation length (m) to the spectral width in solver units.
double sigma_for(double correlation_m, double length_scale_m) {
  return 2.0 / (correlation_m / length_scale_m);
}

// Channel fields: periodic in x, truncated in y, and faded out over one
// correlation length next to the walls, where a balanced flow cannot cross.
SpectralNoiseSpec channel_spec(const SrswParams& p, const SrswSettings& s, double correlation_m,
                               double amplitude_m, double balance) {
  auto spec = SpectralNoiseSpec::for_grid(p.grid, sigma_for(correlation_m, s.physical.length_scale_m),
                                          amplitude_m, balance, true);
  spec.wall_taper_cells = correlation_m / s.physical.length_scale_m / p.grid.dy;
  return spec;
}

SpectralNoiseSpec perturbation_spec(const SrswParams& p, const SrswSettings& s, double amplitude_m) {
  return channel_spec(p, s, s.ic_correlation_m, amplitude_m, 1.0);
}

}  // namespace

Setup make_setup(const ExperimentConfig& cfg, Execution inner) {
  cfg.validate();
  Setup st;
  if (cfg.model == ModelKind::lorenz63) {
    st.model = std::make_shared<Lorenz63Model>(cfg.lorenz);
    st.obs = cfg.obs;
    st.initial_truth = StateVector(cfg.lorenz_initial);
    st.metric_offset = 0;
    st.metric_size = 3;
    st.time_per_step = cfg.lorenz.dt;
    st.bands = {{"x", 0}, {"y", 1}, {"z", 2}};
    return st;
  }

  const SrswSettings& s = cfg.srsw;
  const SrswParams params = make_params(s.physical);
  const GridSpec& g = params.grid;
  std::optional<SpectralNoiseSpec> noise;
  if (s.noise)
    noise = channel_spec(params, s, s.noise_correlation_m, s.noise_amplitude_m,
                         s.noise_balance / params.pressure_scale());
  st.model = std::make_shared<SrswModel>(params, noise, inner);

  // Zonal jet: height falls by jet_amplitude_m across the channel centre,
  // which in balance gives a westerly jet.
  std::vector<double> eta(g.n_center());
  const double yc = 0.5 * g.length_y();
  const double w = s.jet_width_m / s.physical.length_scale_m;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      eta[g.at(i, j)] = -0.5 * s.jet_amplitude_m *
                        std::tanh(((static_cast<double>(j) + 0.5) * g.dy - yc) / w);
  if (s.ic_perturbation_m > 0.0) {
    SpectralFieldGenerator gen(perturbation_spec(params, s, s.ic_perturbation_m));
    RngStream r(cfg.truth_seed, {0, 0, Purpose::truth_init, 0});
    const auto pert = gen.sample(r);
    for (std::size_t c = 0; c < eta.size(); ++c) eta[c] += pert[c];
  }
  st.initial_pressure.resize(eta.size());
  for (std::size_t c = 0; c < eta.size(); ++c) st.initial_pressure[c] = eta[c] / params.pressure_scale();
  st.initial_truth = pack(geostrophic_init(st.initial_pressure, params));

  const std::size_t h0 = g.n_v1() + g.n_v2();
  st.obs = cfg.obs;
  st.obs.op = ObsOperator::select;
  if (st.obs.indices.empty()) {
    std::vector<std::size_t> cells(g.n_center());
    for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = h0 + c;
    RngStream r(cfg.truth_seed, {0, 0, Purpose::obs_sites, 0});
    st.obs.indices = choose_sites(cells, s.obs_count, r);
  } else {
    for (auto& i : st.obs.indices) i += h0;
  }
  st.metric_offset = h0;
  st.metric_size = g.n_center();
  st.time_per_step = s.physical.dt_s;
  st.bands = {{"h_site0", st.obs.indices.front()}, {"h_center", h0 + g.at(g.nx / 2, g.ny / 2)}};
  return st;
}

Truth generate_truth(const ExperimentConfig& cfg, const Setup& setup) {
  Truth t;
  t.states.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  t.states.push_back(setup.initial_truth);
  for (long k = 1; k <= cfg.steps; ++k) {
    const auto step = static_cast<std::uint64_t>(k);
    RngStream r(cfg.truth_seed, {0, step, Purpose::truth_noise, 0});
    t.states.push_back(setup.model->step(t.states.back(), setup.model->sample_noise(r)));
    if (k % cfg.assimilation_interval == 0) {
      RngStream ro(cfg.truth_seed, {0, step, Purpose::observation, 0});
      t.observations.push_back(synthesize_obs(t.states.back(), setup.obs, k, ro));
    }
  }
  return t;
}

Ensemble init_ensemble(const ExperimentConfig& cfg, const Setup& setup) {
  const std::size_t n = cfg.filter.n_particles;
  std::vector<StateVector> particles(n, setup.initial_truth);
  const double sd = cfg.initial_uncertainty;
  if (sd > 0.0) {
    if (cfg.model == ModelKind::lorenz63) {
      for (std::size_t l = 0; l < n; ++l) {
        RngStream r(cfg.ensemble_seed, {l, 0, Purpose::ensemble_init, 0});
        for (double& v : particles[l].values) v += sd * r.normal();
      }
    } else {
      const auto& model = dynamic_cast<const SrswModel&>(*setup.model);
      const SrswParams& prm = model.params();
      SpectralFieldGenerator gen(perturbation_spec(prm, cfg.srsw, sd));
      parallel_for(n, [&](std::size_t l) {
        RngStream r(cfg.ensemble_seed, {l, 0, Purpose::ensemble_init, 0});
        auto p = gen.sample(r);
        for (std::size_t c = 0; c < p.size(); ++c)
          p[c] = setup.initial_pressure[c] + p[c] / prm.pressure_scale();
        particles[l] = pack(geostrophic_init(p, prm));
      });
    }
  }
  return Ensemble::uniform(std::move(particles), 0);
}

double rmse(const StateVector& mean, const StateVector& truth, std::size_t offset,
            std::size_t size) {
  require(offset + size <= mean.size() && mean.size() == truth.size() && size > 0,
          "rmse: range out of bounds");
  std::vector<double> sq(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double d = mean[offset + k] - truth[offset + k];
    sq[k] = d * d;
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(size));
}

namespace {

struct Moments {
  double mean, var;
};

// Unweighted mean and unbiased variance of entry k across the ensemble.
Moments entry_moments(const Ensemble& e, std::size_t k, std::vector<double>& scratch) {
  const std::size_t n = e.size();
  scratch.resize(n);
  for (std::size_t l = 0; l < n; ++l) scratch[l] = e.particles[l][k];
  const double mean = pairwise_sum(scratch) / static_cast<double>(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double d = e.particles[l][k] - mean;
    scratch[l] = d * d;
  }
  return {mean, pairwise_sum(scratch) / static_cast<double>(n - 1)};
}

}  // namespace

double ensemble_spread(const Ensemble& e, std::size_t offset, std::size_t size) {
  require(e.size() >= 2 && offset + size <= e.dim() && size > 0, "spread: range out of bounds");
  std::vector<double> var(size), scratch;
  for (std::size_t k = 0; k < size; ++k) var[k] = entry_moments(e, offset + k, scratch).var;
  return std::sqrt(pairwise_sum(var) / static_cast<double>(size));
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& output_dir) {
  const Setup setup = make_setup(cfg, Execution::serial);
  const ForwardModel& model = *setup.model;
  RunResult res;
  RunMetrics& m = res.metrics;
  for (const auto& b : setup.bands) m.band_names.push_back(b.first);
  m.bands.resize(setup.bands.size());

  try {
    res.truth = generate_truth(cfg, setup);
    ParticleSet set;
    set.ensemble = init_ensemble(cfg, setup);
    set.anchors = set.ensemble.particles;
    set.paths.assign(set.ensemble.size(), {});
    const std::size_t n = set.ensemble.size();
    std::size_t next_obs = 0;
    std::vector<double> scratch;

    for (long k = 1; k <= cfg.steps; ++k) {
      const auto step = static_cast<std::uint64_t>(k);
      parallel_for(n, [&](std::size_t l) {
        RngStream r(cfg.ensemble_seed, {l, step, Purpose::forecast, 0});
        auto w = model.sample_noise(r);
        set.ensemble.particles[l] = model.step(set.ensemble.particles[l], w);
        set.paths[l].push_back(std::move(w));
      });
      set.ensemble.time_index = k;

      if (k % cfg.assimilation_interval == 0) {
        const Observation& z = res.truth.observations.at(next_obs++);
        if (cfg.assimilate) {
          try {
            m.traces.push_back(assimilate(set, model, make_log_likelihood(z, setup.obs),
                                          cfg.filter, {cfg.ensemble_seed, k}));
          } catch (const TemperingFailure& e) {
            m.traces.push_back(e.trace());
            throw;
          }
        }
        set.anchors = set.ensemble.particles;
        for (auto& p : set.paths) p.clear();
      }

      const StateVector& truth = res.truth.states[static_cast<std::size_t>(k)];
      const StateVector mean = ensemble_mean(set.ensemble);
      m.step.push_back(k);
      m.time.push_back(static_cast<double>(k) * setup.time_per_step);
      m.rmse.push_back(rmse(mean, truth, setup.metric_offset, setup.metric_size));
      m.es.push_back(ensemble_spread(set.ensemble, setup.metric_offset, setup.metric_size));
      for (std::size_t b = 0; b < setup.bands.size(); ++b) {
        const std::size_t idx = setup.bands[b].second;
        const auto mo = entry_moments(set.ensemble, idx, scratch);
        BandRow row{k, m.time.back(), truth[idx], mo.mean, std::sqrt(mo.var), 0.0, 0.0};
        row.min = row.max = set.ensemble.particles[0][idx];
        for (const auto& p : set.ensemble.particles) {
          row.min = std::min(row.min, p[idx]);
          row.max = std::max(row.max, p[idx]);
        }
        m.bands[b].push_back(row);
      }
      m.final_mean = mean;
    }
  } catch (...) {
    if (auto* sw = dynamic_cast<const SrswModel*>(&model)) m.cfl_warnings = sw->cfl_warnings();
    if (!output_dir.empty()) write_run_outputs(output_dir, cfg, setup, res.truth, m);
    throw;
  }
  if (auto* sw = dynamic_cast<const SrswModel*>(&model)) m.cfl_warnings = sw->cfl_warnings();
  if (!output_dir.empty()) write_run_outputs(output_dir, cfg, setup, res.truth, m);
  return res;
}

}  // namespace pfsw
