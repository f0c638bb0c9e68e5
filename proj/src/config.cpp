#include "pfsw/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pfsw/error.hpp"

namespace pfsw {

using nlohmann::json;

std::string to_string(ModelKind k) { return k == ModelKind::srsw ? "srsw" : "lorenz63"; }

void ExperimentConfig::validate() const {
  require(assimilation_interval >= 1, "config: assimilation_interval must be >= 1");
  require(steps >= assimilation_interval, "config: steps must be >= assimilation_interval");
  require(initial_uncertainty >= 0.0, "config: initial_uncertainty must be >= 0");
  filter.validate();
  if (model == ModelKind::lorenz63) {
    lorenz.validate();
    require(lorenz_initial.size() == 3, "config: lorenz_initial needs 3 entries");
    obs.validate(3);
  } else {
    const auto& s = srsw;
    s.physical.validate();
    require(s.noise_amplitude_m > 0.0 && s.noise_correlation_m > 0.0,
            "config: srsw noise amplitude and correlation must be > 0");
    require(s.noise_balance >= 0.0, "config: srsw noise_balance must be >= 0");
    require(s.jet_width_m > 0.0 && s.ic_correlation_m > 0.0,
            "config: srsw jet width and ic correlation must be > 0");
    require(s.ic_perturbation_m >= 0.0, "config: srsw ic_perturbation_m must be >= 0");
    require(obs.obs_error_std > 0.0, "config: obs_error_std must be > 0");
    const std::size_t cells = s.physical.nx * s.physical.ny;
    if (obs.indices.empty())
      require(s.obs_count >= 1 && s.obs_count <= cells, "config: srsw obs_count out of range");
    else
      obs.validate(cells);
  }
}

namespace {

// Applies `handlers` to the members of object `j`; unknown keys are an error.
void visit(const json& j, const std::string& where,
           const std::map<std::string, std::function<void(const json&)>>& handlers) {
  require(j.is_object(), "config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto h = handlers.find(it.key());
    require(h != handlers.end(), "config: unknown key '" + where + "." + it.key() + "'");
    try {
      h->second(it.value());
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + where + "." + it.key() + "': " + e.what());
    }
  }
}

template <class T>
std::function<void(const json&)> into(T& field) {
  return [&field](const json& v) { field = v.get<T>(); };
}

void read_filter(const json& j, FilterConfig& f) {
  // A new particle count resets the count-dependent defaults first.
  if (j.is_object() && j.contains("n_particles")) f = FilterConfig::defaults_for(j.at("n_particles").get<std::size_t>());
  visit(j, "filter",
        {{"n_particles", into(f.n_particles)},
         {"ess_threshold", into(f.ess_threshold)},
         {"jitter_rho", into(f.jitter_rho)},
         {"mcmc_steps", into(f.mcmc_steps)},
         {"jitter_scope", [&](const json& v) { f.jitter_scope = jitter_scope_from_string(v.get<std::string>()); }},
         {"max_tempering_iters", into(f.max_tempering_iters)},
         {"bisection_tol", into(f.bisection_tol)}});
}

void read_obs(const json& j, ObsModel& o) {
  visit(j, "obs",
        {{"operator", [&](const json& v) { o.op = obs_operator_from_string(v.get<std::string>()); }},
         {"obs_error_std", into(o.obs_error_std)},
         {"indices", into(o.indices)}});
}

void read_lorenz(const json& j, Lorenz63Params& p) {
  visit(j, "lorenz",
        {{"alpha", into(p.alpha)},
         {"beta", into(p.beta)},
         {"gamma", into(p.gamma)},
         {"dt", into(p.dt)},
         {"model_error_std", into(p.model_error_std)}});
}

void read_physical(const json& j, SrswPhysical& p) {
  visit(j, "srsw.physical",
        {{"nx", into(p.nx)},
         {"ny", into(p.ny)},
         {"lat_south_deg", into(p.lat_south_deg)},
         {"lat_north_deg", into(p.lat_north_deg)},
         {"aspect", into(p.aspect)},
         {"earth_radius_m", into(p.earth_radius_m)},
         {"omega", into(p.omega)},
         {"gravity", into(p.gravity)},
         {"length_scale_m", into(p.length_scale_m)},
         {"velocity_scale", into(p.velocity_scale)},
         {"mean_depth_m", into(p.mean_depth_m)},
         {"dt_s", into(p.dt_s)}});
}

void read_srsw(const json& j, SrswSettings& s) {
  visit(j, "srsw",
        {{"physical", [&](const json& v) { read_physical(v, s.physical); }},
         {"noise", into(s.noise)},
         {"noise_amplitude_m", into(s.noise_amplitude_m)},
         {"noise_correlation_m", into(s.noise_correlation_m)},
         {"noise_balance", into(s.noise_balance)},
         {"jet_amplitude_m", into(s.jet_amplitude_m)},
         {"jet_width_m", into(s.jet_width_m)},
         {"ic_perturbation_m", into(s.ic_perturbation_m)},
         {"ic_correlation_m", into(s.ic_correlation_m)},
         {"obs_count", into(s.obs_count)}});
}

json to_json(const ExperimentConfig& c) {
  const auto& f = c.filter;
  const auto& l = c.lorenz;
  const auto& s = c.srsw;
  const auto& p = s.physical;
  return {
      {"name", c.name},
      {"model", to_string(c.model)},
      {"lorenz",
       {{"alpha", l.alpha}, {"beta", l.beta}, {"gamma", l.gamma}, {"dt", l.dt},
        {"model_error_std", l.model_error_std}}},
      {"lorenz_initial", c.lorenz_initial},
      {"srsw",
       {{"physical",
         {{"nx", p.nx}, {"ny", p.ny}, {"lat_south_deg", p.lat_south_deg},
          {"lat_north_deg", p.lat_north_deg}, {"aspect", p.aspect},
          {"earth_radius_m", p.earth_radius_m}, {"omega", p.omega}, {"gravity", p.gravity},
          {"length_scale_m", p.length_scale_m}, {"velocity_scale", p.velocity_scale},
          {"mean_depth_m", p.mean_depth_m}, {"dt_s", p.dt_s}}},
        {"noise", s.noise},
        {"noise_amplitude_m", s.noise_amplitude_m},
        {"noise_correlation_m", s.noise_correlation_m},
        {"noise_balance", s.noise_balance},
        {"jet_amplitude_m", s.jet_amplitude_m},
        {"jet_width_m", s.jet_width_m},
        {"ic_perturbation_m", s.ic_perturbation_m},
        {"ic_correlation_m", s.ic_correlation_m},
        {"obs_count", s.obs_count}}},
      {"filter",
       {{"n_particles", f.n_particles}, {"ess_threshold", f.ess_threshold},
        {"jitter_rho", f.jitter_rho}, {"mcmc_steps", f.mcmc_steps},
        {"jitter_scope", to_string(f.jitter_scope)},
        {"max_tempering_iters", f.max_tempering_iters}, {"bisection_tol", f.bisection_tol}}},
      {"obs",
       {{"operator", to_string(c.obs.op)}, {"obs_error_std", c.obs.obs_error_std},
        {"indices", c.obs.indices}}},
      {"steps", c.steps},
      {"assimilation_interval", c.assimilation_interval},
      {"assimilate", c.assimilate},
      {"initial_uncertainty", c.initial_uncertainty},
      {"truth_seed", c.truth_seed},
      {"ensemble_seed", c.ensemble_seed},
      {"output_dir", c.output_dir},
  };
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig* base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c = base ? *base : ExperimentConfig{};
  visit(j, "config",
        {{"name", into(c.name)},
         {"model",
          [&](const json& v) {
            const auto m = v.get<std::string>();
            if (m == "lorenz63") c.model = ModelKind::lorenz63;
            else if (m == "srsw") c.model = ModelKind::srsw;
            else throw ConfigError("config: unknown model '" + m + "'");
          }},
         {"lorenz", [&](const json& v) { read_lorenz(v, c.lorenz); }},
         {"lorenz_initial", into(c.lorenz_initial)},
         {"srsw", [&](const json& v) { read_srsw(v, c.srsw); }},
         {"filter", [&](const json& v) { read_filter(v, c.filter); }},
         {"obs", [&](const json& v) { read_obs(v, c.obs); }},
         {"steps", into(c.steps)},
         {"assimilation_interval", into(c.assimilation_interval)},
         {"assimilate", into(c.assimilate)},
         {"initial_uncertainty", into(c.initial_uncertainty)},
         {"truth_seed", into(c.truth_seed)},
         {"ensemble_seed", into(c.ensemble_seed)},
         {"output_dir", into(c.output_dir)}});
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

ExperimentConfig load_config(const std::string& path, const ExperimentConfig* base) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), base);
}

std::vector<ExperimentConfig> scenario_presets() {
  std::vector<ExperimentConfig> out;

  ExperimentConfig lz;
  lz.model = ModelKind::lorenz63;
  lz.lorenz = Lorenz63Params{};
  lz.lorenz.dt = 0.01;
  lz.lorenz.model_error_std = 0.1;
  lz.filter = FilterConfig::defaults_for(50);
  lz.steps = 500;
  lz.assimilation_interval = 20;
  lz.initial_uncertainty = 1.0;
  lz.obs.op = ObsOperator::identity;
  lz.obs.obs_error_std = 0.1;

  auto add = [&](ExperimentConfig c, const std::string& name) {
    c.name = name;
    c.output_dir = "out/" + name;
    out.push_back(std::move(c));
  };

  add(lz, "lorenz-standard");
  {
    auto c = lz;
    c.assimilate = false;
    add(c, "lorenz-noda");
  }
  {
    auto c = lz;
    c.obs.op = ObsOperator::square_all;
    add(c, "lorenz-nl-full");
  }
  {
    auto c = lz;
    c.obs.op = ObsOperator::square_first;
    add(c, "lorenz-nl-partial");
  }

  ExperimentConfig sw;
  sw.model = ModelKind::srsw;
  sw.filter = FilterConfig::defaults_for(50);
  sw.steps = 50;
  sw.assimilation_interval = 10;
  sw.initial_uncertainty = 1.0;
  sw.obs.op = ObsOperator::select;
  sw.obs.obs_error_std = 1.0;
  sw.srsw.noise_amplitude_m = 200.0;
  sw.srsw.obs_count = 1;

  add(sw, "srsw-standard");
  {
    auto c = sw;
    c.assimilate = false;
    add(c, "srsw-noda");
  }
  {
    auto c = sw;
    c.assimilation_interval = 5;
    c.srsw.noise_amplitude_m = 50.0;
    add(c, "srsw-freq");
  }
  {
    auto c = sw;
    c.assimilation_interval = 5;
    c.srsw.noise_amplitude_m = 50.0;
    c.srsw.obs_count = 100;
    add(c, "srsw-dense");
  }
  {
    auto c = sw;
    c.steps = 100;
    c.assimilation_interval = 5;
    c.srsw.noise_amplitude_m = 50.0;
    c.srsw.obs_count = 5;
    add(c, "srsw-long");
  }
  return out;
}

ExperimentConfig preset(const std::string& name) {
  for (auto& c : scenario_presets())
    if (c.name == name) return c;
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace pfsw
