#include "pfsw/output.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pfsw/error.hpp"

namespace pfsw {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

void write_metrics_csv(const std::string& path, const RunMetrics& m) {
  auto out = open_out(path);
  out << "step,time,rmse,es\n";
  for (std::size_t i = 0; i < m.step.size(); ++i)
    out << m.step[i] << ',' << num(m.time[i]) << ',' << num(m.rmse[i]) << ',' << num(m.es[i])
        << '\n';
}

void write_band_csv(const std::string& path, const std::vector<BandRow>& rows) {
  auto out = open_out(path);
  out << "step,time,truth,mean,std,mean_minus_std,mean_plus_std,min,max\n";
  for (const auto& r : rows)
    out << r.step << ',' << num(r.time) << ',' << num(r.truth) << ',' << num(r.mean) << ','
        << num(r.std) << ',' << num(r.mean - r.std) << ',' << num(r.mean + r.std) << ','
        << num(r.min) << ',' << num(r.max) << '\n';
}

void write_obs_csv(const std::string& path, const std::vector<Observation>& obs) {
  auto out = open_out(path);
  out << "time_index";
  const std::size_t d = obs.empty() ? 0 : obs.front().values.size();
  for (std::size_t i = 0; i < d; ++i) out << ",z" << i;
  out << '\n';
  for (const auto& z : obs) {
    out << z.time_index;
    for (double v : z.values) out << ',' << num(v);
    out << '\n';
  }
}

void write_truth_csv(const std::string& path, const std::vector<StateVector>& states,
                     double time_per_step) {
  auto out = open_out(path);
  out << "step,time";
  const std::size_t d = states.empty() ? 0 : states.front().size();
  for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t k = 0; k < states.size(); ++k) {
    out << k << ',' << num(static_cast<double>(k) * time_per_step);
    for (double v : states[k].values) out << ',' << num(v);
    out << '\n';
  }
}

void write_trace_json(const std::string& path, const std::vector<TemperingTrace>& traces) {
  json arr = json::array();
  for (const auto& t : traces) {
    json stages = json::array();
    for (const auto& s : t.stages)
      stages.push_back({{"delta_phi", s.delta_phi},
                        {"phi", s.phi},
                        {"ess_pre", s.ess_pre},
                        {"ess_post", s.ess_post},
                        {"accept_rate", s.accept_rate()},
                        {"duplicates", s.duplicates},
                        {"proposals", s.proposals},
                        {"accepted", s.accepted},
                        {"failed", s.failed}});
    arr.push_back({{"step", t.step}, {"stages", std::move(stages)}});
  }
  auto out = open_out(path);
  out << arr.dump(1) << '\n';
}

void write_snapshot(const std::string& stem, const SrswState& s, const GridSpec& g,
                    long time_index) {
  static_assert(std::endian::native == std::endian::little, "snapshots assume a little-endian host");
  auto bin = open_out(stem + ".bin", std::ios::binary);
  for (const auto* v : {&s.v1, &s.v2, &s.h})
    bin.write(reinterpret_cast<const char*>(v->data()),
              static_cast<std::streamsize>(v->size() * sizeof(double)));
  auto side = open_out(stem + ".json");
  side << json{{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy}, {"time_index", time_index}}
              .dump(1)
       << '\n';
}

SrswState read_snapshot(const std::string& stem, GridSpec* g_out, long* time_index) {
  const json side = read_json(stem + ".json");
  GridSpec g;
  g.nx = side.at("nx").get<std::size_t>();
  g.ny = side.at("ny").get<std::size_t>();
  g.dx = side.at("dx").get<double>();
  g.dy = side.at("dy").get<double>();
  std::ifstream bin(stem + ".bin", std::ios::binary);
  require(static_cast<bool>(bin), "cannot open '" + stem + ".bin'");
  SrswState s = SrswState::zeros(g);
  for (auto* v : {&s.v1, &s.v2, &s.h})
    bin.read(reinterpret_cast<char*>(v->data()), static_cast<std::streamsize>(v->size() * sizeof(double)));
  require(static_cast<bool>(bin), "snapshot '" + stem + ".bin' is truncated");
  if (g_out) *g_out = g;
  if (time_index) *time_index = side.at("time_index").get<long>();
  return s;
}

std::vector<std::string> check_trace_file(const std::string& path, const FilterConfig& cfg) {
  std::vector<std::string> bad;
  const json arr = read_json(path);
  if (!arr.is_array()) return {"trace is not a JSON array"};
  for (const auto& t : arr) {
    const long step = t.at("step").get<long>();
    const std::string where = "step " + std::to_string(step) + ": ";
    double phi = 0.0;
    const auto& stages = t.at("stages");
    if (stages.empty()) bad.push_back(where + "no stages");
    std::size_t r = 0;
    for (const auto& s : stages) {
      const double d = s.at("delta_phi").get<double>();
      const double e = s.at("ess_pre").get<double>();
      if (!(d > 0.0)) bad.push_back(where + "stage " + std::to_string(r) + " has delta_phi <= 0");
      if (e < cfg.ess_threshold - cfg.bisection_tol)
        bad.push_back(where + "stage " + std::to_string(r) + " ess_pre " + num(e) +
                      " below threshold - tol");
      phi += d;
      ++r;
    }
    if (!stages.empty() && phi != 1.0)
      bad.push_back(where + "increments sum to " + num(phi) + ", not 1");
  }
  return bad;
}

void write_run_outputs(const std::string& dir, const ExperimentConfig& cfg, const Setup& setup,
                       const Truth& truth, const RunMetrics& m) {
  fs::create_directories(dir);
  const fs::path d(dir);
  write_metrics_csv((d / "metrics.csv").string(), m);
  for (std::size_t b = 0; b < m.band_names.size(); ++b)
    write_band_csv((d / ("band_" + m.band_names[b] + ".csv")).string(), m.bands[b]);
  write_obs_csv((d / "obs.csv").string(), truth.observations);
  write_trace_json((d / "trace.json").string(), m.traces);
  auto cfg_out = open_out((d / "config.json").string());
  cfg_out << config_to_json(cfg);

  if (cfg.model == ModelKind::srsw) {
    const auto& g = dynamic_cast<const SrswModel&>(*setup.model).params().grid;
    if (!truth.states.empty()) {
      write_snapshot((d / "truth_initial").string(), unpack(truth.states.front(), g), g, 0);
      write_snapshot((d / "truth_final").string(), unpack(truth.states.back(), g), g,
                     static_cast<long>(truth.states.size()) - 1);
    }
    if (!m.final_mean.values.empty())
      write_snapshot((d / "mean_final").string(), unpack(m.final_mean, g), g, m.step.back());
  } else {
    write_truth_csv((d / "truth.csv").string(), truth.states, setup.time_per_step);
  }
}

}  // namespace pfsw
