#include "pfsw/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfsw {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxBisectionIters = 200;

void require_normalized(std::span<const double> w) {
  require(!w.empty(), "empty weight vector");
  for (double x : w) require(x >= 0.0 && std::isfinite(x), "negative or non-finite weight");
  require(std::abs(pairwise_sum(w) - 1.0) <= 1e-9, "weights are not normalized");
}

double ess_at(std::span<const double> log_lik, double delta_phi) {
  return ess(tempered_weights(log_lik, delta_phi));
}

template <class T>
std::vector<T> gather(const std::vector<T>& src, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(src[i]);
  return out;
}

}  // namespace

std::string to_string(JitterScope s) { return s == JitterScope::all ? "all" : "duplicates"; }

JitterScope jitter_scope_from_string(const std::string& s) {
  if (s == "all") return JitterScope::all;
  if (s == "duplicates") return JitterScope::duplicates;
  throw ConfigError("filter: unknown jitter_scope '" + s + "'");
}

FilterConfig FilterConfig::defaults_for(std::size_t n) {
  FilterConfig c;
  c.n_particles = n;
  c.ess_threshold = 0.5 * static_cast<double>(n);
  c.bisection_tol = 0.01 * static_cast<double>(n);
  return c;
}

void FilterConfig::validate() const {
  require(n_particles >= 2, "filter: need at least 2 particles");
  require(ess_threshold > 1.0 && ess_threshold <= static_cast<double>(n_particles),
          "filter: ess_threshold must lie in (1, N]");
  require(jitter_rho > 0.0 && jitter_rho < 1.0, "filter: jitter_rho must lie in (0, 1)");
  require(mcmc_steps >= 1, "filter: mcmc_steps must be >= 1");
  require(max_tempering_iters >= 1, "filter: max_tempering_iters must be >= 1");
  require(bisection_tol > 0.0, "filter: bisection_tol must be positive");
}

void ParticleSet::validate(const ForwardModel& model) const {
  ensemble.validate();
  const std::size_t n = ensemble.size();
  require(ensemble.dim() == model.state_dim(), "particle dimension differs from model");
  require(anchors.size() == n && paths.size() == n, "anchors/paths must match ensemble size");
  for (const auto& a : anchors) require(a.size() == model.state_dim(), "anchor dimension mismatch");
  for (const auto& p : paths)
    for (const auto& w : p) require(w.size() == model.noise_dim(), "noise increment length mismatch");
}

double ess(std::span<const double> weights) {
  require_normalized(weights);
  std::vector<double> sq(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) sq[i] = weights[i] * weights[i];
  return 1.0 / pairwise_sum(sq);
}

std::vector<double> tempered_weights(std::span<const double> log_lik, double delta_phi) {
  require(!log_lik.empty(), "tempered_weights: empty input");
  require(delta_phi > 0.0 && delta_phi <= 1.0, "tempered_weights: delta_phi must lie in (0, 1]");
  double top = kNegInf;
  for (double l : log_lik) {
    require(!std::isnan(l) && l != std::numeric_limits<double>::infinity(),
            "tempered_weights: log-likelihood is NaN or +inf");
    top = std::max(top, l);
  }
  if (top == kNegInf) throw DegeneracyError("zero likelihood for every particle");

  std::vector<double> w(log_lik.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = log_lik[i] == kNegInf ? 0.0 : std::exp(delta_phi * (log_lik[i] - top));
  const double total = pairwise_sum(w);
  for (double& x : w) x /= total;
  return w;
}

double find_temperature(std::span<const double> log_lik, double phi_done,
                        const FilterConfig& cfg) {
  require(phi_done >= 0.0 && phi_done < 1.0, "find_temperature: phi_done must lie in [0, 1)");
  const double remainder = 1.0 - phi_done;
  const double target = cfg.ess_threshold;
  if (ess_at(log_lik, remainder) >= target) return remainder;

  // ESS is non-increasing in the increment, so bisect on [0, remainder].
  double lo = 0.0;
  double hi = remainder;
  for (int it = 0; it < kMaxBisectionIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double e = ess_at(log_lik, mid);
    if (std::abs(e - target) <= cfg.bisection_tol) return mid;
    if (e > target)
      lo = mid;
    else
      hi = mid;
  }
  throw DegeneracyError("temperature bisection did not converge");
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, RngStream& rng) {
  require_normalized(weights);
  const std::size_t n = weights.size();
  std::vector<double> cum(n);
  double c = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    c += weights[i];
    cum[i] = c;
    if (weights[i] > 0.0) last_positive = i;
  }
  const double total = cum.back();
  const double offset = rng.uniform();

  std::vector<std::size_t> idx(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (offset + static_cast<double>(i)) / static_cast<double>(n) * total;
    while (j < n && cum[j] <= u) ++j;
    idx[i] = std::min(j, last_positive);
  }
  return idx;
}

std::vector<char> duplicate_flags(std::span<const std::size_t> ancestors) {
  std::vector<std::size_t> count(ancestors.size(), 0);
  for (std::size_t a : ancestors) {
    require(a < ancestors.size(), "ancestor index out of range");
    ++count[a];
  }
  std::vector<char> flags(ancestors.size());
  for (std::size_t i = 0; i < ancestors.size(); ++i) flags[i] = count[ancestors[i]] > 1;
  return flags;
}

JitterResult jitter_mcmc(ParticleSet& set, std::span<const char> duplicate,
                         std::vector<double>& log_lik, const ForwardModel& model,
                         const LogLikelihood& loglik, double phi_cum, const FilterConfig& cfg,
                         const FilterRng& rng, std::size_t stage, Execution ex) {
  const std::size_t n = set.ensemble.size();
  require(duplicate.size() == n && log_lik.size() == n, "jitter_mcmc: size mismatch");
  require(phi_cum > 0.0 && phi_cum <= 1.0, "jitter_mcmc: phi_cum must lie in (0, 1]");

  std::vector<std::size_t> accepted(n, 0), failed(n, 0);
  const auto steps = static_cast<std::size_t>(cfg.mcmc_steps);

  parallel_for(
      n,
      [&](std::size_t l) {
        if (!duplicate[l]) return;
        auto& state = set.ensemble.particles[l];
        auto& path = set.paths[l];
        for (std::size_t s = 0; s < steps; ++s) {
          RngStream r(rng.seed, {l, static_cast<std::uint64_t>(rng.step), Purpose::jitter,
                                 stage * steps + s});
          NoisePath proposal;
          proposal.reserve(path.size());
          for (const auto& w : path) proposal.push_back(mix_noise(w, model.sample_noise(r), cfg.jitter_rho));

          StateVector candidate;
          double cand_ll = kNegInf;
          try {
            candidate = propagate(model, set.anchors[l], proposal);
            cand_ll = loglik(candidate);
          } catch (const ModelError&) {
            ++failed[l];
            continue;
          }
          if (std::isnan(cand_ll) || cand_ll == kNegInf) {
            ++failed[l];
            continue;
          }
          const double u = r.uniform();
          const bool accept = log_lik[l] == kNegInf ||
                              std::log(u) < phi_cum * (cand_ll - log_lik[l]);
          if (accept) {
            state = std::move(candidate);
            path = std::move(proposal);
            log_lik[l] = cand_ll;
            ++accepted[l];
          }
        }
      },
      ex);

  JitterResult res;
  for (std::size_t l = 0; l < n; ++l) {
    if (!duplicate[l]) continue;
    ++res.duplicates;
    res.proposals += steps;
    res.accepted += accepted[l];
    res.failed += failed[l];
  }
  return res;
}

TemperingTrace assimilate(ParticleSet& set, const ForwardModel& model,
                          const LogLikelihood& loglik, const FilterConfig& cfg,
                          const FilterRng& rng, Execution ex) {
  TemperingTrace trace;
  trace.step = rng.step;
  if (!loglik) return trace;

  cfg.validate();
  set.validate(model);
  const std::size_t n = set.ensemble.size();
  require(n == cfg.n_particles, "ensemble size differs from filter n_particles");
  const double uniform_w = 1.0 / static_cast<double>(n);
  for (double w : set.ensemble.weights)
    require(std::abs(w - uniform_w) <= 1e-12, "assimilate expects a uniformly weighted forecast");

  std::vector<double> ll(n);
  parallel_for(n, [&](std::size_t l) { ll[l] = loglik(set.ensemble.particles[l]); }, ex);

  double phi = 0.0;
  for (std::size_t stage = 0;; ++stage) {
    if (stage >= static_cast<std::size_t>(cfg.max_tempering_iters))
      throw TemperingFailure("tempering did not reach phi = 1 within max_tempering_iters",
                             trace);

    double delta = 0.0;
    try {
      delta = find_temperature(ll, phi, cfg);
    } catch (const DegeneracyError& e) {
      throw TemperingFailure(e.what(), trace);
    }
    const bool last = delta >= 1.0 - phi || phi + delta >= 1.0;
    if (last) {
      // The final increment is the exact remainder, so that the increments
      // telescope to 1 when summed in order.
      delta = 1.0 - phi;
      while (phi + delta > 1.0) delta = std::nextafter(delta, 0.0);
      while (phi + delta < 1.0) delta = std::nextafter(delta, 2.0);
    }

    TemperingStage rec;
    rec.delta_phi = delta;
    const auto w = tempered_weights(ll, delta);
    rec.ess_pre = ess(w);

    RngStream r(rng.seed, {0, static_cast<std::uint64_t>(rng.step), Purpose::resample, stage});
    rec.ancestors = systematic_resample(w, r);
    set.ensemble.particles = gather(set.ensemble.particles, rec.ancestors);
    set.anchors = gather(set.anchors, rec.ancestors);
    set.paths = gather(set.paths, rec.ancestors);
    ll = gather(ll, rec.ancestors);
    set.ensemble.weights.assign(n, uniform_w);
    rec.ess_post = ess(set.ensemble.weights);

    phi = last ? 1.0 : phi + delta;
    rec.phi = phi;

    auto move = duplicate_flags(rec.ancestors);
    const auto dups = static_cast<std::size_t>(std::count(move.begin(), move.end(), 1));
    // Moving only the duplicates leaves the unique particles, which are biased
    // towards low weights, where they are; the mixture is then no longer the
    // tempered posterior.
    if (cfg.jitter_scope == JitterScope::all && dups > 0) move.assign(n, 1);
    const auto jr = jitter_mcmc(set, move, ll, model, loglik, phi, cfg, rng, stage, ex);
    rec.duplicates = dups;
    rec.proposals = jr.proposals;
    rec.accepted = jr.accepted;
    rec.failed = jr.failed;
    trace.stages.push_back(std::move(rec));
    if (last) break;
  }
  return trace;
}

}  // namespace pfsw
