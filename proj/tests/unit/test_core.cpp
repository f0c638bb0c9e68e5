#include <doctest.h>

#include <cmath>
#include <set>

#include "pfsw/core.hpp"
#include "pfsw/error.hpp"
#include "pfsw/parallel.hpp"
#include "pfsw/rng.hpp"

using namespace pfsw;

namespace {
RngStream test_rng(std::uint64_t sub = 0) { return RngStream(12345, {0, 0, Purpose::test, sub}); }
}  // namespace

TEST_CASE("ensemble_mean of two symmetric particles") {
  auto e = Ensemble::uniform({StateVector{0, 0, 0}, StateVector{2, 2, 2}});
  CHECK(ensemble_mean(e) == StateVector{1, 1, 1});
}

TEST_CASE("ensemble_mean with a degenerate weight returns that particle") {
  Ensemble e;
  e.particles = {StateVector{1.5, -2.0, 7.0}, StateVector{9, 9, 9}};
  e.weights = {1.0, 0.0};
  CHECK(ensemble_mean(e) == e.particles[0]);
}

TEST_CASE("ensemble_mean matches reverse-order summation") {
  auto rng = test_rng();
  std::vector<StateVector> ps;
  std::vector<double> raw;
  for (int l = 0; l < 50; ++l) {
    ps.push_back(StateVector{rng.normal(), 10.0 * rng.normal(), 1e3 + rng.normal()});
    raw.push_back(rng.uniform() + 0.01);
  }
  double total = 0.0;
  for (double w : raw) total += w;
  Ensemble e;
  e.particles = ps;
  for (double w : raw) e.weights.push_back(w / total);
  const auto mean = ensemble_mean(e);
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int l = 49; l >= 0; --l) s += e.weights[static_cast<std::size_t>(l)] * ps[static_cast<std::size_t>(l)][k];
    CHECK(mean[k] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("ensemble validation rejects bad input") {
  CHECK_THROWS_AS(Ensemble::uniform({StateVector{1.0}}).validate(), ConfigError);
  auto e = Ensemble::uniform({StateVector{1.0}, StateVector{2.0, 3.0}});
  CHECK_THROWS_AS(e.validate(), ConfigError);
  auto f = Ensemble::uniform({StateVector{1.0}, StateVector{NAN}});
  CHECK_THROWS_AS(f.validate(), ConfigError);
  auto g = Ensemble::uniform({StateVector{1.0}, StateVector{2.0}});
  g.weights = {0.7, 0.4};
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("mix_noise limits") {
  NoiseIncrement w{1.0, -2.0, 3.0}, z{0.5, 0.25, -4.0};
  CHECK(mix_noise(w, z, 1.0) == w);
  CHECK(mix_noise(w, z, 0.0) == z);
  CHECK_THROWS_AS(mix_noise(w, NoiseIncrement{1.0}, 0.5), ConfigError);
  CHECK_THROWS_AS(mix_noise(w, z, 1.5), ConfigError);
  CHECK_THROWS_AS(mix_noise(w, z, -0.1), ConfigError);
}

TEST_CASE("mix_noise preserves the standard normal law") {
  const std::size_t m = 100000;
  auto rw = test_rng(1), rz = test_rng(2);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    NoiseIncrement w{rw.normal()}, z{rz.normal()};
    const double x = mix_noise(w, z, 0.99)[0];
    s += x;
    s2 += x * x;
  }
  const double mean = s / m;
  const double var = s2 / m - mean * mean;
  const double sm = std::sqrt(static_cast<double>(m));
  CHECK(std::abs(mean) < 4.0 / sm);
  CHECK(std::abs(var - 1.0) < 5.0 / sm);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng streams are keyed, not sequenced") {
  RngStream a(7, {3, 4, Purpose::forecast, 0});
  RngStream b(7, {3, 4, Purpose::forecast, 0});
  for (int i = 0; i < 100; ++i) CHECK(a() == b());

  std::set<std::uint64_t> firsts;
  for (auto purpose : {Purpose::truth_init, Purpose::forecast, Purpose::jitter, Purpose::resample})
    for (std::uint64_t p = 0; p < 4; ++p)
      for (std::uint64_t s = 0; s < 4; ++s) firsts.insert(RngStream(7, {p, s, purpose, 0})());
  CHECK(firsts.size() == 64);
}

TEST_CASE("rng uniform lies in [0, 1) with the right mean") {
  auto r = test_rng(3);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  CHECK(std::abs(s / 1e5 - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 1e5));
}

TEST_CASE("pairwise_sum is exact on integers and order-fixed") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  CHECK(pairwise_sum(v) == 499500.0);
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}

TEST_CASE("parallel_for rethrows the lowest-index failure") {
  std::vector<int> hit(100, 0);
  try {
    parallel_for(100, [&](std::size_t i) {
      hit[i] = 1;
      if (i == 70) throw std::runtime_error("70");
      if (i == 30) throw std::runtime_error("30");
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "30");
  }
  int total = 0;
  for (int h : hit) total += h;
  CHECK(total == 100);
}
