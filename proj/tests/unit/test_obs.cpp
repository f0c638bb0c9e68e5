#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "pfsw/error.hpp"
#include "pfsw/obs.hpp"

using namespace pfsw;

namespace {

ObsModel model(ObsOperator op, double sd, std::vector<std::size_t> idx = {}) {
  return ObsModel{op, sd, std::move(idx)};
}

// Product of univariate normal densities, evaluated directly.
double direct_log_density(const std::vector<double>& z, const std::vector<double>& hx, double sd) {
  double p = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = (z[i] - hx[i]) / sd;
    p *= std::exp(-0.5 * r * r) / (sd * std::sqrt(2.0 * std::numbers::pi));
  }
  return std::log(p);
}

}  // namespace

TEST_CASE("operator examples") {
  CHECK(apply_h(StateVector{1, 2, 3}, model(ObsOperator::identity, 1)) == std::vector<double>{1, 2, 3});
  CHECK(apply_h(StateVector{1, -2, 3}, model(ObsOperator::square_all, 1)) == std::vector<double>{1, 4, 9});
  CHECK(apply_h(StateVector{2, -2, 5}, model(ObsOperator::square_first, 1)) == std::vector<double>{4, -2, 5});
  CHECK(apply_h(StateVector{7, 8, 9, 10}, model(ObsOperator::select, 1, {3, 0})) == std::vector<double>{10, 7});
  CHECK_THROWS_AS(apply_h(StateVector{1, 2}, model(ObsOperator::select, 1, {2})), ConfigError);
}

TEST_CASE("observation model validation") {
  CHECK_THROWS_AS(model(ObsOperator::identity, 0.0).validate(3), ConfigError);
  CHECK_THROWS_AS(model(ObsOperator::select, 1.0, {1, 1}).validate(3), ConfigError);
  CHECK_THROWS_AS(model(ObsOperator::select, 1.0, {3}).validate(3), ConfigError);
  CHECK_NOTHROW(model(ObsOperator::select, 1.0, {0, 2}).validate(3));
  CHECK(model(ObsOperator::select, 1.0, {0, 2}).obs_dim(3) == 2);
  CHECK(obs_operator_from_string(to_string(ObsOperator::square_first)) == ObsOperator::square_first);
  CHECK_THROWS_AS(obs_operator_from_string("cube"), ConfigError);
}

TEST_CASE("property: squared operators cannot see the sign") {
  RngStream r(1, {0, 0, Purpose::test, 0});
  for (int k = 0; k < 100; ++k) {
    StateVector x{10 * r.normal(), 10 * r.normal(), 10 * r.normal()};
    StateVector m{-x[0], -x[1], -x[2]};
    CHECK(apply_h(x, model(ObsOperator::square_all, 1)) == apply_h(m, model(ObsOperator::square_all, 1)));
    StateVector f{-x[0], x[1], x[2]};
    CHECK(apply_h(x, model(ObsOperator::square_first, 1)) == apply_h(f, model(ObsOperator::square_first, 1)));
  }
}

TEST_CASE("synthesize_obs is keyed and unbiased") {
  const StateVector truth{1.5, -2.0, 3.0};
  const auto m = model(ObsOperator::square_first, 0.5);
  RngStream a(4, {0, 7, Purpose::observation, 0}), b(4, {0, 7, Purpose::observation, 0});
  CHECK(synthesize_obs(truth, m, 7, a).values == synthesize_obs(truth, m, 7, b).values);

  const auto hx = apply_h(truth, m);
  const int n = 100000;
  std::vector<double> s(3, 0.0);
  RngStream r(4, {0, 0, Purpose::test, 0});
  for (int k = 0; k < n; ++k) {
    const auto z = synthesize_obs(truth, m, 0, r);
    for (std::size_t i = 0; i < 3; ++i) s[i] += z.values[i];
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(s[i] / n - hx[i]) < 4.0 * 0.5 / std::sqrt(n));
}

TEST_CASE("synthesize_obs with vanishing error returns H(truth)") {
  const StateVector truth{1.5, -2.0, 3.0};
  const auto m = model(ObsOperator::square_all, 1e-300);
  RngStream r(4, {0, 0, Purpose::test, 1});
  CHECK(synthesize_obs(truth, m, 3, r).values == apply_h(truth, m));
}

TEST_CASE("log_likelihood closed forms") {
  const auto m = model(ObsOperator::identity, 1.0);
  CHECK(log_likelihood(StateVector{0.0}, {0, {2.0}}, m) == doctest::Approx(-2.9189).epsilon(1e-4));
  const auto m3 = model(ObsOperator::identity, 0.3);
  CHECK(log_likelihood(StateVector{1, 2, 3}, {0, {1, 2, 3}}, m3) ==
        doctest::Approx(-1.5 * std::log(2.0 * std::numbers::pi * 0.09)));
  CHECK_THROWS_AS(log_likelihood(StateVector{1, 2, 3}, {0, {1, 2}}, m3), ConfigError);
}

TEST_CASE("log_likelihood matches direct density evaluation") {
  RngStream r(9, {0, 0, Purpose::test, 0});
  for (auto op : {ObsOperator::identity, ObsOperator::square_first, ObsOperator::square_all}) {
    for (int k = 0; k < 20; ++k) {
      const double sd = 0.5 + r.uniform();
      const auto m = model(op, sd);
      StateVector x{r.normal(), r.normal(), r.normal()};
      auto hx = apply_h(x, m);
      std::vector<double> z = hx;
      for (double& v : z) v += sd * r.normal();
      CHECK(std::abs(log_likelihood(x, {0, z}, m) - direct_log_density(z, hx, sd)) < 1e-12);
    }
  }
}

TEST_CASE("property: the likelihood peaks where H(x) = z") {
  RngStream r(10, {0, 0, Purpose::test, 0});
  for (auto op : {ObsOperator::identity, ObsOperator::square_first, ObsOperator::square_all}) {
    const auto m = model(op, 0.7);
    for (int k = 0; k < 30; ++k) {
      StateVector x{3 * r.normal(), 3 * r.normal(), 3 * r.normal()};
      const Observation z{0, apply_h(x, m)};
      const double top = log_likelihood(x, z, m);
      CHECK(top == doctest::Approx(-1.5 * std::log(2.0 * std::numbers::pi * 0.49)));
      StateVector y = x;
      y[k % 3] += 0.1 * (1.0 + r.uniform());
      CHECK(log_likelihood(y, z, m) < top);
    }
  }
  const auto sel = model(ObsOperator::select, 0.7, {1});
  StateVector x{1, 2, 3};
  CHECK(log_likelihood(x, {0, {2.0}}, sel) > log_likelihood(StateVector{1, 2.2, 3}, {0, {2.0}}, sel));
}

TEST_CASE("average log-likelihood of the truth under its own observations") {
  const StateVector truth{0.4, -1.1, 2.0};
  const double sd = 0.8;
  const auto m = model(ObsOperator::identity, sd);
  const int n = 10000;
  double s = 0.0, s2 = 0.0;
  RngStream r(11, {0, 0, Purpose::test, 0});
  for (int k = 0; k < n; ++k) {
    const double l = log_likelihood(truth, synthesize_obs(truth, m, 0, r), m);
    s += l;
    s2 += l * l;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  const double expect = -1.5 - 1.5 * std::log(2.0 * std::numbers::pi * sd * sd);
  CHECK(std::abs(mean - expect) < 3.0 * se);
}

TEST_CASE("choose_sites draws distinct candidates reproducibly") {
  std::vector<std::size_t> cand(50);
  for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = 100 + i;
  RngStream a(3, {0, 0, Purpose::obs_sites, 0}), b(3, {0, 0, Purpose::obs_sites, 0});
  const auto s = choose_sites(cand, 20, a);
  CHECK(s == choose_sites(cand, 20, b));
  std::set<std::size_t> uniq(s.begin(), s.end());
  CHECK(uniq.size() == 20);
  for (auto i : s) CHECK((i >= 100 && i < 150));
  CHECK_THROWS_AS(choose_sites(cand, 51, a), ConfigError);
}
