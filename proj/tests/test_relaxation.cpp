#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "divrec/allocator.hpp"
#include "divrec/error.hpp"

using namespace divrec;

namespace {

ObjectiveSpec spec_of(std::vector<double> p, std::vector<Distribution> models, int n, int k) {
  return make_spec(make_profile(std::move(p), std::move(models)), n, k);
}

// Trigamma via the recurrence psi1(z) = psi1(z + 1) + 1/z^2 and the asymptotic
// series once z is large.
double trigamma_oracle(double z) {
  double acc = 0.0;
  while (z < 20.0) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  const double iz = 1.0 / z, iz2 = iz * iz;
  return acc + iz + iz2 / 2 + iz2 * iz / 6 - iz2 * iz2 * iz / 30 + iz2 * iz2 * iz2 * iz / 42;
}

double sum(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("uniform continuous optimum is normalised to n") {
  const Objective obj(spec_of({0.7, 0.3}, {uniform()}, 10, 1));
  const auto x = continuous_optimum(obj);
  CHECK(sum(x) == doctest::Approx(10.0));
  CHECK((x[0] + 1) / (x[1] + 1) == doctest::Approx(std::sqrt(0.7 / 0.3)));
  const auto r = solve_relaxed_rounded(obj);
  CHECK(r.relaxed_optimum == x);
  for (int t = 0; t < 2; ++t) CHECK(std::abs(r.allocation.counts[t] - x[t]) <= 2.0);
  CHECK(r.allocation.objective_value == solve_brute_force(obj).allocation.objective_value);
}

TEST_CASE("single type") {
  const Objective obj(spec_of({1.0}, {beta(2, 2)}, 7, 7));
  CHECK(continuous_optimum(obj) == std::vector<double>{7.0});
  CHECK(solve_relaxed_rounded(obj).allocation.counts == std::vector<int>{7});
}

TEST_CASE("stationarity of the continuous optima") {
  SUBCASE("uniform, k = 3: p_t k(k+1)/(2(x+1)^2) equal across types") {
    const Objective obj(spec_of({0.5, 0.3, 0.2}, {uniform()}, 90, 3));
    const auto x = continuous_optimum(obj);
    CHECK(sum(x) == doctest::Approx(90.0));
    const double g0 = 0.5 / ((x[0] + 1) * (x[0] + 1));
    CHECK(0.3 / ((x[1] + 1) * (x[1] + 1)) == doctest::Approx(g0));
    CHECK(0.2 / ((x[2] + 1) * (x[2] + 1)) == doctest::Approx(g0));
  }
  SUBCASE("Bernoulli, k = 1: p_t L_t (1-q_t)^x_t equal across types") {
    const std::vector<double> p = {0.6, 0.4}, q = {0.3, 0.6};
    const Objective obj(spec_of(p, {bernoulli(q[0]), bernoulli(q[1])}, 25, 1));
    const auto x = continuous_optimum(obj);
    CHECK(sum(x) == doctest::Approx(25.0));
    auto marginal = [&](int t) {
      const double L = -std::log(1 - q[t]);
      return p[t] * L * std::pow(1 - q[t], x[t]);
    };
    CHECK(marginal(0) == doctest::Approx(marginal(1)).epsilon(1e-9));
  }
  SUBCASE("exponential, k = 1: p_t psi1(x_t + 1) / lambda_t equal across types") {
    const std::vector<double> p = {0.5, 0.3, 0.2}, lam = {1.0, 0.5, 2.0};
    const Objective obj(
        spec_of(p, {exponential(lam[0]), exponential(lam[1]), exponential(lam[2])}, 40, 1));
    const auto x = continuous_optimum(obj);
    CHECK(sum(x) == doctest::Approx(40.0).epsilon(1e-9));
    const double g0 = p[0] * trigamma_oracle(x[0] + 1) / lam[0];
    for (int t = 1; t < 3; ++t) {
      CHECK(p[t] * trigamma_oracle(x[t] + 1) / lam[t] == doctest::Approx(g0).epsilon(1e-7));
    }
  }
  SUBCASE("inactive types sit at zero") {
    const Objective obj(spec_of({0.98, 0.02}, {uniform()}, 3, 1));
    const auto x = continuous_optimum(obj);
    CHECK(x[1] == 0.0);
    CHECK(x[0] == doctest::Approx(3.0));
  }
}

TEST_CASE("Bernoulli shares follow 1/log(1/(1-q)) for large n") {
  const Objective obj(spec_of({0.7, 0.3}, {bernoulli(0.5), bernoulli(0.1)}, 3000, 1));
  const auto r = solve_relaxed_rounded(obj);
  const double w1 = 1 / std::log(2.0), w2 = 1 / std::log(10.0 / 9.0);
  const double share = w1 / (w1 + w2);
  CHECK(std::abs(r.allocation.counts[0] - share * 3000) < 15.0);
  CHECK(r.allocation.objective_value == solve_greedy(obj).allocation.objective_value);
}

TEST_CASE("rounding stays within m of the continuous optimum and is optimal") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + trial % 2;
    const int n = 5 + trial % 30;
    std::vector<double> p(m);
    double s = 0;
    for (double& v : p) s += (v = unit(rng));
    for (double& v : p) v /= s;
    p[m - 1] = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
    std::vector<Distribution> models;
    int k = 1;
    for (int t = 0; t < m; ++t) {
      switch (trial % 3) {
        case 0: models.push_back(uniform()); break;
        case 1: models.push_back(bernoulli(unit(rng))); break;
        default: models.push_back(exponential(0.5 + unit(rng))); break;
      }
    }
    const Objective obj(spec_of(p, models, n, k));
    const auto r = solve_relaxed_rounded(obj);
    CAPTURE(trial);
    for (int t = 0; t < m; ++t) CHECK(std::abs(r.allocation.counts[t] - r.relaxed_optimum[t]) <= m);
    CHECK(r.allocation.objective_value == solve_brute_force(obj).allocation.objective_value);
  }
}

TEST_CASE("unsupported relaxations") {
  CHECK(code_of([] { continuous_optimum(Objective(spec_of({0.5, 0.5}, {finite_discrete({1, 0}, {0.5, 0.5})}, 5, 1))); }) ==
        ErrorCode::no_closed_form);
  CHECK(code_of([] { continuous_optimum(Objective(spec_of({0.5, 0.5}, {exponential(1)}, 5, 2))); }) ==
        ErrorCode::no_closed_form);
  CHECK(code_of([] { continuous_optimum(Objective(spec_of({0.5, 0.5}, {bernoulli(1.0)}, 5, 1))); }) ==
        ErrorCode::no_closed_form);
  // k > 1 needs every continuous share above k
  CHECK(code_of([] { continuous_optimum(Objective(spec_of({0.9, 0.1}, {uniform()}, 12, 5))); }) ==
        ErrorCode::no_closed_form);
  CHECK_NOTHROW(continuous_optimum(Objective(spec_of({0.6, 0.4}, {uniform()}, 60, 5))));
}
