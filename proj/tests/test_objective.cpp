#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "divrec/error.hpp"
#include "divrec/objective.hpp"

using namespace divrec;

namespace {

// E[min(k, S)] for independent Bernoulli(q_i), by enumerating all outcomes.
double enumerate_bernoulli_topk(const std::vector<double>& q, int k) {
  const int a = static_cast<int>(q.size());
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << a); ++mask) {
    double w = 1.0;
    int s = 0;
    for (int i = 0; i < a; ++i) {
      const bool hit = mask >> i & 1u;
      w *= hit ? q[i] : 1.0 - q[i];
      s += hit;
    }
    total += w * std::min(k, s);
  }
  return total;
}

// Expected sum of the k largest of a draws from a finite law, by enumeration.
double enumerate_discrete_topk(const std::vector<double>& v, const std::vector<double>& pr, int k,
                               int a) {
  const int s = static_cast<int>(v.size());
  std::vector<int> idx(a, 0);
  double total = 0.0;
  while (true) {
    std::vector<double> xs;
    double w = 1.0;
    for (int j : idx) {
      xs.push_back(v[j]);
      w *= pr[j];
    }
    std::sort(xs.rbegin(), xs.rend());
    double top = 0.0;
    for (int j = 0; j < std::min(k, a); ++j) top += xs[j];
    total += w * top;
    int pos = 0;
    while (pos < a && ++idx[pos] == s) idx[pos++] = 0;
    if (pos == a) break;
  }
  return total;
}

ObjectiveSpec spec_of(std::vector<double> p, std::vector<Distribution> models, int n, int k) {
  return make_spec(make_profile(std::move(p), std::move(models)), n, k);
}

}  // namespace

TEST_CASE("h from order statistics") {
  const auto u = spec_of({1.0}, {uniform()}, 3, 2);
  CHECK(h_topk(u, 0, 3) == doctest::Approx(1.25));
  CHECK(h_topk(u, 0, 0) == 0.0);
  const auto e = spec_of({1.0}, {exponential(1.0)}, 3, 1);
  CHECK(h_topk(e, 0, 3) == doctest::Approx(1.0 + 0.5 + 1.0 / 3.0));
  CHECK(h_topk(spec_of({1.0}, {exponential(1.0)}, 5, 5), 0, 0) == 0.0);
  CHECK_THROWS_AS(h_topk(u, 0, 4), Error);
}

TEST_CASE("Bernoulli and decaying closed forms") {
  CHECK(h_bernoulli_top1(0.5, 2) == doctest::Approx(0.75));
  CHECK(h_bernoulli_top1(0.3, 0) == 0.0);
  CHECK(h_bernoulli_top1(0.4, 3) == doctest::Approx(0.784));

  const std::vector<double> flat(5, 0.4);
  CHECK(h_bernoulli_sum(flat, 5) == doctest::Approx(2.0));
  CHECK(h_bernoulli_sum(flat, 0) == 0.0);
  const auto q = success_sequence(decaying_bernoulli(1, 1, 1), 2);
  CHECK(h_bernoulli_sum(q, 2) == doctest::Approx(0.8333333333));

  CHECK(h_decaying_top1(1, 1, 1, 0) == 0.0);
  CHECK(h_decaying_top1(0.5, 0, 0, 3) == doctest::Approx(0.875));
  CHECK(h_decaying_top1(1, 1, 1, 2) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("value curves match the scalar helpers") {
  const auto b = build_value_curve(bernoulli(0.4), 1, 10);
  for (int a = 0; a <= 10; ++a) CHECK(b.h(a) == doctest::Approx(h_bernoulli_top1(0.4, a)));
  const auto d = build_value_curve(decaying_bernoulli(1, 1, 0.5), 1, 10);
  for (int a = 0; a <= 10; ++a) CHECK(d.h(a) == doctest::Approx(h_decaying_top1(1, 1, 0.5, a)));
  const auto s = build_value_curve(decaying_bernoulli(1, 1, 2), 10, 10);
  const auto qs = success_sequence(decaying_bernoulli(1, 1, 2), 10);
  for (int a = 0; a <= 10; ++a) CHECK(s.h(a) == doctest::Approx(h_bernoulli_sum(qs, a)));
}

TEST_CASE("truncated Poisson-binomial matches enumeration") {
  const Distribution d = decaying_bernoulli(0.9, 0.5, 0.7);
  for (int k : {2, 3, 5}) {
    const auto c = build_value_curve(d, k, 12);
    for (int a = 0; a <= 12; ++a) {
      CAPTURE(k);
      CAPTURE(a);
      CHECK(c.h(a) == doctest::Approx(enumerate_bernoulli_topk(success_sequence(d, a), k))
                          .epsilon(1e-12));
      if (a < 12) CHECK(c.gain[a] == doctest::Approx(c.h(a + 1) - c.h(a)).epsilon(1e-9));
    }
  }
}

TEST_CASE("finite discrete top-k matches enumeration") {
  const std::vector<double> v = {2.0, 0.5, 0.0};
  const std::vector<double> pr = {0.1, 0.6, 0.3};
  for (int k : {1, 2, 3}) {
    const auto c = build_value_curve(finite_discrete(v, pr), k, 6);
    for (int a = 0; a <= 6; ++a) {
      CHECK(c.h(a) == doctest::Approx(enumerate_discrete_topk(v, pr, k, a)).epsilon(1e-12));
    }
  }
}

TEST_CASE("objective evaluation") {
  const auto spec = spec_of({0.7, 0.3}, {bernoulli(0.5)}, 4, 1);
  const std::vector<int> a = {3, 1};
  CHECK(eval_objective(spec, a) == doctest::Approx(0.7625));

  const auto one = spec_of({1.0, 0.0, 0.0}, {exponential(1.0)}, 6, 2);
  const std::vector<int> all_first = {6, 0, 0};
  CHECK(eval_objective(one, all_first) == doctest::Approx(h_topk(one, 0, 6)));

  const auto sym = spec_of({0.5, 0.5}, {uniform()}, 7, 2);
  const std::vector<int> ab = {5, 2}, ba = {2, 5};
  CHECK(eval_objective(sym, ab) == eval_objective(sym, ba));

  const std::vector<int> wrong_sum = {2, 1}, wrong_len = {4};
  CHECK_THROWS_AS(eval_objective(spec, wrong_sum), Error);
  CHECK_THROWS_AS(eval_objective(spec, wrong_len), Error);
}

TEST_CASE("permuting types leaves the objective unchanged") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p = {unit(rng), unit(rng), unit(rng)};
    const double s = p[0] + p[1] + p[2];
    for (double& x : p) x /= s;
    p[2] = 1.0 - p[0] - p[1];
    std::vector<Distribution> models = {bernoulli(unit(rng)), bernoulli(unit(rng)),
                                        bernoulli(unit(rng))};
    const int n = 12;
    std::vector<int> counts = {3, 5, 4};
    const auto base = spec_of(p, models, n, 2);
    std::vector<int> perm = {2, 0, 1};
    std::vector<double> pp(3);
    std::vector<Distribution> mp(3);
    std::vector<int> cp(3);
    for (int t = 0; t < 3; ++t) {
      pp[t] = p[perm[t]];
      mp[t] = models[perm[t]];
      cp[t] = counts[perm[t]];
    }
    TypeProfile profile{pp, mp};
    const auto permuted = make_spec(profile, n, 2);
    CHECK(eval_objective(base, counts) == eval_objective(permuted, cp));
  }
}

TEST_CASE("h is nondecreasing, linear below k, concave where it should be") {
  for (const Distribution& d : {uniform(), exponential(2.0), finite_discrete({1, 0}, {0.3, 0.7}),
                                bernoulli(0.3), decaying_bernoulli(1, 1, 0.5)}) {
    for (int k : {1, 3, 8}) {
      const auto c = build_value_curve(d, k, 30);
      for (int a = 0; a < 30; ++a) CHECK(c.h(a + 1) >= c.h(a));
      if (is_iid(d)) {
        for (int a = 0; a <= k; ++a) CHECK(c.h(a) == doctest::Approx(a * mean(d)));
      }
    }
  }
  for (const Distribution& d : {bernoulli(0.2), decaying_bernoulli(1, 1, 2)}) {
    const auto c = build_value_curve(d, 1, 40);
    for (int a = 0; a + 1 < 40; ++a) CHECK(c.gain[a + 1] < c.gain[a]);
  }
}

TEST_CASE("saturating curves keep their headroom") {
  const auto c = build_value_curve(decaying_bernoulli(1, 1, 0.5), 1, 5000);
  CHECK(c.headroom[5000] > 0.0);
  CHECK(c.headroom[5000] < 1e-50);
  CHECK(c.gain[4999] > 0.0);
}

TEST_CASE("k = n uses linearity for any i.i.d. law") {
  const auto spec = spec_of({0.6, 0.4}, {pareto(2.0)}, 5, 5);
  CHECK(h_topk(spec, 0, 5) == doctest::Approx(5 * 2.0));
  CHECK_THROWS_AS(spec_of({0.6, 0.4}, {pareto(2.0)}, 5, 4), Error);
}

TEST_CASE("table-backed specs") {
  TableOptions opt;
  opt.samples = 2000;
  const auto table = build_order_stat_table(beta(2, 3), 6, opt);
  const auto spec = make_spec(make_profile({0.5, 0.5}, {beta(2, 3)}), 6, 2, {table});
  double expect = table.mu(6, 6) + table.mu(5, 6);
  CHECK(h_topk(spec, 1, 6) == doctest::Approx(expect));
  try {
    make_spec(make_profile({0.5, 0.5}, {beta(2, 3)}), 8, 2, {table});
    FAIL("expected coverage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::coverage);
  }
  CHECK_THROWS_AS(make_spec(make_profile({1.0}, {beta(2, 2)}), 6, 2, {table}), Error);
}

TEST_CASE("likelihood validation") {
  CHECK_THROWS_AS(make_profile({0.5, 0.6}, {uniform()}), Error);
  CHECK_THROWS_AS(make_profile({1.1, -0.1}, {uniform()}), Error);
  CHECK_THROWS_AS(make_profile({0.5, 0.5}, {uniform(), uniform(), uniform()}), Error);
  CHECK_NOTHROW(make_profile({0.5, 0.5 + 1e-13}, {uniform()}));
  CHECK_THROWS_AS(spec_of({1.0}, {uniform()}, 3, 4), Error);
  CHECK_THROWS_AS(spec_of({1.0}, {uniform()}, 3, 0), Error);
}

TEST_CASE("clamped success probabilities raise a warning") {
  const Objective obj(spec_of({0.5, 0.5}, {decaying_bernoulli(3, 0, 1)}, 5, 1));
  CHECK(obj.warnings().size() == 2);
  const Objective quiet(spec_of({0.5, 0.5}, {decaying_bernoulli(1, 1, 1)}, 5, 1));
  CHECK(quiet.warnings().empty());
}

TEST_CASE("shared objectives are memoised and safe to build concurrently") {
  const auto spec = spec_of({0.2, 0.8}, {exponential(1.0)}, 50, 3);
  CHECK(objective_for(spec) == objective_for(spec));
  std::vector<double> seen(8);
  {
    std::vector<std::jthread> threads;
    for (int w = 0; w < 8; ++w) {
      threads.emplace_back([&, w] {
        const auto s = spec_of({0.3, 0.7}, {uniform()}, 40 + w % 2, 2);
        const std::vector<int> c = {20, 20 + w % 2};
        seen[w] = eval_objective(s, c);
      });
    }
  }
  for (int w = 2; w < 8; ++w) CHECK(seen[w] == seen[w % 2]);
}

TEST_CASE("two-type preference variant") {
  MultiPrefSpec s{0.0, 0.0, 1.0, 0.3, 6};
  for (int a1 = 0; a1 <= 6; ++a1) CHECK(eval_multipref(s, a1) == doctest::Approx(std::pow(0.7, 6)));
  CHECK(eval_multipref({0.5, 0.5, 0.0, 0.5, 2}, 1) == doctest::Approx(0.5));
  const MultiPrefSpec sure{0.4, 0.4, 0.2, 1.0, 4};
  CHECK(eval_multipref(sure, 2) == 0.0);
  CHECK(eval_multipref(sure, 0) == doctest::Approx(0.4));
  CHECK(eval_multipref(sure, 4) == doctest::Approx(0.4));
  CHECK_THROWS_AS(eval_multipref({0.5, 0.4, 0.0, 0.5, 2}, 1), Error);
  CHECK_THROWS_AS(eval_multipref({0.5, 0.5, 0.0, 0.5, 2}, 3), Error);
}
