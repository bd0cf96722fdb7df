// Continuous relaxations of the allocation problem. Each family replaces h_t by
// a strictly concave function on [0, inf) that agrees with it at integers, so
// the integer optimum lies within m of the continuous one in every coordinate.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/trigamma.hpp>

#include "divrec/allocator.hpp"
#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

namespace {

template <class T>
bool all_models(const Objective& obj) {
  const auto& models = obj.spec().profile.models;
  return std::all_of(models.begin(), models.end(),
                     [](const Distribution& d) { return std::holds_alternative<T>(d); });
}

// Types with p_t = 0 never receive items in the relaxation.
std::vector<bool> positive_types(const Objective& obj) {
  std::vector<bool> active(static_cast<std::size_t>(obj.m()));
  for (int t = 0; t < obj.m(); ++t) active[t] = obj.p(t) > 0.0;
  return active;
}

// Uniform values: for x >= k, h(x) = k - k(k+1) / (2 (x + 1)), so the
// stationarity condition gives x_t + 1 proportional to sqrt(p_t), normalised to
// sum_t x_t = n. Types whose share would be negative are pinned at zero.
std::vector<double> uniform_optimum(const Objective& obj) {
  const int m = obj.m();
  const double n = obj.n();
  std::vector<bool> active = positive_types(obj);
  std::vector<double> x(static_cast<std::size_t>(m), 0.0);
  while (true) {
    double root_sum = 0.0;
    int count = 0;
    for (int t = 0; t < m; ++t) {
      if (active[t]) {
        root_sum += std::sqrt(obj.p(t));
        ++count;
      }
    }
    const double scale = (n + count) / root_sum;
    bool changed = false;
    for (int t = 0; t < m; ++t) {
      x[t] = active[t] ? std::sqrt(obj.p(t)) * scale - 1.0 : 0.0;
      if (active[t] && x[t] < 0.0) {
        active[t] = false;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (obj.k() > 1) {
    for (int t = 0; t < m; ++t) {
      require(x[t] >= obj.k(), ErrorCode::no_closed_form,
              "uniform closed form needs every continuous share above k=" +
                  std::to_string(obj.k()) + ", type " + std::to_string(t + 1) + " gets " +
                  format_double(x[t]));
    }
  }
  return x;
}

// Bernoulli(q_t), k = 1: minimise sum_t p_t (1 - q_t)^x_t. With
// L_t = log(1 / (1 - q_t)), stationarity gives
// x_t = (log(p_t L_t) - log(lambda)) / L_t.
std::vector<double> bernoulli_optimum(const Objective& obj) {
  const int m = obj.m();
  const double n = obj.n();
  std::vector<double> rate(static_cast<std::size_t>(m));
  for (int t = 0; t < m; ++t) {
    const double q = std::get<Bernoulli>(obj.spec().profile.models[t]).q;
    require(q < 1.0, ErrorCode::no_closed_form,
            "bernoulli relaxation needs q < 1 (q = 1 saturates after one item)");
    rate[t] = -std::log1p(-q);
  }
  std::vector<bool> active = positive_types(obj);
  std::vector<double> x(static_cast<std::size_t>(m), 0.0);
  while (true) {
    double num = -n, den = 0.0;
    for (int t = 0; t < m; ++t) {
      if (!active[t]) continue;
      num += std::log(obj.p(t) * rate[t]) / rate[t];
      den += 1.0 / rate[t];
    }
    const double log_lambda = num / den;
    bool changed = false;
    for (int t = 0; t < m; ++t) {
      x[t] = active[t] ? (std::log(obj.p(t) * rate[t]) - log_lambda) / rate[t] : 0.0;
      if (active[t] && x[t] < 0.0) {
        active[t] = false;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return x;
}

// Exponential(lambda_t), k = 1: h_t(x) = (digamma(x + 1) + euler_gamma) / lambda_t
// matches H_a / lambda_t at integers; its derivative is trigamma(x + 1) / lambda_t.
// Solved by bisection on the multiplier.
std::vector<double> exponential_optimum(const Objective& obj) {
  const int m = obj.m();
  const double n = obj.n();
  std::vector<double> weight(static_cast<std::size_t>(m));
  for (int t = 0; t < m; ++t) {
    weight[t] = obj.p(t) / std::get<Exponential>(obj.spec().profile.models[t]).lambda;
  }
  const double trigamma_one = std::numbers::pi * std::numbers::pi / 6.0;

  auto share = [&](int t, double mu) {
    const double w = weight[t];
    if (w * trigamma_one <= mu) return 0.0;
    double lo = 0.0, hi = 2.0 * w / mu + 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (w * boost::math::trigamma(mid + 1.0) > mu) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  auto total = [&](double mu) {
    double s = 0.0;
    for (int t = 0; t < m; ++t) s += share(t, mu);
    return s;
  };

  const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);
  double log_lo = std::log(wsum / (4.0 * (n + m)));
  double log_hi = std::log(*std::max_element(weight.begin(), weight.end()) * trigamma_one);
  while (total(std::exp(log_lo)) < n) log_lo -= 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    if (total(std::exp(mid)) > n) {
      log_lo = mid;
    } else {
      log_hi = mid;
    }
  }
  const double mu = std::exp(0.5 * (log_lo + log_hi));
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int t = 0; t < m; ++t) x[t] = share(t, mu);
  return x;
}

}  // namespace

std::vector<double> continuous_optimum(const Objective& obj) {
  if (obj.m() == 1) return {static_cast<double>(obj.n())};
  if (all_models<Uniform>(obj)) return uniform_optimum(obj);
  if (all_models<Bernoulli>(obj) && obj.k() == 1) return bernoulli_optimum(obj);
  if (all_models<Exponential>(obj) && obj.k() == 1) return exponential_optimum(obj);
  fail(ErrorCode::no_closed_form,
       "no continuous closed form for this spec (supported: uniform any k, "
       "bernoulli k=1, exponential k=1)");
}

}  // namespace divrec
