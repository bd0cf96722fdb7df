#include <algorithm>
#include <cmath>

#include "binomial.hpp"
#include "divrec/error.hpp"
#include "divrec/objective.hpp"

namespace divrec {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

ValueCurve sized(int n) {
  ValueCurve c;
  c.headroom.assign(static_cast<std::size_t>(n) + 1, 0.0);
  c.gain.assign(static_cast<std::size_t>(n), 0.0);
  return c;
}

// Straight line h(a) = a * slope.
ValueCurve linear_curve(double slope, int n) {
  ValueCurve c = sized(n);
  for (int a = 0; a <= n; ++a) c.headroom[a] = -(a * slope);
  std::fill(c.gain.begin(), c.gain.end(), slope);
  return c;
}

ValueCurve uniform_curve(int k, int n) {
  ValueCurve c = sized(n);
  const double kk = k;
  c.ceiling = kk;
  for (int a = 0; a <= n; ++a) {
    c.headroom[a] = a <= k ? kk - 0.5 * a : kk * (kk + 1.0) / (2.0 * (a + 1.0));
  }
  for (int a = 0; a < n; ++a) {
    c.gain[a] = a + 1 <= k ? 0.5 : kk * (kk + 1.0) / (2.0 * (a + 1.0) * (a + 2.0));
  }
  return c;
}

ValueCurve exponential_curve(double lambda, int k, int n) {
  ValueCurve c = sized(n);
  for (int a = 0; a < n; ++a) {
    // Adding an item to a >= k draws raises the top-k sum by k / (lambda (a+1)).
    c.gain[a] = a + 1 <= k ? 1.0 / lambda : k / (lambda * (a + 1.0));
  }
  double h = 0.0;
  for (int a = 1; a <= n; ++a) {
    h += c.gain[a - 1];
    c.headroom[a] = -h;
  }
  return c;
}

// Top-k of a finite discrete law, kept as headroom below k * v_max. For
// a >= k the shortfall of rank a - r is sum_j gap_j * P[#draws above v_j <= r].
ValueCurve finite_discrete_curve(const FiniteDiscrete& f, int k, int n) {
  ValueCurve c = sized(n);
  const double v_max = f.values.front();
  c.ceiling = k * v_max;
  double mean = 0.0;
  for (std::size_t j = 0; j < f.values.size(); ++j) mean += f.values[j] * f.probs[j];

  // gap_j and P[X > v_j] for ascending support points below the maximum.
  std::vector<double> gaps, above;
  double tail = 0.0;
  for (std::size_t j = 0; j + 1 < f.values.size(); ++j) {
    tail += f.probs[j];
    gaps.push_back(f.values[j] - f.values[j + 1]);
    above.push_back(tail);  // P[X > values[j+1]]
  }

  for (int a = 0; a <= n; ++a) {
    if (a < k) {
      c.headroom[a] = c.ceiling - a * mean;
      continue;
    }
    double shortfall = 0.0;
    for (std::size_t j = 0; j < gaps.size(); ++j) {
      // sum_{r<k} P[B <= r] = sum_{t<k} (k - t) P[B = t]
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += (k - t) * detail::binomial_pmf(a, t, above[j]);
      shortfall += gaps[j] * s;
    }
    c.headroom[a] = shortfall;
  }
  for (int a = 0; a < n; ++a) c.gain[a] = c.headroom[a] - c.headroom[a + 1];
  return c;
}

// Independent Bernoulli items with success probabilities q_1 >= q_2 >= ...;
// h(a) = E[min(k, S_a)] with S_a the number of successes among the first a.
ValueCurve bernoulli_curve(const std::vector<double>& q, int k, int n) {
  if (k >= n) {
    ValueCurve c = sized(n);
    double h = 0.0;
    for (int a = 0; a < n; ++a) {
      c.gain[a] = q[a];
      h += q[a];
      c.headroom[a + 1] = -h;
    }
    return c;
  }
  ValueCurve c = sized(n);
  c.ceiling = k;
  if (k == 1) {
    double log_miss = 0.0;
    for (int a = 0; a <= n; ++a) {
      c.headroom[a] = a == 0 ? 1.0 : std::exp(log_miss);
      if (a < n) {
        c.gain[a] = c.headroom[a] * q[a];
        log_miss += std::log1p(-q[a]);
      }
    }
    return c;
  }
  // Truncated Poisson-binomial: pmf[j] = P[S_a = j] for j < k.
  std::vector<double> pmf(static_cast<std::size_t>(k), 0.0);
  pmf[0] = 1.0;
  for (int a = 0; a <= n; ++a) {
    double below = 0.0, headroom = 0.0;
    for (int j = 0; j < k; ++j) {
      below += pmf[j];
      headroom += (k - j) * pmf[j];
    }
    c.headroom[a] = headroom;
    if (a == n) break;
    const double qa = q[a];
    c.gain[a] = qa * below;  // E[min(k,S)] rises only when S_a < k
    for (int j = k - 1; j >= 1; --j) pmf[j] = pmf[j] * (1.0 - qa) + pmf[j - 1] * qa;
    pmf[0] *= 1.0 - qa;
  }
  return c;
}

ValueCurve table_curve(const OrderStatTable& table, const Distribution& dist, int k, int n) {
  if (k >= n) return linear_curve(mean(dist), n);
  require(table.max_a() >= n, ErrorCode::coverage,
          "order-stat table covers a <= " + std::to_string(table.max_a()) + " but n = " +
              std::to_string(n));
  ValueCurve c = sized(n);
  for (int a = 1; a <= n; ++a) {
    const int top = std::min(k, a);
    double h = 0.0;
    for (int i = a - top + 1; i <= a; ++i) h += table.mu(i, a);
    c.headroom[a] = -h;
  }
  for (int a = 0; a < n; ++a) c.gain[a] = c.headroom[a] - c.headroom[a + 1];
  return c;
}

}  // namespace

ValueCurve build_value_curve(const Distribution& dist, int k, int n,
                             const OrderStatTable* table) {
  validate(dist);
  require(n >= 0, ErrorCode::invalid_argument, "n must be nonnegative");
  require(k >= 1, ErrorCode::invalid_argument, "k must be at least 1");
  if (n == 0) return sized(0);

  if (std::holds_alternative<Bernoulli>(dist) || std::holds_alternative<DecayingBernoulli>(dist)) {
    return bernoulli_curve(success_sequence(dist, n), k, n);
  }
  if (table != nullptr) {
    require(to_string(table->dist()) == to_string(dist), ErrorCode::invalid_argument,
            "order-stat table was built for " + to_string(table->dist()) + ", not " +
                to_string(dist));
    return table_curve(*table, dist, k, n);
  }
  if (k >= n) return linear_curve(mean(dist), n);
  return std::visit(
      overloaded{
          [&](const Uniform&) { return uniform_curve(k, n); },
          [&](const Exponential& e) { return exponential_curve(e.lambda, k, n); },
          [&](const FiniteDiscrete& f) { return finite_discrete_curve(f, k, n); },
          [&](const auto&) -> ValueCurve {
            fail(ErrorCode::no_closed_form,
                 "no closed-form order statistics for " + to_string(dist) +
                     "; supply an order-stat table");
          },
      },
      dist);
}

double h_bernoulli_top1(double q, int a) {
  require(a >= 0, ErrorCode::out_of_range, "item count must be nonnegative");
  require(q >= 0.0 && q <= 1.0, ErrorCode::invalid_argument, "q must lie in [0, 1]");
  if (a == 0) return 0.0;
  return -std::expm1(a * std::log1p(-q));
}

double h_bernoulli_sum(std::span<const double> q, int a) {
  require(a >= 0 && static_cast<std::size_t>(a) <= q.size(), ErrorCode::out_of_range,
          "item count exceeds the success-probability sequence");
  double total = 0.0;
  for (int i = 0; i < a; ++i) total += q[static_cast<std::size_t>(i)];
  return total;
}

double h_decaying_top1(double c, double d, double alpha, int a) {
  require(a >= 0, ErrorCode::out_of_range, "item count must be nonnegative");
  const DecayingBernoulli dist{c, d, alpha};
  validate(Distribution{dist});
  double log_miss = 0.0;
  for (int i = 1; i <= a; ++i) log_miss += std::log1p(-success_probability(dist, i));
  return -std::expm1(log_miss);
}

}  // namespace divrec
