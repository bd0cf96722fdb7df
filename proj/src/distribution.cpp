#include "divrec/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kProbTolerance = 1e-12;

void check_positive(double x, const char* what) {
  require(std::isfinite(x) && x > 0.0, ErrorCode::invalid_argument,
          std::string(what) + " must be positive and finite, got " + format_double(x));
}

void check_nonnegative(double x, const char* what) {
  require(std::isfinite(x) && x >= 0.0, ErrorCode::invalid_argument,
          std::string(what) + " must be nonnegative and finite, got " + format_double(x));
}

}  // namespace

Distribution finite_discrete(std::vector<double> values, std::vector<double> probs) {
  require(!values.empty() && values.size() == probs.size(), ErrorCode::invalid_argument,
          "finite discrete: values and probs must be non-empty and of equal length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  FiniteDiscrete out;
  for (std::size_t idx : order) {
    require(std::isfinite(values[idx]), ErrorCode::invalid_argument,
            "finite discrete: values must be finite");
    check_nonnegative(probs[idx], "finite discrete probability");
    if (probs[idx] == 0.0) continue;
    if (!out.values.empty() && out.values.back() == values[idx]) {
      out.probs.back() += probs[idx];
    } else {
      out.values.push_back(values[idx]);
      out.probs.push_back(probs[idx]);
    }
  }
  Distribution dist = std::move(out);
  validate(dist);
  return dist;
}

Distribution beta(double alpha, double beta) {
  Distribution d = Beta{alpha, beta};
  validate(d);
  return d;
}

Distribution uniform() { return Uniform{}; }

Distribution exponential(double lambda) {
  Distribution d = Exponential{lambda};
  validate(d);
  return d;
}

Distribution pareto(double alpha) {
  Distribution d = Pareto{alpha};
  validate(d);
  return d;
}

Distribution bernoulli(double q) {
  Distribution d = Bernoulli{q};
  validate(d);
  return d;
}

Distribution decaying_bernoulli(double c, double d, double alpha) {
  Distribution dist = DecayingBernoulli{c, d, alpha};
  validate(dist);
  return dist;
}

void validate(const Distribution& dist) {
  std::visit(
      overloaded{
          [](const FiniteDiscrete& f) {
            require(!f.values.empty() && f.values.size() == f.probs.size(),
                    ErrorCode::invalid_argument,
                    "finite discrete: values and probs must be non-empty and of equal length");
            double total = 0.0;
            for (std::size_t i = 0; i < f.values.size(); ++i) {
              check_nonnegative(f.probs[i], "finite discrete probability");
              require(std::isfinite(f.values[i]), ErrorCode::invalid_argument,
                      "finite discrete: values must be finite");
              if (i > 0) {
                require(f.values[i] < f.values[i - 1], ErrorCode::invalid_argument,
                        "finite discrete: values must be strictly decreasing");
              }
              total += f.probs[i];
            }
            require(std::abs(total - 1.0) <= kProbTolerance, ErrorCode::invalid_argument,
                    "finite discrete: probabilities sum to " + format_double(total));
          },
          [](const Beta& b) {
            check_positive(b.alpha, "beta alpha");
            check_positive(b.beta, "beta beta");
          },
          [](const Uniform&) {},
          [](const Exponential& e) { check_positive(e.lambda, "exponential rate"); },
          [](const Pareto& p) {
            require(std::isfinite(p.alpha) && p.alpha > 1.0, ErrorCode::invalid_argument,
                    "pareto alpha must exceed 1 (finite mean), got " + format_double(p.alpha));
          },
          [](const Bernoulli& b) {
            require(b.q > 0.0 && b.q <= 1.0, ErrorCode::invalid_argument,
                    "bernoulli q must lie in (0, 1], got " + format_double(b.q));
          },
          [](const DecayingBernoulli& d) {
            check_nonnegative(d.c, "decaying c");
            check_nonnegative(d.d, "decaying d");
            check_nonnegative(d.alpha, "decaying alpha");
          },
      },
      dist);
}

std::string kind_name(const Distribution& dist) {
  return std::visit(overloaded{
                        [](const FiniteDiscrete&) { return std::string("discrete"); },
                        [](const Beta&) { return std::string("beta"); },
                        [](const Uniform&) { return std::string("uniform"); },
                        [](const Exponential&) { return std::string("exp"); },
                        [](const Pareto&) { return std::string("pareto"); },
                        [](const Bernoulli&) { return std::string("bernoulli"); },
                        [](const DecayingBernoulli&) { return std::string("decaying"); },
                    },
                    dist);
}

namespace {

std::string params_joined(const Distribution& dist, char sep) {
  return std::visit(
      overloaded{
          [sep](const FiniteDiscrete& f) {
            std::string s;
            for (std::size_t i = 0; i < f.values.size(); ++i) {
              if (i) s += sep;
              s += format_double(f.values[i]) + "/" + format_double(f.probs[i]);
            }
            return s;
          },
          [sep](const Beta& b) { return format_double(b.alpha) + sep + format_double(b.beta); },
          [](const Uniform&) { return std::string(); },
          [](const Exponential& e) { return format_double(e.lambda); },
          [](const Pareto& p) { return format_double(p.alpha); },
          [](const Bernoulli& b) { return format_double(b.q); },
          [sep](const DecayingBernoulli& d) {
            return format_double(d.c) + sep + format_double(d.d) + sep + format_double(d.alpha);
          },
      },
      dist);
}

}  // namespace

std::string params_string(const Distribution& dist) { return params_joined(dist, ';'); }

std::string to_string(const Distribution& dist) {
  std::string params = params_joined(dist, ',');
  return params.empty() ? kind_name(dist) : kind_name(dist) + ":" + params;
}

Distribution parse_distribution(std::string_view text) {
  auto colon = text.find(':');
  std::string kind(text.substr(0, colon));
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  std::transform(kind.begin(), kind.end(), kind.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  auto numbers = [&](std::size_t expected) {
    auto xs = parse_double_list(rest);
    require(xs.size() == expected, ErrorCode::invalid_argument,
            "distribution '" + std::string(text) + "' expects " + std::to_string(expected) +
                " parameter(s)");
    return xs;
  };

  if (kind == "uniform") {
    require(rest.empty(), ErrorCode::invalid_argument, "uniform takes no parameters");
    return uniform();
  }
  if (kind == "exp" || kind == "exponential") return exponential(numbers(1)[0]);
  if (kind == "pareto") return pareto(numbers(1)[0]);
  if (kind == "bernoulli") return bernoulli(numbers(1)[0]);
  if (kind == "beta") {
    auto xs = parse_double_list(rest);
    // A single parameter is the upper-endpoint shape; the first defaults to 1.
    if (xs.size() == 1) return beta(1.0, xs[0]);
    require(xs.size() == 2, ErrorCode::invalid_argument, "beta expects 1 or 2 parameters");
    return beta(xs[0], xs[1]);
  }
  if (kind == "decaying") {
    auto xs = numbers(3);
    return decaying_bernoulli(xs[0], xs[1], xs[2]);
  }
  if (kind == "discrete") {
    std::vector<double> values, probs;
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(',', start);
      auto item = rest.substr(start, comma - start);
      auto slash = item.find('/');
      require(slash != std::string_view::npos, ErrorCode::invalid_argument,
              "discrete support entries are value/prob, got '" + std::string(item) + "'");
      values.push_back(parse_double(item.substr(0, slash)));
      probs.push_back(parse_double(item.substr(slash + 1)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return finite_discrete(std::move(values), std::move(probs));
  }
  fail(ErrorCode::invalid_argument, "unknown distribution '" + std::string(text) + "'");
}

bool is_iid(const Distribution& dist) { return !std::holds_alternative<DecayingBernoulli>(dist); }

double mean(const Distribution& dist) {
  return std::visit(
      overloaded{
          [](const FiniteDiscrete& f) {
            double m = 0.0;
            for (std::size_t i = 0; i < f.values.size(); ++i) m += f.values[i] * f.probs[i];
            return m;
          },
          [](const Beta& b) { return b.alpha / (b.alpha + b.beta); },
          [](const Uniform&) { return 0.5; },
          [](const Exponential& e) { return 1.0 / e.lambda; },
          [](const Pareto& p) { return p.alpha / (p.alpha - 1.0); },
          [](const Bernoulli& b) { return b.q; },
          [](const DecayingBernoulli&) -> double {
            fail(ErrorCode::invalid_argument, "decaying bernoulli items have no common mean");
          },
      },
      dist);
}

double expected_sum(const Distribution& dist, int a) {
  require(a >= 0, ErrorCode::out_of_range, "expected_sum: negative item count");
  if (const auto* d = std::get_if<DecayingBernoulli>(&dist)) {
    double s = 0.0;
    for (int i = 1; i <= a; ++i) s += success_probability(*d, i);
    return s;
  }
  return a * mean(dist);
}

double success_probability(const DecayingBernoulli& dist, int i) {
  require(i >= 1, ErrorCode::out_of_range, "item index starts at 1");
  double q = dist.c * std::pow(i + dist.d, -dist.alpha);
  return std::min(q, 1.0);
}

bool clamps(const DecayingBernoulli& dist) {
  return dist.c * std::pow(1.0 + dist.d, -dist.alpha) > 1.0;
}

std::vector<double> success_sequence(const Distribution& dist, int a) {
  std::vector<double> q(static_cast<std::size_t>(std::max(a, 0)));
  if (const auto* b = std::get_if<Bernoulli>(&dist)) {
    std::fill(q.begin(), q.end(), b->q);
  } else if (const auto* d = std::get_if<DecayingBernoulli>(&dist)) {
    for (int i = 1; i <= a; ++i) q[i - 1] = success_probability(*d, i);
  } else {
    fail(ErrorCode::invalid_argument, "success_sequence needs a Bernoulli model");
  }
  return q;
}

void draw_set(const Distribution& dist, std::span<double> out, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::visit(
      overloaded{
          [&](const FiniteDiscrete& f) {
            for (double& x : out) {
              double u = unit(rng);
              std::size_t idx = 0;
              double acc = f.probs[0];
              while (u >= acc && idx + 1 < f.values.size()) acc += f.probs[++idx];
              x = f.values[idx];
            }
          },
          [&](const Beta& b) {
            if (b.alpha == 1.0) {
              const double inv = 1.0 / b.beta;
              for (double& x : out) x = 1.0 - std::pow(1.0 - unit(rng), inv);
            } else if (b.beta == 1.0) {
              const double inv = 1.0 / b.alpha;
              for (double& x : out) x = std::pow(1.0 - unit(rng), inv);
            } else {
              std::gamma_distribution<double> ga(b.alpha, 1.0), gb(b.beta, 1.0);
              for (double& x : out) {
                double u = ga(rng), v = gb(rng);
                x = u / (u + v);
              }
            }
          },
          [&](const Uniform&) {
            for (double& x : out) x = unit(rng);
          },
          [&](const Exponential& e) {
            for (double& x : out) x = -std::log1p(-unit(rng)) / e.lambda;
          },
          [&](const Pareto& p) {
            const double inv = -1.0 / p.alpha;
            for (double& x : out) x = std::pow(1.0 - unit(rng), inv);
          },
          [&](const Bernoulli& b) {
            for (double& x : out) x = unit(rng) < b.q ? 1.0 : 0.0;
          },
          [&](const DecayingBernoulli& d) {
            for (std::size_t i = 0; i < out.size(); ++i) {
              out[i] = unit(rng) < success_probability(d, static_cast<int>(i) + 1) ? 1.0 : 0.0;
            }
          },
      },
      dist);
}

}  // namespace divrec
