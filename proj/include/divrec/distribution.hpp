#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace divrec {

// Conditional item-value laws. Build them through the factory functions below,
// which enforce the parameter invariants; aggregates built by hand are checked
// again by validate() wherever a distribution enters the library.

/// Finite support; values are strictly decreasing after canonicalization.
struct FiniteDiscrete {
  std::vector<double> values;
  std::vector<double> probs;
};

/// Beta(alpha, beta) on [0, 1].
struct Beta {
  double alpha = 1.0;
  double beta = 1.0;
};

/// U[0, 1].
struct Uniform {};

struct Exponential {
  double lambda = 1.0;
};

/// Pareto with minimum 1 and shape alpha > 1: pdf alpha * x^(-alpha-1) on [1, inf).
struct Pareto {
  double alpha = 2.0;
};

struct Bernoulli {
  double q = 0.5;
};

/// Item i (1-based) succeeds with probability min(1, c * (i + d)^(-alpha)).
/// Items are independent but not identically distributed.
struct DecayingBernoulli {
  double c = 1.0;
  double d = 0.0;
  double alpha = 0.0;
};

using Distribution = std::variant<FiniteDiscrete, Beta, Uniform, Exponential,
                                  Pareto, Bernoulli, DecayingBernoulli>;

Distribution finite_discrete(std::vector<double> values, std::vector<double> probs);
Distribution beta(double alpha, double beta);
Distribution uniform();
Distribution exponential(double lambda);
Distribution pareto(double alpha);
Distribution bernoulli(double q);
Distribution decaying_bernoulli(double c, double d, double alpha);

/// Throws Error(invalid_argument) if any invariant is broken.
void validate(const Distribution& dist);

/// Short variant tag: "discrete", "beta", "uniform", "exp", "pareto",
/// "bernoulli", "decaying".
std::string kind_name(const Distribution& dist);

/// Parameters joined by ';' (CSV-safe), e.g. "1;2" for Beta(1, 2).
std::string params_string(const Distribution& dist);

/// Round-trips through parse_distribution, e.g. "beta:1,2", "discrete:1/0.5,0/0.5".
std::string to_string(const Distribution& dist);
Distribution parse_distribution(std::string_view text);

/// False only for DecayingBernoulli, whose items differ by position.
bool is_iid(const Distribution& dist);

/// Mean of one draw. Throws for DecayingBernoulli (use expected_sum).
double mean(const Distribution& dist);

/// E[X_1 + ... + X_a] for the a best items.
double expected_sum(const Distribution& dist, int a);

/// Clamped success probability of item i >= 1.
double success_probability(const DecayingBernoulli& dist, int i);

/// True when c * (1 + d)^(-alpha) > 1, i.e. at least the first item is clamped.
bool clamps(const DecayingBernoulli& dist);

using Rng = std::mt19937_64;

/// Fills `out` with one draw for items 1..out.size().
void draw_set(const Distribution& dist, std::span<double> out, Rng& rng);

/// Order statistics of independent non-identical Bernoulli items need no
/// sampling for the objective; this helper lists q_1..q_a for either Bernoulli
/// variant (constant for the i.i.d. case).
std::vector<double> success_sequence(const Distribution& dist, int a);

}  // namespace divrec
