#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "divrec/objective.hpp"

namespace divrec {

enum class SolverKind { brute_force, greedy, relaxed_rounded };

const char* to_string(SolverKind kind);
SolverKind parse_solver(const std::string& name);

struct Allocation {
  std::vector<int> counts;
  double objective_value = 0.0;
  SolverKind solver = SolverKind::greedy;

  int n() const;
};

struct SolveReport {
  Allocation allocation;
  /// Number of optimal compositions; brute force only.
  std::optional<std::int64_t> ties;
  /// Every h_t has nonincreasing marginal gains on [0, n].
  bool concavity_certified = false;
  /// Greedy result without a concavity certificate.
  bool heuristic = false;
  /// Continuous optimum; relaxed solver only.
  std::vector<double> relaxed_optimum;
};

struct BruteForceOptions {
  std::int64_t budget = 10'000'000;
  /// Partitions of the enumeration; the result does not depend on it.
  int workers = 1;
};

/// C(n + m - 1, m - 1), saturating at INT64_MAX.
std::int64_t composition_count(int n, int m);

/// Marginal gains nonincreasing up to rounding.
bool is_concave(const ValueCurve& curve);
bool certify_concavity(const Objective& objective);

/// Exact optimum by enumeration; ties resolve to the lexicographically smallest
/// counts. Throws Error(budget_exceeded) when the composition count exceeds the
/// budget.
SolveReport solve_brute_force(const Objective& objective, const BruteForceOptions& options = {});

/// Marginal allocation: n steps, each granting one item to the type with the
/// largest p_t * (h_t(a_t + 1) - h_t(a_t)). Equal gains go to the highest type
/// index, which reproduces the brute-force lexicographic tie-break. Exact when
/// the result is concavity-certified.
SolveReport solve_greedy(const Objective& objective);

/// Continuous optimum of the relaxed problem, for the families with closed
/// forms: uniform values (any k), Bernoulli(q_t) with k = 1, exponential with
/// k = 1. Throws Error(no_closed_form) otherwise.
std::vector<double> continuous_optimum(const Objective& objective);

/// Rounds the continuous optimum by searching every composition with
/// floor(x_t) - m < a_t < floor(x_t) + m.
SolveReport solve_relaxed_rounded(const Objective& objective);

SolveReport solve_brute_force(const ObjectiveSpec& spec, const BruteForceOptions& options = {});
SolveReport solve_greedy(const ObjectiveSpec& spec);
SolveReport solve_relaxed_rounded(const ObjectiveSpec& spec);

struct CrossCheckReport {
  std::optional<SolveReport> brute_force;
  std::optional<SolveReport> greedy;
  std::optional<SolveReport> relaxed;
  std::vector<std::string> skipped;  // solver name: reason
  std::vector<std::string> issues;   // disagreements

  bool consistent() const { return issues.empty(); }
};

/// Runs every applicable solver. Objective values must agree within 1e-9, and
/// greedy counts must equal brute-force counts when concavity is certified.
CrossCheckReport cross_check(const Objective& objective, const BruteForceOptions& options = {});
CrossCheckReport cross_check(const ObjectiveSpec& spec, const BruteForceOptions& options = {});

}  // namespace divrec
