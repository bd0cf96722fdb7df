#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "divrec/allocator.hpp"
#include "divrec/objective.hpp"

namespace divrec {

struct Representation {
  std::vector<double> r;  // share of each type; sums to 1
};

Representation representation(std::span<const int> counts);
Representation representation(const Allocation& allocation);

constexpr double kInfiniteGamma = std::numeric_limits<double>::infinity();

/// r_t = p_t^gamma / sum_i p_i^gamma, with 0^0 = 1. gamma = inf gives the
/// one-hot vector at the largest p_t (lowest index on ties).
Representation gamma_vector(std::span<const double> p, double gamma);

struct GammaFit {
  double gamma = 0.0;     // may be kInfiniteGamma
  double residual = 0.0;  // RMS of r - gamma_vector(p, gamma)
  /// The 33-point pre-scan saw a single local minimum.
  bool unimodal = true;

  bool infinite() const { return gamma == kInfiniteGamma; }
};

/// Least-squares gamma on [0, 64] by grid pre-scan and golden-section search,
/// compared against gamma = inf. Throws Error(unidentifiable) when m < 2 or all
/// p_t are equal.
GammaFit fit_gamma(std::span<const double> r, std::span<const double> p);

enum class Setting {
  finite_support,    // finite discrete values, fixed k
  bounded_tail,      // density ~ (M - x)^(beta - 1) near the top, fixed k
  exponential_tail,  // exponential, fixed k
  pareto_tail,       // Pareto(alpha), fixed k
  shared_knn,        // any shared i.i.d. law, k = n
  decaying_top1,     // decaying Bernoulli, k = 1
  decaying_knn,      // decaying Bernoulli, k = n
  varying_top1,      // Bernoulli(q_t), k = 1
  varying_knn,       // Bernoulli(q_t), k = n
  uniform_bound,     // uniform values, finite n
  shared_bernoulli,  // shared Bernoulli(q), k = 1
  calibration,       // exponential, k = 1
  multipref,         // two types plus a "both" preference
};

const char* to_string(Setting setting);
Setting parse_setting(const std::string& name);

/// Parameters of a limit query. Only the fields the setting reads matter.
struct SettingParams {
  Setting setting = Setting::uniform_bound;
  std::vector<double> p;
  double beta = 1.0;    // bounded_tail
  double alpha = 2.0;   // pareto_tail, decaying_*
  double c = 1.0;       // decaying_top1 at alpha = 1
  std::vector<double> q;  // varying_*
  int n = 0;            // uniform_bound
  int k = 1;            // uniform_bound
};

struct PredictedLimit {
  Setting setting = Setting::uniform_bound;
  std::vector<double> r_inf;
  /// Absent when the limit is not of the form p^gamma (varying_top1).
  std::optional<double> gamma_inf;
  /// Per-coordinate bound on |r_t - r_inf_t| at finite n (uniform_bound only).
  std::optional<double> finite_n_bound;
};

/// Closed-form limit for the setting. Throws Error(hypothesis_violated) naming
/// the broken precondition.
PredictedLimit predict_limit(const SettingParams& params);

struct ProbePoint {
  int n = 0;
  std::vector<double> r;
  double gap = 0.0;  // max_t |r_t - r_inf_t|
  std::optional<GammaFit> gamma_fit;
  bool certified = false;
  SolverKind solver = SolverKind::greedy;
};

/// Solves each n with greedy. An uncertified greedy result is replaced by brute
/// force when that fits the budget, and kept (certified = false) otherwise.
/// Points are computed on up to `workers` threads; output order follows the
/// schedule.
std::vector<ProbePoint> convergence_probe(const std::function<ObjectiveSpec(int)>& family,
                                          const PredictedLimit& prediction,
                                          std::span<const int> schedule, int workers = 1,
                                          const BruteForceOptions& fallback = {});

/// Columns: n,r_1..r_m,gap,gamma_fit.
void write_probe_csv(std::ostream& out, std::span<const ProbePoint> points, int m);

}  // namespace divrec
