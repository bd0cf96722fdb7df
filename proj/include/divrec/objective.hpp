#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "divrec/distribution.hpp"
#include "divrec/order_stats.hpp"

namespace divrec {

/// Likelihood p_t of each type plus the value model of its items.
struct TypeProfile {
  std::vector<double> p;
  std::vector<Distribution> models;  // one per type

  int m() const { return static_cast<int>(p.size()); }
};

/// Validates p (nonnegative, sums to 1 within 1e-12). A single model is shared
/// by every type.
TypeProfile make_profile(std::vector<double> p, std::vector<Distribution> models);

enum class HSource {
  order_stat_table,             // one OrderStatTable per type
  order_stat_analytic,          // Uniform, Exponential, FiniteDiscrete closed forms
  bernoulli_analytic,           // Bernoulli(q_t) per type
  decaying_bernoulli_analytic,  // DecayingBernoulli per type
};

const char* to_string(HSource source);
HSource parse_hsource(const std::string& name);

struct ObjectiveSpec {
  TypeProfile profile;
  int n = 1;
  int k = 1;
  HSource source = HSource::order_stat_analytic;
  std::vector<OrderStatTable> tables;  // order_stat_table only
};

/// Picks the analytic source matching the models; throws if a model needs a table.
ObjectiveSpec make_spec(TypeProfile profile, int n, int k);
ObjectiveSpec make_spec(TypeProfile profile, int n, int k, std::vector<OrderStatTable> tables);

void validate(const ObjectiveSpec& spec);

/// Precise identity of a spec, used as the memo key.
std::string spec_key(const ObjectiveSpec& spec);

/// Expected value of the best min(k, a) items of one type, stored so that
/// saturating curves keep full relative precision near their ceiling:
/// h(a) = ceiling - headroom[a], and gain[a] = h(a + 1) - h(a) is computed
/// directly rather than by differencing.
struct ValueCurve {
  double ceiling = 0.0;
  std::vector<double> headroom;  // a = 0..n
  std::vector<double> gain;      // a = 0..n-1

  double h(int a) const { return ceiling - headroom[static_cast<std::size_t>(a)]; }
  int n() const { return static_cast<int>(headroom.size()) - 1; }
};

/// `table` is required for Beta and Pareto and ignored by the Bernoulli
/// variants.
ValueCurve build_value_curve(const Distribution& dist, int k, int n,
                             const OrderStatTable* table = nullptr);

double h_bernoulli_top1(double q, int a);
/// Sum of the first a success probabilities (the a best items).
double h_bernoulli_sum(std::span<const double> q, int a);
double h_decaying_top1(double c, double d, double alpha, int a);

/// Evaluates sum_t p_t h_t(a_t) for one spec. Every h_t(a), a = 0..n, is
/// computed once at construction; the object is immutable afterwards, so it
/// can be shared across threads.
class Objective {
 public:
  explicit Objective(ObjectiveSpec spec);

  const ObjectiveSpec& spec() const { return spec_; }
  int m() const { return spec_.profile.m(); }
  int n() const { return spec_.n; }
  int k() const { return spec_.k; }
  double p(int t) const { return spec_.profile.p[static_cast<std::size_t>(t)]; }

  const ValueCurve& curve(int t) const { return curves_[static_cast<std::size_t>(t)]; }
  double h(int t, int a) const;

  /// Objective value of a composition summing to n.
  double value(std::span<const int> counts) const;
  /// sum_t p_t headroom_t(a_t): value = total_ceiling() - shortfall. Solvers
  /// minimise this, which stays exact where value() saturates.
  double shortfall(std::span<const int> counts) const;
  double total_ceiling() const { return total_ceiling_; }

  /// Non-fatal notes, e.g. success probabilities clamped to 1.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void check_counts(std::span<const int> counts) const;

  ObjectiveSpec spec_;
  std::vector<ValueCurve> curves_;
  double total_ceiling_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Shared, memoised Objective for a spec (keyed on spec_key).
std::shared_ptr<const Objective> objective_for(const ObjectiveSpec& spec);

double h_topk(const ObjectiveSpec& spec, int t, int a);
double eval_objective(const ObjectiveSpec& spec, std::span<const int> counts);

/// Two types where the user may prefer only type 1, only type 2, or both.
struct MultiPrefSpec {
  double p1 = 0.5;
  double p2 = 0.5;
  double p12 = 0.0;
  double q = 0.5;
  int n = 1;
};

void validate(const MultiPrefSpec& spec);

/// Probability that none of the n items satisfies the user, with a1 items of
/// type 1 and n - a1 of type 2 (to be minimised).
double eval_multipref(const MultiPrefSpec& spec, int a1);

}  // namespace divrec
