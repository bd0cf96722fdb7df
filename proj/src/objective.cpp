#include "divrec/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

namespace {

constexpr double kProbTolerance = 1e-12;

void validate_likelihoods(std::span<const double> p) {
  require(!p.empty(), ErrorCode::invalid_argument, "at least one type is required");
  double total = 0.0;
  for (double x : p) {
    require(std::isfinite(x) && x >= 0.0, ErrorCode::invalid_argument,
            "type likelihoods must be nonnegative, got " + format_double(x));
    total += x;
  }
  require(std::abs(total - 1.0) <= kProbTolerance, ErrorCode::invalid_argument,
          "type likelihoods must sum to 1, got " + format_double(total));
}

bool all_of_models(const TypeProfile& profile, auto pred) {
  return std::all_of(profile.models.begin(), profile.models.end(), pred);
}

std::string hex(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

// Sum in ascending order so the result does not depend on type order.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double x : terms) total += x;
  return total;
}

}  // namespace

TypeProfile make_profile(std::vector<double> p, std::vector<Distribution> models) {
  validate_likelihoods(p);
  if (models.size() == 1 && p.size() > 1) models.resize(p.size(), models.front());
  require(models.size() == p.size(), ErrorCode::invalid_argument,
          "need one value model per type (or a single shared one)");
  for (const auto& d : models) validate(d);
  return TypeProfile{std::move(p), std::move(models)};
}

const char* to_string(HSource source) {
  switch (source) {
    case HSource::order_stat_table: return "order_stat_table";
    case HSource::order_stat_analytic: return "order_stat_analytic";
    case HSource::bernoulli_analytic: return "bernoulli_analytic";
    case HSource::decaying_bernoulli_analytic: return "decaying_bernoulli_analytic";
  }
  return "unknown";
}

HSource parse_hsource(const std::string& name) {
  for (HSource s : {HSource::order_stat_table, HSource::order_stat_analytic,
                    HSource::bernoulli_analytic, HSource::decaying_bernoulli_analytic}) {
    if (name == to_string(s)) return s;
  }
  fail(ErrorCode::invalid_argument, "unknown h source '" + name + "'");
}

ObjectiveSpec make_spec(TypeProfile profile, int n, int k) {
  ObjectiveSpec spec;
  if (all_of_models(profile, [](const Distribution& d) {
        return std::holds_alternative<Bernoulli>(d);
      })) {
    spec.source = HSource::bernoulli_analytic;
  } else if (all_of_models(profile, [](const Distribution& d) {
               return std::holds_alternative<DecayingBernoulli>(d);
             })) {
    spec.source = HSource::decaying_bernoulli_analytic;
  } else {
    spec.source = HSource::order_stat_analytic;
  }
  spec.profile = std::move(profile);
  spec.n = n;
  spec.k = k;
  validate(spec);
  return spec;
}

ObjectiveSpec make_spec(TypeProfile profile, int n, int k, std::vector<OrderStatTable> tables) {
  if (tables.size() == 1 && profile.m() > 1) tables.resize(profile.models.size(), tables.front());
  ObjectiveSpec spec{std::move(profile), n, k, HSource::order_stat_table, std::move(tables)};
  validate(spec);
  return spec;
}

void validate(const ObjectiveSpec& spec) {
  validate_likelihoods(spec.profile.p);
  require(spec.profile.models.size() == spec.profile.p.size(), ErrorCode::invalid_argument,
          "need one value model per type");
  require(spec.n >= 1, ErrorCode::invalid_argument, "n must be at least 1");
  require(spec.k >= 1 && spec.k <= spec.n, ErrorCode::invalid_argument,
          "k must lie in [1, n], got k=" + std::to_string(spec.k) +
              ", n=" + std::to_string(spec.n));
  for (const auto& d : spec.profile.models) validate(d);

  switch (spec.source) {
    case HSource::order_stat_table:
      require(spec.tables.size() == spec.profile.models.size(), ErrorCode::invalid_argument,
              "order_stat_table needs one table per type");
      for (std::size_t t = 0; t < spec.tables.size(); ++t) {
        require(is_iid(spec.profile.models[t]), ErrorCode::invalid_argument,
                "order-stat tables need i.i.d. item values");
        require(to_string(spec.tables[t].dist()) == to_string(spec.profile.models[t]),
                ErrorCode::invalid_argument,
                "table " + std::to_string(t) + " does not match the type's value model");
        require(spec.k >= spec.n || spec.tables[t].max_a() >= spec.n, ErrorCode::coverage,
                "order-stat table covers a <= " + std::to_string(spec.tables[t].max_a()) +
                    " but n = " + std::to_string(spec.n));
      }
      break;
    case HSource::order_stat_analytic:
      for (const auto& d : spec.profile.models) {
        const bool closed = std::holds_alternative<Uniform>(d) ||
                            std::holds_alternative<Exponential>(d) ||
                            std::holds_alternative<FiniteDiscrete>(d);
        // Linearity covers every i.i.d. law when all items are consumed.
        require(closed || (spec.k >= spec.n && is_iid(d)), ErrorCode::invalid_argument,
                to_string(d) + " has no closed-form order statistics; use an order-stat table");
      }
      break;
    case HSource::bernoulli_analytic:
      require(all_of_models(spec.profile,
                            [](const Distribution& d) { return std::holds_alternative<Bernoulli>(d); }),
              ErrorCode::invalid_argument, "bernoulli_analytic needs Bernoulli value models");
      break;
    case HSource::decaying_bernoulli_analytic:
      require(all_of_models(spec.profile,
                            [](const Distribution& d) {
                              return std::holds_alternative<DecayingBernoulli>(d);
                            }),
              ErrorCode::invalid_argument,
              "decaying_bernoulli_analytic needs DecayingBernoulli value models");
      break;
  }
}

std::string spec_key(const ObjectiveSpec& spec) {
  std::string key = std::string(to_string(spec.source)) + "|n=" + std::to_string(spec.n) +
                    "|k=" + std::to_string(spec.k);
  for (double p : spec.profile.p) key += "|p=" + hex(p);
  for (const auto& d : spec.profile.models) {
    key += "|" + kind_name(d) + ":";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, FiniteDiscrete>) {
            for (std::size_t i = 0; i < v.values.size(); ++i) {
              key += hex(v.values[i]) + "/" + hex(v.probs[i]) + ",";
            }
          } else if constexpr (std::is_same_v<T, Beta>) {
            key += hex(v.alpha) + "," + hex(v.beta);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            key += hex(v.lambda);
          } else if constexpr (std::is_same_v<T, Pareto>) {
            key += hex(v.alpha);
          } else if constexpr (std::is_same_v<T, Bernoulli>) {
            key += hex(v.q);
          } else if constexpr (std::is_same_v<T, DecayingBernoulli>) {
            key += hex(v.c) + "," + hex(v.d) + "," + hex(v.alpha);
          }
        },
        d);
  }
  for (const auto& t : spec.tables) {
    const auto& s = t.source();
    key += "|table:" + s.describe() + "," + std::to_string(t.max_a()) + "," +
           std::to_string(s.samples) + "," + std::to_string(s.seed) + "," +
           std::to_string(s.workers);
  }
  return key;
}

Objective::Objective(ObjectiveSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  const int m = spec_.profile.m();
  curves_.reserve(static_cast<std::size_t>(m));
  std::vector<double> ceilings;
  for (int t = 0; t < m; ++t) {
    const auto& model = spec_.profile.models[static_cast<std::size_t>(t)];
    const OrderStatTable* table = spec_.source == HSource::order_stat_table
                                      ? &spec_.tables[static_cast<std::size_t>(t)]
                                      : nullptr;
    curves_.push_back(build_value_curve(model, spec_.k, spec_.n, table));
    ceilings.push_back(p(t) * curves_.back().ceiling);
    if (const auto* d = std::get_if<DecayingBernoulli>(&model); d && clamps(*d)) {
      warnings_.push_back("type " + std::to_string(t + 1) +
                          ": success probabilities c(i+d)^-alpha exceed 1 and were clamped");
    }
  }
  total_ceiling_ = sorted_sum(ceilings);
}

double Objective::h(int t, int a) const {
  require(t >= 0 && t < m(), ErrorCode::out_of_range, "type index out of range");
  require(a >= 0 && a <= n(), ErrorCode::out_of_range,
          "item count " + std::to_string(a) + " outside [0, " + std::to_string(n()) + "]");
  return curve(t).h(a);
}

void Objective::check_counts(std::span<const int> counts) const {
  require(static_cast<int>(counts.size()) == m(), ErrorCode::invalid_argument,
          "allocation has " + std::to_string(counts.size()) + " entries, expected " +
              std::to_string(m()));
  long total = 0;
  for (int c : counts) {
    require(c >= 0, ErrorCode::invalid_argument, "allocation entries must be nonnegative");
    total += c;
  }
  require(total == n(), ErrorCode::invalid_argument,
          "allocation sums to " + std::to_string(total) + ", expected n=" + std::to_string(n()));
}

double Objective::shortfall(std::span<const int> counts) const {
  check_counts(counts);
  std::vector<double> terms(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    terms[t] = spec_.profile.p[t] * curves_[t].headroom[static_cast<std::size_t>(counts[t])];
  }
  return sorted_sum(terms);
}

double Objective::value(std::span<const int> counts) const {
  return total_ceiling_ - shortfall(counts);
}

std::shared_ptr<const Objective> objective_for(const ObjectiveSpec& spec) {
  static std::mutex mutex;
  static std::unordered_map<std::string, std::shared_ptr<const Objective>> memo;
  constexpr std::size_t kMaxEntries = 64;

  const std::string key = spec_key(spec);
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  // Built outside the lock; a concurrent build of the same key produces an
  // identical object and the first insertion wins.
  auto built = std::make_shared<const Objective>(spec);
  std::lock_guard lock(mutex);
  if (memo.size() >= kMaxEntries) memo.clear();
  return memo.emplace(key, std::move(built)).first->second;
}

double h_topk(const ObjectiveSpec& spec, int t, int a) { return objective_for(spec)->h(t, a); }

double eval_objective(const ObjectiveSpec& spec, std::span<const int> counts) {
  return objective_for(spec)->value(counts);
}

void validate(const MultiPrefSpec& spec) {
  for (double x : {spec.p1, spec.p2, spec.p12}) {
    require(std::isfinite(x) && x >= 0.0, ErrorCode::invalid_argument,
            "preference probabilities must be nonnegative");
  }
  require(std::abs(spec.p1 + spec.p2 + spec.p12 - 1.0) <= kProbTolerance,
          ErrorCode::invalid_argument, "p1 + p2 + p12 must equal 1");
  require(spec.q > 0.0 && spec.q <= 1.0, ErrorCode::invalid_argument, "q must lie in (0, 1]");
  require(spec.n >= 1, ErrorCode::invalid_argument, "n must be at least 1");
}

double eval_multipref(const MultiPrefSpec& spec, int a1) {
  validate(spec);
  require(a1 >= 0 && a1 <= spec.n, ErrorCode::out_of_range, "a1 must lie in [0, n]");
  const double miss = 1.0 - spec.q;
  const int a2 = spec.n - a1;
  return spec.p1 * std::pow(miss, a1) + spec.p2 * std::pow(miss, a2) +
         spec.p12 * std::pow(miss, spec.n);
}

}  // namespace divrec
