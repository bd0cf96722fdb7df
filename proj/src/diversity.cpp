#include "divrec/diversity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

Representation representation(std::span<const int> counts) {
  require(!counts.empty(), ErrorCode::invalid_argument, "empty allocation");
  long n = 0;
  for (int c : counts) {
    require(c >= 0, ErrorCode::invalid_argument, "allocation entries must be nonnegative");
    n += c;
  }
  require(n >= 1, ErrorCode::invalid_argument, "representation needs n >= 1");
  Representation rep;
  rep.r.reserve(counts.size());
  for (int c : counts) rep.r.push_back(static_cast<double>(c) / static_cast<double>(n));
  return rep;
}

Representation representation(const Allocation& allocation) {
  return representation(std::span<const int>(allocation.counts));
}

namespace {

void check_likelihoods(std::span<const double> p) {
  require(!p.empty(), ErrorCode::invalid_argument, "empty likelihood vector");
  double total = 0.0;
  for (double x : p) {
    require(std::isfinite(x) && x >= 0.0, ErrorCode::invalid_argument,
            "likelihoods must be nonnegative");
    total += x;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument,
          "likelihoods must sum to 1, got " + format_double(total));
}

std::size_t argmax_lowest(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

bool unique_max(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  return std::count(v.begin(), v.end(), top) == 1;
}

std::vector<double> one_hot(std::size_t m, std::size_t at) {
  std::vector<double> r(m, 0.0);
  r[at] = 1.0;
  return r;
}

double rms_gap(std::span<const double> r, std::span<const double> target) {
  double ss = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) ss += (r[t] - target[t]) * (r[t] - target[t]);
  return std::sqrt(ss / static_cast<double>(r.size()));
}

}  // namespace

Representation gamma_vector(std::span<const double> p, double gamma) {
  check_likelihoods(p);
  require(gamma >= 0.0, ErrorCode::invalid_argument, "gamma must be nonnegative");
  if (gamma == kInfiniteGamma) return {one_hot(p.size(), argmax_lowest(p))};
  if (gamma == 0.0) return {std::vector<double>(p.size(), 1.0 / static_cast<double>(p.size()))};

  // Softmax of gamma * log p; zero likelihoods contribute nothing.
  std::vector<double> logw(p.size());
  for (std::size_t t = 0; t < p.size(); ++t) {
    logw[t] = p[t] > 0.0 ? gamma * std::log(p[t]) : -kInfiniteGamma;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& w : logw) {
    w = std::exp(w - top);
    total += w;
  }
  for (double& w : logw) w /= total;
  return {std::move(logw)};
}

GammaFit fit_gamma(std::span<const double> r, std::span<const double> p) {
  check_likelihoods(p);
  require(r.size() == p.size(), ErrorCode::invalid_argument,
          "representation and likelihoods differ in length");
  require(p.size() >= 2, ErrorCode::unidentifiable, "gamma is unidentifiable with one type");
  require(std::adjacent_find(p.begin(), p.end(), std::not_equal_to<>()) != p.end(),
          ErrorCode::unidentifiable, "gamma is unidentifiable when all likelihoods are equal");

  auto loss = [&](double g) { return rms_gap(r, gamma_vector(p, g).r); };

  constexpr int kGrid = 32;
  constexpr double kMaxGamma = 64.0;
  std::vector<double> grid(kGrid + 1), values(kGrid + 1);
  for (int j = 0; j <= kGrid; ++j) {
    // Quadratic spacing puts most points where gamma_vector changes fastest.
    grid[j] = kMaxGamma * (j / double(kGrid)) * (j / double(kGrid));
    values[j] = loss(grid[j]);
  }
  int minima = 0;
  for (int j = 0; j <= kGrid; ++j) {
    const bool left = j == 0 || values[j] < values[j - 1];
    const bool right = j == kGrid || values[j] <= values[j + 1];
    if (left && right) ++minima;
  }
  const int best_j =
      static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());

  GammaFit fit{grid[best_j], values[best_j], minima <= 1};

  double lo = grid[std::max(best_j - 1, 0)];
  double hi = grid[std::min(best_j + 1, kGrid)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = loss(x1), f2 = loss(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = loss(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = loss(x2);
    }
  }
  const double refined = f1 <= f2 ? x1 : x2;
  if (const double f = std::min(f1, f2); f < fit.residual) fit = {refined, f, fit.unimodal};

  if (const double f = loss(kInfiniteGamma); f < fit.residual) {
    fit.gamma = kInfiniteGamma;
    fit.residual = f;
  }
  return fit;
}

const char* to_string(Setting setting) {
  switch (setting) {
    case Setting::finite_support: return "finite-support";
    case Setting::bounded_tail: return "bounded-tail";
    case Setting::exponential_tail: return "exponential-tail";
    case Setting::pareto_tail: return "pareto-tail";
    case Setting::shared_knn: return "shared-knn";
    case Setting::decaying_top1: return "decaying-top1";
    case Setting::decaying_knn: return "decaying-knn";
    case Setting::varying_top1: return "varying-top1";
    case Setting::varying_knn: return "varying-knn";
    case Setting::uniform_bound: return "uniform-bound";
    case Setting::shared_bernoulli: return "shared-bernoulli";
    case Setting::calibration: return "calibration";
    case Setting::multipref: return "multipref";
  }
  return "unknown";
}

Setting parse_setting(const std::string& name) {
  for (int s = 0; s <= static_cast<int>(Setting::multipref); ++s) {
    if (name == to_string(static_cast<Setting>(s))) return static_cast<Setting>(s);
  }
  fail(ErrorCode::invalid_argument, "unknown setting '" + name + "'");
}

namespace {

void hypothesis(bool ok, Setting s, const std::string& what) {
  require(ok, ErrorCode::hypothesis_violated, std::string(to_string(s)) + ": " + what);
}

PredictedLimit gamma_limit(const SettingParams& sp, double gamma) {
  return {sp.setting, gamma_vector(sp.p, gamma).r, gamma, std::nullopt};
}

void check_q(const SettingParams& sp, bool allow_one) {
  require(sp.q.size() == sp.p.size(), ErrorCode::invalid_argument,
          "need one success probability per type");
  for (double q : sp.q) {
    hypothesis(q > 0.0 && (q < 1.0 || (allow_one && q == 1.0)), sp.setting,
               allow_one ? "success probabilities must lie in (0, 1]"
                         : "success probabilities must lie in (0, 1)");
  }
}

}  // namespace

PredictedLimit predict_limit(const SettingParams& sp) {
  const Setting s = sp.setting;
  if (s == Setting::multipref) {
    require(sp.p.size() == 3, ErrorCode::invalid_argument,
            "multipref takes p = (p1, p2, p12)");
    check_likelihoods(sp.p);
    hypothesis(sp.p[0] > 0.0 && sp.p[1] > 0.0, s, "both single-type preferences need p > 0");
    return {s, {0.5, 0.5}, std::nullopt, std::nullopt};
  }
  check_likelihoods(sp.p);

  switch (s) {
    case Setting::finite_support:
    case Setting::shared_bernoulli:
      return gamma_limit(sp, 0.0);
    case Setting::exponential_tail:
    case Setting::calibration:
      return gamma_limit(sp, 1.0);
    case Setting::bounded_tail:
      hypothesis(sp.beta > 0.0 && std::isfinite(sp.beta), s, "beta must be positive and finite");
      return gamma_limit(sp, sp.beta / (sp.beta + 1.0));
    case Setting::pareto_tail:
      hypothesis(sp.alpha > 1.0, s, "Pareto alpha must exceed 1 (finite mean)");
      return gamma_limit(sp, std::isinf(sp.alpha) ? 1.0 : sp.alpha / (sp.alpha - 1.0));
    case Setting::shared_knn:
      hypothesis(unique_max(sp.p), s, "the most likely type must be unique");
      return {s, one_hot(sp.p.size(), argmax_lowest(sp.p)), kInfiniteGamma, std::nullopt};
    case Setting::decaying_top1:
      hypothesis(sp.alpha >= 0.0, s, "alpha must be nonnegative");
      hypothesis(sp.c > 0.0, s, "c must be positive");
      if (sp.alpha < 1.0) return gamma_limit(sp, 0.0);
      if (sp.alpha == 1.0) return gamma_limit(sp, 1.0 / (1.0 + sp.c));
      return gamma_limit(sp, 1.0 / sp.alpha);
    case Setting::decaying_knn:
      hypothesis(sp.alpha >= 0.0, s, "alpha must be nonnegative");
      hypothesis(sp.alpha > 0.0 || unique_max(sp.p), s,
                 "alpha = 0 needs a unique most likely type");
      return gamma_limit(sp, sp.alpha == 0.0 ? kInfiniteGamma : 1.0 / sp.alpha);
    case Setting::varying_top1: {
      check_q(sp, false);
      std::vector<double> r(sp.q.size());
      for (std::size_t t = 0; t < r.size(); ++t) r[t] = -1.0 / std::log1p(-sp.q[t]);
      const double total = std::accumulate(r.begin(), r.end(), 0.0);
      for (double& x : r) x /= total;
      return {s, std::move(r), std::nullopt, std::nullopt};
    }
    case Setting::varying_knn: {
      check_q(sp, true);
      std::vector<double> pq(sp.p.size());
      for (std::size_t t = 0; t < pq.size(); ++t) pq[t] = sp.p[t] * sp.q[t];
      hypothesis(unique_max(pq), s, "argmax of p_t * q_t must be unique");
      return {s, one_hot(pq.size(), argmax_lowest(pq)), std::nullopt, std::nullopt};
    }
    case Setting::uniform_bound: {
      hypothesis(sp.n >= 1, s, "n must be at least 1");
      const int m = static_cast<int>(sp.p.size());
      double root_sum = 0.0;
      for (double x : sp.p) root_sum += std::sqrt(x);
      const double p_min = *std::min_element(sp.p.begin(), sp.p.end());
      const double k_max = std::sqrt(p_min) / root_sum * sp.n - m - 1;
      hypothesis(sp.k >= 1 && sp.k <= k_max, s,
                 "needs 1 <= k <= sqrt(p_min) / sum_i sqrt(p_i) * n - m - 1 = " +
                     format_double(k_max) + ", got k = " + std::to_string(sp.k));
      PredictedLimit limit = gamma_limit(sp, 0.5);
      limit.finite_n_bound = (m + 1.0) / sp.n;
      return limit;
    }
    case Setting::multipref:
      break;
  }
  fail(ErrorCode::invalid_argument, "unhandled setting");
}

std::vector<ProbePoint> convergence_probe(const std::function<ObjectiveSpec(int)>& family,
                                          const PredictedLimit& prediction,
                                          std::span<const int> schedule, int workers,
                                          const BruteForceOptions& fallback) {
  std::vector<ProbePoint> points(schedule.size());

  auto solve_point = [&](std::size_t idx) {
    const ObjectiveSpec spec = family(schedule[idx]);
    require(spec.profile.m() == static_cast<int>(prediction.r_inf.size()),
            ErrorCode::invalid_argument, "prediction and spec differ in the number of types");
    const Objective obj(spec);
    SolveReport report = solve_greedy(obj);
    if (!report.concavity_certified) {
      try {
        report = solve_brute_force(obj, fallback);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::budget_exceeded) throw;
      }
    }
    ProbePoint& pt = points[idx];
    pt.n = spec.n;
    pt.r = representation(report.allocation).r;
    pt.certified = report.concavity_certified ||
                   report.allocation.solver == SolverKind::brute_force;
    pt.solver = report.allocation.solver;
    for (std::size_t t = 0; t < pt.r.size(); ++t) {
      pt.gap = std::max(pt.gap, std::abs(pt.r[t] - prediction.r_inf[t]));
    }
    try {
      pt.gamma_fit = fit_gamma(pt.r, spec.profile.p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::unidentifiable) throw;
    }
  };

  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(schedule.size())));
  if (pool == 1) {
    for (std::size_t i = 0; i < schedule.size(); ++i) solve_point(i);
    return points;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(pool));
  {
    std::vector<std::jthread> threads;
    for (int w = 0; w < pool; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i; (i = next++) < schedule.size();) solve_point(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return points;
}

void write_probe_csv(std::ostream& out, std::span<const ProbePoint> points, int m) {
  out << "n";
  for (int t = 1; t <= m; ++t) out << ",r_" << t;
  out << ",gap,gamma_fit\n";
  for (const auto& pt : points) {
    out << pt.n;
    for (double r : pt.r) out << ',' << format_double(r);
    out << ',' << format_double(pt.gap) << ',';
    if (pt.gamma_fit) out << format_double(pt.gamma_fit->gamma);
    out << '\n';
  }
}

}  // namespace divrec
