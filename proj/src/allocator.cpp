#include "divrec/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::brute_force: return "brute_force";
    case SolverKind::greedy: return "greedy";
    case SolverKind::relaxed_rounded: return "relaxed_rounded";
  }
  return "unknown";
}

SolverKind parse_solver(const std::string& name) {
  if (name == "brute_force" || name == "brute") return SolverKind::brute_force;
  if (name == "greedy") return SolverKind::greedy;
  if (name == "relaxed_rounded" || name == "relaxed") return SolverKind::relaxed_rounded;
  fail(ErrorCode::invalid_argument, "unknown solver '" + name + "'");
}

int Allocation::n() const {
  int total = 0;
  for (int c : counts) total += c;
  return total;
}

std::int64_t composition_count(int n, int m) {
  require(n >= 0 && m >= 1, ErrorCode::invalid_argument, "composition_count needs n >= 0, m >= 1");
  // C(n + m - 1, m - 1) built incrementally; each prefix is itself a binomial.
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t c = 1;
  for (int j = 1; j < m; ++j) {
    const std::int64_t num = static_cast<std::int64_t>(n) + j;
    if (c > kMax / num) return kMax;
    c = c * num / j;
  }
  return c;
}

bool is_concave(const ValueCurve& curve) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t a = 0; a + 1 < curve.gain.size(); ++a) {
    const double tol = 8 * eps * (std::abs(curve.headroom[a]) + std::abs(curve.headroom[a + 2]));
    if (curve.gain[a + 1] > curve.gain[a] + tol) return false;
  }
  return true;
}

bool certify_concavity(const Objective& objective) {
  for (int t = 0; t < objective.m(); ++t) {
    if (!is_concave(objective.curve(t))) return false;
  }
  return true;
}

namespace {

struct Best {
  double shortfall = std::numeric_limits<double>::infinity();
  std::vector<int> counts;
  std::int64_t ties = 0;

  void offer(double s, const std::vector<int>& c) {
    if (s < shortfall) {
      shortfall = s;
      counts = c;
      ties = 1;
    } else if (s == shortfall) {
      ++ties;
      if (c < counts) counts = c;
    }
  }

  void merge(const Best& other) {
    if (other.ties == 0) return;
    if (other.shortfall < shortfall) {
      *this = other;
    } else if (other.shortfall == shortfall) {
      ties += other.ties;
      if (other.counts < counts) counts = other.counts;
    }
  }
};

// Enumerates compositions of `remaining` into positions [t, m) within the
// per-type bounds, in lexicographic order.
class BoxEnumerator {
 public:
  BoxEnumerator(const Objective& obj, std::vector<int> lo, std::vector<int> hi)
      : obj_(obj), lo_(std::move(lo)), hi_(std::move(hi)), m_(obj.m()) {
    weighted_.resize(static_cast<std::size_t>(m_));
    for (int t = 0; t < m_; ++t) {
      const auto& head = obj.curve(t).headroom;
      auto& w = weighted_[static_cast<std::size_t>(t)];
      w.resize(head.size());
      for (std::size_t a = 0; a < head.size(); ++a) w[a] = obj.p(t) * head[a];
    }
    counts_.assign(static_cast<std::size_t>(m_), 0);
    terms_.resize(static_cast<std::size_t>(m_));
    suffix_lo_.assign(static_cast<std::size_t>(m_) + 1, 0);
    suffix_hi_.assign(static_cast<std::size_t>(m_) + 1, 0);
    for (int t = m_ - 1; t >= 0; --t) {
      suffix_lo_[t] = suffix_lo_[t + 1] + lo_[t];
      suffix_hi_[t] = suffix_hi_[t + 1] + hi_[t];
    }
  }

  // Enumerate with the first coordinate restricted to values v where
  // (v - lo_[0]) % stride == offset.
  Best run(int stride = 1, int offset = 0) {
    Best best;
    const int n = obj_.n();
    for (int v = lo_[0] + offset; v <= hi_[0]; v += stride) {
      const int rest = n - v;
      if (rest < suffix_lo_[1] || rest > suffix_hi_[1]) continue;
      counts_[0] = v;
      if (m_ == 1) {
        visit(best);
      } else {
        recurse(1, rest, best);
      }
    }
    return best;
  }

 private:
  void recurse(int t, int remaining, Best& best) {
    if (t == m_ - 1) {
      counts_[t] = remaining;
      visit(best);
      return;
    }
    const int from = std::max(lo_[t], remaining - suffix_hi_[t + 1]);
    const int to = std::min(hi_[t], remaining - suffix_lo_[t + 1]);
    for (int v = from; v <= to; ++v) {
      counts_[t] = v;
      recurse(t + 1, remaining - v, best);
    }
  }

  void visit(Best& best) {
    // Same arithmetic as Objective::shortfall, so values compare exactly.
    for (int t = 0; t < m_; ++t) terms_[t] = weighted_[t][static_cast<std::size_t>(counts_[t])];
    std::sort(terms_.begin(), terms_.end());
    double s = 0.0;
    for (double x : terms_) s += x;
    best.offer(s, counts_);
  }

  const Objective& obj_;
  std::vector<int> lo_, hi_;
  int m_;
  std::vector<std::vector<double>> weighted_;
  std::vector<int> counts_;
  std::vector<double> terms_;
  std::vector<int> suffix_lo_, suffix_hi_;
};

SolveReport make_report(const Objective& obj, std::vector<int> counts, SolverKind kind) {
  SolveReport report;
  report.allocation.objective_value = obj.value(counts);
  report.allocation.counts = std::move(counts);
  report.allocation.solver = kind;
  report.concavity_certified = certify_concavity(obj);
  return report;
}

}  // namespace

SolveReport solve_brute_force(const Objective& obj, const BruteForceOptions& options) {
  const std::int64_t count = composition_count(obj.n(), obj.m());
  require(count <= options.budget, ErrorCode::budget_exceeded,
          "brute force needs " + std::to_string(count) + " compositions, budget is " +
              std::to_string(options.budget) + "; use the greedy solver");
  const int workers = std::max(1, std::min(options.workers, obj.n() + 1));

  std::vector<int> lo(static_cast<std::size_t>(obj.m()), 0);
  std::vector<int> hi(static_cast<std::size_t>(obj.m()), obj.n());
  std::vector<Best> parts(static_cast<std::size_t>(workers));
  if (workers == 1) {
    parts[0] = BoxEnumerator(obj, lo, hi).run();
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] { parts[w] = BoxEnumerator(obj, lo, hi).run(workers, w); });
    }
  }
  Best best;
  for (const auto& part : parts) best.merge(part);

  SolveReport report = make_report(obj, best.counts, SolverKind::brute_force);
  report.ties = best.ties;
  return report;
}

SolveReport solve_greedy(const Objective& obj) {
  const int m = obj.m();
  std::vector<int> counts(static_cast<std::size_t>(m), 0);
  for (int step = 0; step < obj.n(); ++step) {
    int best_t = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < m; ++t) {
      const double g = obj.p(t) * obj.curve(t).gain[static_cast<std::size_t>(counts[t])];
      if (g >= best_gain) {
        best_gain = g;
        best_t = t;
      }
    }
    ++counts[static_cast<std::size_t>(best_t)];
  }
  SolveReport report = make_report(obj, std::move(counts), SolverKind::greedy);
  report.heuristic = !report.concavity_certified;
  return report;
}

SolveReport solve_relaxed_rounded(const Objective& obj) {
  std::vector<double> x = continuous_optimum(obj);
  const int m = obj.m();
  const int n = obj.n();
  std::vector<int> lo(static_cast<std::size_t>(m)), hi(static_cast<std::size_t>(m));
  for (int t = 0; t < m; ++t) {
    const int base = static_cast<int>(std::floor(x[t]));
    lo[t] = std::clamp(base - m + 1, 0, n);
    hi[t] = std::clamp(base + m - 1, 0, n);
  }
  Best best = BoxEnumerator(obj, lo, hi).run();
  require(best.ties > 0, ErrorCode::no_closed_form,
          "no composition within the rounding window of the continuous optimum");

  SolveReport report = make_report(obj, best.counts, SolverKind::relaxed_rounded);
  report.relaxed_optimum = std::move(x);
  return report;
}

SolveReport solve_brute_force(const ObjectiveSpec& spec, const BruteForceOptions& options) {
  return solve_brute_force(*objective_for(spec), options);
}

SolveReport solve_greedy(const ObjectiveSpec& spec) { return solve_greedy(*objective_for(spec)); }

SolveReport solve_relaxed_rounded(const ObjectiveSpec& spec) {
  return solve_relaxed_rounded(*objective_for(spec));
}

CrossCheckReport cross_check(const Objective& obj, const BruteForceOptions& options) {
  CrossCheckReport report;
  auto attempt = [&](const char* name, auto&& solve) -> std::optional<SolveReport> {
    try {
      return solve();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::budget_exceeded && e.code() != ErrorCode::no_closed_form) throw;
      report.skipped.push_back(std::string(name) + ": " + e.what());
      return std::nullopt;
    }
  };
  report.brute_force = attempt("brute_force", [&] { return solve_brute_force(obj, options); });
  report.greedy = solve_greedy(obj);
  report.relaxed = attempt("relaxed_rounded", [&] { return solve_relaxed_rounded(obj); });

  constexpr double kValueTolerance = 1e-9;
  auto compare = [&](const SolveReport& a, const SolveReport& b) {
    const double diff = std::abs(a.allocation.objective_value - b.allocation.objective_value);
    if (diff > kValueTolerance) {
      report.issues.push_back(std::string(to_string(a.allocation.solver)) + " and " +
                              to_string(b.allocation.solver) + " values differ by " +
                              format_double(diff));
    }
  };
  if (report.brute_force) {
    compare(*report.brute_force, *report.greedy);
    if (report.greedy->concavity_certified &&
        report.greedy->allocation.counts != report.brute_force->allocation.counts) {
      report.issues.push_back("certified greedy counts (" +
                              join(std::span<const int>(report.greedy->allocation.counts), ',') +
                              ") differ from brute force (" +
                              join(std::span<const int>(report.brute_force->allocation.counts), ',') +
                              ")");
    }
    if (report.relaxed) compare(*report.brute_force, *report.relaxed);
  } else if (report.relaxed) {
    compare(*report.greedy, *report.relaxed);
  }
  return report;
}

CrossCheckReport cross_check(const ObjectiveSpec& spec, const BruteForceOptions& options) {
  return cross_check(*objective_for(spec), options);
}

}  // namespace divrec
