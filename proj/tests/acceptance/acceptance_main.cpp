// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "divrec/allocator.hpp"
#include "divrec/diversity.hpp"
#include "divrec/error.hpp"
#include "divrec/experiments.hpp"
#include "divrec/format.hpp"
#include "divrec/order_stats.hpp"

using namespace divrec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string counts_str(const std::vector<int>& c) {
  return "(" + join(std::span<const int>(c), ',') + ")";
}

std::vector<double> random_p(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> p(m);
  double s = 0.0;
  for (double& x : p) s += (x = unit(rng));
  for (double& x : p) x /= s;
  double rest = 1.0;
  for (int t = 0; t + 1 < m; ++t) rest -= p[t];
  p[m - 1] = rest;
  return p;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  int value_mismatch = 0, count_mismatch = 0, certified = 0;
  std::string first_issue;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 2);
    const int n = 1 + static_cast<int>(rng() % 40);
    const int k = 1 + static_cast<int>(rng() % n);
    const int family = static_cast<int>(rng() % 4);
    std::vector<Distribution> models;
    for (int t = 0; t < m; ++t) {
      switch (family) {
        case 0: models.push_back(bernoulli(unit(rng))); break;
        case 1: models.push_back(decaying_bernoulli(unit(rng), 2 * unit(rng), 2 * unit(rng))); break;
        case 2: models.push_back(uniform()); break;
        default: models.push_back(exponential(0.25 + 2 * unit(rng))); break;
      }
    }
    const Objective obj(make_spec(make_profile(random_p(rng, m), models), n, k));
    const auto bf = solve_brute_force(obj);
    const auto g = solve_greedy(obj);
    if (g.allocation.objective_value != bf.allocation.objective_value) {
      ++value_mismatch;
      if (first_issue.empty()) {
        first_issue = "trial " + std::to_string(trial) + " value " +
                      format_double(g.allocation.objective_value) + " vs " +
                      format_double(bf.allocation.objective_value);
      }
    }
    if (g.concavity_certified) {
      ++certified;
      if (g.allocation.counts != bf.allocation.counts) {
        ++count_mismatch;
        if (first_issue.empty()) {
          first_issue = "trial " + std::to_string(trial) + " counts " +
                        counts_str(g.allocation.counts) + " vs " + counts_str(bf.allocation.counts);
        }
      }
    }
  }
  Outcome out;
  out.pass = value_mismatch == 0 && count_mismatch == 0;
  out.detail = "200 instances, " + std::to_string(certified) + " certified, " +
               std::to_string(value_mismatch) + " value and " + std::to_string(count_mismatch) +
               " count mismatches";
  if (!first_issue.empty()) out.detail += "; first: " + first_issue;
  return out;
}

Outcome uniform_square_root() {
  const std::vector<double> p = {0.7, 0.3};
  const double bound = 3.0 / 200.0;
  Outcome out{true, ""};
  for (int k : {1, 5, 20}) {
    const auto bf = solve_brute_force(make_spec(make_profile(p, {uniform()}), 200, k));
    const double r1 = representation(bf.allocation).r[0];
    const double dev = std::abs(r1 - 0.60435);
    out.pass = out.pass && dev <= bound;
    out.detail += "k=" + std::to_string(k) + " r_1=" + format_double(r1) + " ";
  }
  out.detail += "(|r_1 - 0.60435| <= 0.015)";
  return out;
}

Outcome exponential_calibration() {
  const auto g = solve_greedy(make_spec(make_profile({0.7, 0.3}, {exponential(1.0)}), 100'000, 1));
  const double r1 = representation(g.allocation).r[0];
  return {std::abs(r1 - 0.7) <= 0.01 && g.concavity_certified,
          "n=100000 r_1=" + format_double(r1) + " certified=" +
              (g.concavity_certified ? "yes" : "no")};
}

Outcome all_items_consumed() {
  int checked = 0, wrong = 0;
  std::string first;
  auto expect = [&](const ObjectiveSpec& spec, int at) {
    const auto bf = solve_brute_force(spec);
    std::vector<int> want(spec.profile.m(), 0);
    want[at] = spec.n;
    ++checked;
    if (bf.allocation.counts != want) {
      ++wrong;
      if (first.empty()) first = "n=" + std::to_string(spec.n) + " got " + counts_str(bf.allocation.counts);
    }
  };
  for (int n = 1; n <= 100; ++n) {
    for (const Distribution& d : {uniform(), exponential(2.0), beta(2.0, 5.0), pareto(1.5),
                                  bernoulli(0.3), finite_discrete({2, 0}, {0.5, 0.5})}) {
      expect(make_spec(make_profile({0.6, 0.4}, {d}), n, n), 0);
      expect(make_spec(make_profile({0.25, 0.45, 0.3}, {d}), n, n), 1);
    }
    // p.q = (0.14, 0.18): type 2 wins although type 1 is likelier
    expect(make_spec(make_profile({0.7, 0.3}, {bernoulli(0.2), bernoulli(0.6)}), n, n), 1);
    expect(make_spec(make_profile({0.2, 0.5, 0.3}, {bernoulli(0.9), bernoulli(0.3), bernoulli(0.5)}),
                     n, n),
           0);
  }
  Outcome out{wrong == 0, std::to_string(checked) + " instances n<=100, " + std::to_string(wrong) +
                              " not one-hot at the predicted type"};
  if (!first.empty()) out.detail += "; first: " + first;
  return out;
}

Outcome varying_success() {
  SettingParams sp;
  sp.setting = Setting::varying_top1;
  sp.p = {0.7, 0.3};
  sp.q = {0.5, 0.1};
  const auto limit = predict_limit(sp);
  auto solve = [](std::vector<double> p) {
    return solve_greedy(make_spec(make_profile(std::move(p), {bernoulli(0.5), bernoulli(0.1)}), 2000, 1));
  };
  const auto a = solve({0.7, 0.3});
  const auto b = solve({0.3, 0.7});
  const auto r = representation(a.allocation).r;
  double gap = 0.0;
  for (int t = 0; t < 2; ++t) gap = std::max(gap, std::abs(r[t] - limit.r_inf[t]));
  const bool gap_ok = gap <= 0.02;
  const bool paradox = r[1] > r[0];
  const int shift = std::abs(a.allocation.counts[0] - b.allocation.counts[0]);
  const bool same = shift <= 1;
  return {gap_ok && paradox && same && a.concavity_certified,
          "gap=" + format_double(gap) + (gap_ok ? " ok" : " FAIL") + ", r_2>r_1 " +
              (paradox ? "ok" : "FAIL") + ", p swapped: " + counts_str(a.allocation.counts) +
              " vs " + counts_str(b.allocation.counts) + " differ by " + std::to_string(shift) +
              (same ? " ok" : " FAIL (needs <= 1)")};
}

Outcome decaying_success() {
  const std::vector<double> p = {0.7, 0.3};
  struct Case {
    double alpha;
    bool k_is_n;
    double target;
  };
  Outcome out{true, ""};
  for (const Case& c : {Case{0.5, false, 0.0}, Case{2.0, false, 0.5}, Case{2.0, true, 0.5},
                        Case{1.0, false, 0.5}}) {
    const int n = 5000;
    const auto g = solve_greedy(
        make_spec(make_profile(p, {decaying_bernoulli(1.0, 1.0, c.alpha)}), n, c.k_is_n ? n : 1));
    const auto fit = fit_gamma(representation(g.allocation).r, p);
    const bool ok = g.concavity_certified && std::abs(fit.gamma - c.target) <= 0.05;
    out.pass = out.pass && ok;
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += "alpha=" + format_double(c.alpha) + (c.k_is_n ? ",k=n" : ",k=1") +
                  " gamma=" + format_double(fit.gamma) + (ok ? "" : "(FAIL)");
  }
  return out;
}

Outcome monte_carlo_tables() {
  TableOptions opt;
  opt.samples = 1'000'000;
  opt.seed = 0;
  opt.force_monte_carlo = true;
  int cells = 0, within = 0;
  std::string per;
  for (const Distribution& d : {uniform(), exponential(1.0)}) {
    const auto mc = build_order_stat_table(d, 30, opt);
    int here = 0, ok = 0;
    for (int a = 1; a <= 30; ++a) {
      for (int i = 1; i <= a; ++i) {
        ++here;
        if (std::abs(mc.mu(i, a) - *order_stat_mean_analytic(d, i, a)) <= 4.0 * mc.se(i, a)) ++ok;
      }
    }
    cells += here;
    within += ok;
    per += to_string(d) + " " + std::to_string(ok) + "/" + std::to_string(here) + " ";
  }
  const double frac = static_cast<double>(within) / cells;
  return {frac >= 0.99, per + "within 4 SE (" + format_double(100 * frac) + "%)"};
}

std::string heatmap_csv(const std::filesystem::path& path, std::vector<HeatmapRow>* rows_out) {
  ExperimentConfig cfg;  // defaults: n=30, p=(0.7,0.3), 10^6 samples, seed 0, 4 workers
  cfg.cache_dir.clear();
  const auto rows = run_heatmap(cfg);
  if (rows_out) *rows_out = rows;
  {
    std::ofstream out(path, std::ios::binary);
    write_heatmap_csv(out, rows, 2);
  }
  std::ifstream in(path, std::ios::binary);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return bytes.str();
}

const std::filesystem::path kFirstRun = "acceptance_heatmap_1.csv";
const std::filesystem::path kSecondRun = "acceptance_heatmap_2.csv";

Outcome heatmap_band() {
  std::vector<HeatmapRow> rows;
  heatmap_csv(kFirstRun, &rows);
  Outcome out{true, ""};
  int seen = 0;
  std::string a1;
  for (const auto& row : rows) {
    if (row.dist != "beta" || row.param != 1.0 || row.k > 11) continue;
    ++seen;
    const int x = row.counts[0];
    out.pass = out.pass && x >= 16 && x <= 21;
    a1 += (a1.empty() ? "" : ",") + std::to_string(x);
  }
  out.pass = out.pass && seen == 11;
  out.detail = "Beta(1,1) k=1..11 a_1=" + a1 + " (band [16,21]); " + std::to_string(rows.size()) +
               " rows written to " + kFirstRun.string();
  return out;
}

Outcome heatmap_determinism() {
  if (!std::filesystem::exists(kFirstRun)) heatmap_csv(kFirstRun, nullptr);
  std::ifstream in(kFirstRun, std::ios::binary);
  std::ostringstream first;
  first << in.rdbuf();
  const std::string second = heatmap_csv(kSecondRun, nullptr);
  const bool same = !second.empty() && first.str() == second;
  return {same, std::to_string(second.size()) + " bytes, " + (same ? "identical" : "different") +
                    " across two runs (seed 0, 4 workers)"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", 10, oracle_equivalence},
      {2, "uniform square-root shares", 1, uniform_square_root},
      {3, "exponential calibration", 5, exponential_calibration},
      {4, "k = n one-hot", 0, all_items_consumed},
      {5, "varying success probability", 0, varying_success},
      {6, "decaying success probability", 30, decaying_success},
      {7, "Monte Carlo order statistics", 0, monte_carlo_tables},
      {8, "heatmap band", 600, heatmap_band},
      {9, "heatmap determinism", 0, heatmap_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = out.pass;
    std::string timing = format_double(std::round(secs * 100) / 100) + " s";
    if (c.limit_seconds > 0) {
      timing += " of " + format_double(c.limit_seconds) + " s";
      if (secs > c.limit_seconds) {
        pass = false;
        timing += " EXCEEDED";
      }
    }
    if (!pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
