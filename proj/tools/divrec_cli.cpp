// divrec: optimal top-k set composition experiments.
//
// Exit status: 0 ok, 2 bad configuration, 3 budget exceeded, 4 limit
// hypothesis violated, 1 anything else.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "divrec/allocator.hpp"
#include "divrec/diversity.hpp"
#include "divrec/error.hpp"
#include "divrec/experiments.hpp"
#include "divrec/format.hpp"
#include "divrec/order_stats.hpp"

using namespace divrec;
using nlohmann::json;

namespace {

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::budget_exceeded: return 3;
    case ErrorCode::hypothesis_violated: return 4;
    default: return 2;
  }
}

// Writes to cfg.output, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << text;
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

// CSV rows as an array of objects keyed by the header. Empty cells become
// null and numeric cells become numbers.
json csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const auto split = [](const std::string& row) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t comma; (comma = row.find(',', start)) != std::string::npos; start = comma + 1) {
      cells.push_back(row.substr(start, comma - start));
    }
    cells.push_back(row.substr(start));
    return cells;
  };
  const auto header = split(line);
  json rows = json::array();
  while (std::getline(in, line)) {
    const auto cells = split(line);
    json row = json::object();
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) {
      const std::string& c = cells[i];
      const char* last = c.data() + c.size();
      long long n = 0;
      double x = 0.0;
      if (c.empty()) {
        row[header[i]] = nullptr;
      } else if (auto r = std::from_chars(c.data(), last, n); r.ec == std::errc{} && r.ptr == last) {
        row[header[i]] = n;
      } else if (auto r = std::from_chars(c.data(), last, x);
                 r.ec == std::errc{} && r.ptr == last && std::isfinite(x)) {
        row[header[i]] = x;
      } else {
        row[header[i]] = c;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit_table(const ExperimentConfig& cfg, const std::string& csv) {
  emit(cfg.output, cfg.format == OutputFormat::json ? csv_to_json(csv).dump(2) + "\n" : csv);
}

json gamma_json(double g) { return std::isinf(g) ? json("inf") : json(g); }

json limit_json(const PredictedLimit& limit) {
  json j;
  j["setting"] = to_string(limit.setting);
  j["r_inf"] = limit.r_inf;
  j["gamma_inf"] = limit.gamma_inf ? gamma_json(*limit.gamma_inf) : json(nullptr);
  j["finite_n_bound"] = limit.finite_n_bound ? json(*limit.finite_n_bound) : json(nullptr);
  return j;
}

struct Flags {
  CLI::App* app;
  ExperimentConfig& cfg;

  // --config must be registered first: CLI11 runs option callbacks in
  // definition order, so explicit flags land on top of the loaded file.
  void config() {
    app->add_option_function<std::string>(
        "--config", [this](const std::string& path) {
          const ExperimentKind kind = cfg.experiment;
          const auto env_cache = cfg.cache_dir;
          cfg = load_config(path);
          cfg.experiment = kind;
          if (cfg.cache_dir.empty()) cfg.cache_dir = env_cache;
        },
        "JSON experiment config; explicit flags override it");
  }
  void p() {
    app->add_option_function<std::string>(
        "-p,--p", [this](const std::string& s) { cfg.p = parse_double_list(s); },
        "type likelihoods, comma separated");
  }
  void n() { app->add_option("-n,--n", cfg.n, "number of recommended items"); }
  void k() { app->add_option("-k,--k", cfg.k, "consumption constraint"); }
  void models() {
    app->add_option_function<std::vector<std::string>>(
        "--model", [this](const std::vector<std::string>& v) { cfg.models = v; },
        "value model, one per type or one shared (uniform, exp:L, beta:A,B, pareto:A, "
        "bernoulli:Q, decaying:C,D,ALPHA, discrete:V/P,...)");
  }
  void sampling() {
    app->add_option("--samples", cfg.samples, "Monte Carlo sets per a");
    app->add_option("--seed", cfg.seed, "RNG seed");
    app->add_option("--workers", cfg.workers, "sample partitions / threads");
    app->add_option_function<std::string>(
        "--cache-dir", [this](const std::string& s) { cfg.cache_dir = s; },
        "order-stat cache directory (default $DIVREC_CACHE_DIR)");
    app->add_flag_callback("--no-cache", [this] { cfg.cache_dir.clear(); }, "disable the cache");
  }
  void budget() { app->add_option("--budget", cfg.brute_budget, "brute-force composition budget"); }
  void output() {
    app->add_option("-o,--output", cfg.output, "output file (default stdout)");
    app->add_option_function<std::string>(
        "--format", [this](const std::string& f) {
          require(f == "csv" || f == "json", ErrorCode::invalid_argument, "format is csv or json");
          cfg.format = f == "csv" ? OutputFormat::csv : OutputFormat::json;
        },
        "table output: csv or json");
  }
  void setting() {
    app->add_option_function<std::string>(
        "--setting", [this](const std::string& s) { cfg.setting.setting = parse_setting(s); },
        "finite-support, bounded-tail, exponential-tail, pareto-tail, shared-knn, decaying-top1, decaying-knn, "
        "varying-top1, varying-knn, uniform-bound, shared-bernoulli, calibration, multipref")
        ->required();
    app->add_option("--beta", cfg.setting.beta, "bounded-tail tail exponent");
    app->add_option("--alpha", cfg.setting.alpha, "Pareto shape or Bernoulli decay rate");
    app->add_option("--c", cfg.setting.c, "decay scale");
    app->add_option_function<std::string>(
        "--q", [this](const std::string& s) { cfg.setting.q = parse_double_list(s); },
        "per-type success probabilities");
  }
};

int cmd_solve(ExperimentConfig& cfg, bool as_json) {
  validate(cfg);
  const ObjectiveSpec spec = spec_from_config(cfg, cfg.n, cfg.k);
  const SolveReport report = solve_once(cfg);
  const auto obj = objective_for(spec);
  if (as_json) {
    json j = to_json(report);
    j["spec"] = to_json(spec);
    j["warnings"] = obj->warnings();
    emit(cfg.output, j.dump(2) + "\n");
    return 0;
  }
  std::ostringstream out;
  out << "counts: " << join(std::span<const int>(report.allocation.counts), ',') << '\n'
      << "value: " << format_double(report.allocation.objective_value) << '\n'
      << "solver: " << to_string(report.allocation.solver) << '\n'
      << "concavity_certified: " << (report.concavity_certified ? "true" : "false") << '\n';
  if (report.heuristic) out << "heuristic: true\n";
  if (report.ties) out << "ties: " << *report.ties << '\n';
  if (!report.relaxed_optimum.empty()) {
    out << "relaxed_optimum: " << join(std::span<const double>(report.relaxed_optimum), ',')
        << '\n';
  }
  for (const auto& w : obj->warnings()) std::cerr << "warning: " << w << '\n';
  emit(cfg.output, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal top-k recommendation-set composition and diversity experiments"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  cfg.cache_dir = cache_dir_from_env();

  auto* solve = app.add_subcommand("solve", "solve one allocation problem");
  bool solve_json = false;
  {
    Flags f{solve, cfg};
    f.config();
    f.p();
    f.n();
    f.k();
    f.models();
    solve->add_option_function<std::string>(
        "--solver", [&](const std::string& s) { cfg.solver = parse_solver(s); },
        "greedy (default), brute_force, relaxed_rounded");
    f.budget();
    f.sampling();
    f.output();
    solve->add_flag("--json", solve_json, "print the report as JSON");
  }

  auto* heatmap = app.add_subcommand("heatmap", "Beta/Pareto sweep over k with brute force");
  {
    Flags f{heatmap, cfg};
    f.config();
    f.p();
    f.n();
    heatmap->add_option_function<std::string>(
        "--k-range",
        [&](const std::string& s) {
          auto r = parse_int_list(s);
          require(r.size() == 2, ErrorCode::invalid_argument, "--k-range takes KMIN,KMAX");
          cfg.k_min = r[0];
          cfg.k_max = r[1];
        },
        "KMIN,KMAX (default 1,n)");
    heatmap->add_option_function<std::string>(
        "--beta-grid", [&](const std::string& s) { cfg.beta_grid = parse_double_list(s); },
        "second Beta parameters");
    heatmap->add_option("--beta-first", cfg.beta_first, "first Beta parameter");
    heatmap->add_option_function<std::string>(
        "--pareto-grid", [&](const std::string& s) { cfg.pareto_grid = parse_double_list(s); },
        "Pareto shapes");
    f.sampling();
    f.budget();
    f.output();
  }

  auto* chart = app.add_subcommand("chart", "i.i.d. Bernoulli r_1 against n (k = 1)");
  {
    Flags f{chart, cfg};
    f.config();
    chart->add_option("--q", cfg.q, "success probability");
    chart->add_option_function<std::string>(
        "--p-pairs",
        [&](const std::string& s) {
          cfg.p_pairs.clear();
          std::size_t start = 0;
          while (start <= s.size()) {
            const auto end = std::min(s.find(';', start), s.size());
            cfg.p_pairs.push_back(parse_double_list(s.substr(start, end - start)));
            start = end + 1;
          }
        },
        "pairs like 0.9,0.1;0.7,0.3");
    chart->add_option_function<std::string>(
        "--n-grid", [&](const std::string& s) { cfg.n_grid = parse_int_list(s); },
        "n values (default 1..60,100,200,500,1000)");
    f.budget();
    f.output();
  }

  auto* converge = app.add_subcommand("converge", "gap to a predicted limit as n grows");
  {
    Flags f{converge, cfg};
    f.config();
    f.setting();
    f.p();
    f.k();
    converge->add_flag_callback("--k-equals-n", [&] { cfg.k_equals_n = true; }, "use k = n");
    f.models();
    converge->add_option_function<std::string>(
        "--schedule", [&](const std::string& s) { cfg.schedule = parse_int_list(s); },
        "n values, comma separated");
    f.sampling();
    f.budget();
    f.output();
  }

  auto* orderstats = app.add_subcommand("orderstats", "expected order-statistic table as CSV");
  std::string dist_text;
  int max_a = 10;
  bool force_mc = false;
  {
    Flags f{orderstats, cfg};
    orderstats->add_option("--dist", dist_text, "distribution")->required();
    orderstats->add_option("--max-a", max_a, "largest sample count");
    orderstats->add_flag("--monte-carlo", force_mc, "sample even when closed forms exist");
    f.sampling();
    f.output();
  }

  auto* predict = app.add_subcommand("predict", "closed-form limiting representation");
  {
    Flags f{predict, cfg};
    f.setting();
    predict->add_option_function<std::string>(
        "-p,--p", [&](const std::string& s) { cfg.setting.p = parse_double_list(s); },
        "likelihoods (p1,p2,p12 for multipref)");
    predict->add_option("-n,--n", cfg.setting.n, "n (uniform-bound)");
    predict->add_option("-k,--k", cfg.setting.k, "k (uniform-bound)");
  }

  auto* fit = app.add_subcommand("fit-gamma", "fit gamma to a representation");
  std::string r_text, fit_p_text;
  {
    fit->add_option("--r", r_text, "representation, comma separated")->required();
    fit->add_option("-p,--p", fit_p_text, "likelihoods, comma separated")->required();
  }

  try {
    app.parse(argc, argv);

    if (*solve) {
      cfg.experiment = ExperimentKind::solve_once;
      return cmd_solve(cfg, solve_json || cfg.format == OutputFormat::json);
    }
    if (*heatmap) {
      cfg.experiment = ExperimentKind::heatmap;
      std::ostringstream out;
      write_heatmap_csv(out, run_heatmap(cfg), static_cast<int>(cfg.p.size()));
      emit_table(cfg, out.str());
    } else if (*chart) {
      cfg.experiment = ExperimentKind::bernoulli_chart;
      std::ostringstream out;
      write_chart_csv(out, run_bernoulli_chart(cfg));
      emit_table(cfg, out.str());
    } else if (*converge) {
      cfg.experiment = ExperimentKind::convergence;
      const ConvergenceResult result = run_convergence(cfg);
      std::ostringstream out;
      write_probe_csv(out, result.points, static_cast<int>(result.prediction.r_inf.size()));
      emit_table(cfg, out.str());
    } else if (*orderstats) {
      TableOptions opt;
      opt.samples = cfg.samples;
      opt.seed = cfg.seed;
      opt.workers = cfg.workers;
      opt.force_monte_carlo = force_mc;
      const auto table =
          build_order_stat_table_cached(parse_distribution(dist_text), max_a, opt, cfg.cache_dir);
      std::ostringstream out;
      write_table_csv(out, table);
      emit_table(cfg, out.str());
    } else if (*predict) {
      std::cout << limit_json(predict_limit(cfg.setting)).dump(2) << '\n';
    } else if (*fit) {
      const auto r = parse_double_list(r_text);
      const auto p = parse_double_list(fit_p_text);
      const GammaFit g = fit_gamma(r, p);
      json j{{"gamma", gamma_json(g.gamma)}, {"residual", g.residual}, {"unimodal", g.unimodal}};
      std::cout << j.dump(2) << '\n';
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "divrec: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "divrec: " << e.what() << '\n';
    return 1;
  }
}
