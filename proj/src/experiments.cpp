#include "divrec/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::heatmap: return "heatmap";
    case ExperimentKind::bernoulli_chart: return "bernoulli_chart";
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::solve_once: return "solve_once";
  }
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (auto k : {ExperimentKind::heatmap, ExperimentKind::bernoulli_chart,
                 ExperimentKind::convergence, ExperimentKind::solve_once}) {
    if (name == to_string(k)) return k;
  }
  if (name == "chart") return ExperimentKind::bernoulli_chart;
  if (name == "solve") return ExperimentKind::solve_once;
  fail(ErrorCode::invalid_argument, "unknown experiment '" + name + "'");
}

namespace {

SettingParams setting_from_json(const json& j) {
  SettingParams sp;
  for (const auto& [key, v] : j.items()) {
    if (key == "name") sp.setting = parse_setting(v.get<std::string>());
    else if (key == "p") sp.p = v.get<std::vector<double>>();
    else if (key == "beta") sp.beta = v.get<double>();
    else if (key == "alpha") sp.alpha = v.get<double>();
    else if (key == "c") sp.c = v.get<double>();
    else if (key == "q") sp.q = v.get<std::vector<double>>();
    else if (key == "n") sp.n = v.get<int>();
    else if (key == "k") sp.k = v.get<int>();
    else fail(ErrorCode::invalid_argument, "unknown setting key '" + key + "'");
  }
  return sp;
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const json& v) {
  if (key == "experiment") cfg.experiment = parse_experiment(v.get<std::string>());
  else if (key == "n") cfg.n = v.get<int>();
  else if (key == "m") {
    require(v.get<int>() == static_cast<int>(cfg.p.size()), ErrorCode::invalid_argument,
            "'m' must equal the length of 'p'");
  } else if (key == "p") cfg.p = v.get<std::vector<double>>();
  else if (key == "k") cfg.k = v.get<int>();
  else if (key == "k_equals_n") cfg.k_equals_n = v.get<bool>();
  else if (key == "k_range") {
    auto r = v.get<std::vector<int>>();
    require(r.size() == 2, ErrorCode::invalid_argument, "'k_range' is [k_min, k_max]");
    cfg.k_min = r[0];
    cfg.k_max = r[1];
  } else if (key == "beta_grid") cfg.beta_grid = v.get<std::vector<double>>();
  else if (key == "beta_first") cfg.beta_first = v.get<double>();
  else if (key == "pareto_grid") cfg.pareto_grid = v.get<std::vector<double>>();
  else if (key == "samples") cfg.samples = v.get<std::int64_t>();
  else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
  else if (key == "workers") cfg.workers = v.get<int>();
  else if (key == "cache_dir") cfg.cache_dir = v.get<std::string>();
  else if (key == "q") cfg.q = v.get<double>();
  else if (key == "p_pairs") cfg.p_pairs = v.get<std::vector<std::vector<double>>>();
  else if (key == "n_grid") cfg.n_grid = v.get<std::vector<int>>();
  else if (key == "models") cfg.models = v.get<std::vector<std::string>>();
  else if (key == "solver") cfg.solver = parse_solver(v.get<std::string>());
  else if (key == "brute_budget") cfg.brute_budget = v.get<std::int64_t>();
  else if (key == "setting") cfg.setting = setting_from_json(v);
  else if (key == "schedule") cfg.schedule = v.get<std::vector<int>>();
  else if (key == "output") cfg.output = v.get<std::string>();
  else if (key == "format") {
    const auto f = v.get<std::string>();
    require(f == "csv" || f == "json", ErrorCode::invalid_argument, "format is csv or json");
    cfg.format = f == "csv" ? OutputFormat::csv : OutputFormat::json;
  } else {
    fail(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  require(j.is_object(), ErrorCode::invalid_argument, "config must be a JSON object");
  ExperimentConfig cfg;
  // p first so that "m" can be checked against it regardless of key order.
  if (j.contains("p")) apply_key(cfg, "p", j.at("p"));
  try {
    for (const auto& [key, v] : j.items()) {
      if (key != "p") apply_key(cfg, key, v);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& cfg) {
  const int m = static_cast<int>(cfg.p.size());
  require(m >= 1, ErrorCode::invalid_argument, "p must list at least one type");
  require(cfg.n >= m, ErrorCode::invalid_argument, "need n >= m");
  require(cfg.k >= 1 && cfg.k <= cfg.n, ErrorCode::invalid_argument, "need 1 <= k <= n");
  require(cfg.samples >= 1, ErrorCode::invalid_argument, "samples must be positive");
  require(cfg.workers >= 1, ErrorCode::invalid_argument, "workers must be positive");
  switch (cfg.experiment) {
    case ExperimentKind::heatmap: {
      require(!cfg.beta_grid.empty() || !cfg.pareto_grid.empty(), ErrorCode::invalid_argument,
              "heatmap needs a non-empty distribution grid");
      const int k_max = cfg.k_max == 0 ? cfg.n : cfg.k_max;
      require(cfg.k_min >= 1 && cfg.k_min <= k_max && k_max <= cfg.n,
              ErrorCode::invalid_argument, "k-range must satisfy 1 <= k_min <= k_max <= n");
      break;
    }
    case ExperimentKind::bernoulli_chart:
      require(!cfg.p_pairs.empty(), ErrorCode::invalid_argument, "chart needs p pairs");
      for (const auto& pair : cfg.p_pairs) {
        require(pair.size() == 2, ErrorCode::invalid_argument, "chart p pairs have two entries");
      }
      for (int n : cfg.n_grid) require(n >= 1, ErrorCode::invalid_argument, "chart n >= 1");
      break;
    case ExperimentKind::convergence:
      require(!cfg.schedule.empty(), ErrorCode::invalid_argument, "schedule must be non-empty");
      for (int n : cfg.schedule) {
        require(n >= 1 && (cfg.k_equals_n || n >= cfg.k), ErrorCode::invalid_argument,
                "every scheduled n must be at least k");
      }
      break;
    case ExperimentKind::solve_once:
      require(!cfg.models.empty(), ErrorCode::invalid_argument, "models must be non-empty");
      break;
  }
}

namespace {

TableOptions table_options(const ExperimentConfig& cfg) {
  TableOptions opt;
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  opt.workers = cfg.workers;
  return opt;
}

bool needs_table(const Distribution& d, int n, int k) {
  if (!is_iid(d) || std::holds_alternative<Bernoulli>(d)) return false;
  if (k >= n) return false;
  return !order_stat_mean_analytic(d, 1, 1).has_value();
}

std::vector<Distribution> parse_models(const std::vector<std::string>& names) {
  std::vector<Distribution> out;
  for (const auto& s : names) out.push_back(parse_distribution(s));
  return out;
}

// One table per type when any type lacks closed forms, else none.
std::vector<OrderStatTable> tables_for(const ExperimentConfig& cfg, const TypeProfile& profile,
                                       int n, int k, int max_a) {
  const bool any = std::any_of(profile.models.begin(), profile.models.end(),
                               [&](const Distribution& d) { return needs_table(d, n, k); });
  std::vector<OrderStatTable> tables;
  if (!any) return tables;
  for (const auto& d : profile.models) {
    tables.push_back(build_order_stat_table_cached(d, max_a, table_options(cfg), cfg.cache_dir));
  }
  return tables;
}

ObjectiveSpec assemble(const TypeProfile& profile, int n, int k,
                       const std::vector<OrderStatTable>& tables) {
  return tables.empty() ? make_spec(profile, n, k) : make_spec(profile, n, k, tables);
}

}  // namespace

ObjectiveSpec spec_from_config(const ExperimentConfig& cfg, int n, int k,
                               std::optional<int> max_a) {
  TypeProfile profile = make_profile(cfg.p, parse_models(cfg.models));
  return assemble(profile, n, k, tables_for(cfg, profile, n, k, max_a.value_or(n)));
}

std::vector<HeatmapRow> run_heatmap(const ExperimentConfig& cfg) {
  validate(cfg);
  const int k_max = cfg.k_max == 0 ? cfg.n : cfg.k_max;
  std::vector<std::pair<std::string, double>> grid;
  for (double b : cfg.beta_grid) grid.emplace_back("beta", b);
  for (double a : cfg.pareto_grid) grid.emplace_back("pareto", a);

  std::vector<HeatmapRow> rows;
  for (const auto& [name, param] : grid) {
    const Distribution dist = name == "beta" ? beta(cfg.beta_first, param) : pareto(param);
    const OrderStatTable table =
        build_order_stat_table_cached(dist, cfg.n, table_options(cfg), cfg.cache_dir);
    const TypeProfile profile = make_profile(cfg.p, {dist});
    for (int k = cfg.k_min; k <= k_max; ++k) {
      const Objective obj(make_spec(profile, cfg.n, k, {table}));
      BruteForceOptions bf;
      bf.budget = cfg.brute_budget;
      const SolveReport report = solve_brute_force(obj, bf);

      HeatmapRow row{name, param, k, report.allocation.counts, report.allocation.objective_value,
                     std::nullopt};
      try {
        row.fit = fit_gamma(representation(report.allocation).r, cfg.p);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::unidentifiable) throw;
      }
      rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const HeatmapRow& a, const HeatmapRow& b) {
    return std::tie(a.dist, a.param, a.k) < std::tie(b.dist, b.param, b.k);
  });
  return rows;
}

void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapRow>& rows, int m) {
  out << "dist,param,k";
  for (int t = 1; t <= m; ++t) out << ",a_" << t;
  out << ",objective,gamma_fit,residual\n";
  for (const auto& row : rows) {
    out << row.dist << ',' << format_double(row.param) << ',' << row.k;
    for (int c : row.counts) out << ',' << c;
    out << ',' << format_double(row.objective) << ',';
    if (row.fit) out << format_double(row.fit->gamma) << ',' << format_double(row.fit->residual);
    else out << ',';
    out << '\n';
  }
}

std::vector<int> default_chart_grid() {
  std::vector<int> grid;
  for (int n = 1; n <= 60; ++n) grid.push_back(n);
  for (int n : {100, 200, 500, 1000}) grid.push_back(n);
  return grid;
}

std::vector<ChartRow> run_bernoulli_chart(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::vector<int> grid = cfg.n_grid.empty() ? default_chart_grid() : cfg.n_grid;
  std::vector<ChartRow> rows;
  BruteForceOptions bf;
  bf.budget = cfg.brute_budget;
  for (const auto& p : cfg.p_pairs) {
    const TypeProfile profile = make_profile(p, {bernoulli(cfg.q)});
    for (int n : grid) {
      const Objective obj(make_spec(profile, n, 1));
      const SolveReport report = solve_brute_force(obj, bf);
      rows.push_back({p, n, report.allocation.counts,
                      representation(report.allocation).r[0],
                      report.allocation.objective_value});
    }
  }
  return rows;
}

void write_chart_csv(std::ostream& out, const std::vector<ChartRow>& rows) {
  out << "p_1,p_2,n,a_1,a_2,r_1,objective\n";
  for (const auto& row : rows) {
    out << format_double(row.p[0]) << ',' << format_double(row.p[1]) << ',' << row.n << ','
        << row.counts[0] << ',' << row.counts[1] << ',' << format_double(row.r_1) << ','
        << format_double(row.objective) << '\n';
  }
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  validate(cfg);
  SettingParams sp = cfg.setting;
  if (sp.p.empty()) sp.p = cfg.p;
  const int n_min = *std::min_element(cfg.schedule.begin(), cfg.schedule.end());
  const int n_max = *std::max_element(cfg.schedule.begin(), cfg.schedule.end());
  // The finite-n hypothesis is checked at the most restrictive scheduled n.
  if (sp.setting == Setting::uniform_bound) {
    sp.n = n_min;
    sp.k = cfg.k;
  }

  ConvergenceResult result;
  result.prediction = predict_limit(sp);

  const TypeProfile profile = make_profile(cfg.p, parse_models(cfg.models));
  const auto tables =
      cfg.k_equals_n ? std::vector<OrderStatTable>{} : tables_for(cfg, profile, n_max, cfg.k, n_max);
  auto family = [&](int n) { return assemble(profile, n, cfg.k_equals_n ? n : cfg.k, tables); };

  BruteForceOptions bf;
  bf.budget = cfg.brute_budget;
  result.points = convergence_probe(family, result.prediction, cfg.schedule, cfg.workers, bf);
  return result;
}

SolveReport solve_once(const ExperimentConfig& cfg) {
  validate(cfg);
  const Objective obj(spec_from_config(cfg, cfg.n, cfg.k));
  switch (cfg.solver) {
    case SolverKind::brute_force: {
      BruteForceOptions bf;
      bf.budget = cfg.brute_budget;
      return solve_brute_force(obj, bf);
    }
    case SolverKind::greedy: return solve_greedy(obj);
    case SolverKind::relaxed_rounded: return solve_relaxed_rounded(obj);
  }
  fail(ErrorCode::invalid_argument, "unknown solver");
}

json to_json(const SolveReport& report) {
  json j;
  j["counts"] = report.allocation.counts;
  j["objective_value"] = report.allocation.objective_value;
  j["solver"] = to_string(report.allocation.solver);
  j["concavity_certified"] = report.concavity_certified;
  j["heuristic"] = report.heuristic;
  j["ties"] = report.ties ? json(*report.ties) : json(nullptr);
  if (!report.relaxed_optimum.empty()) j["relaxed_optimum"] = report.relaxed_optimum;
  return j;
}

json to_json(const ObjectiveSpec& spec) {
  json j;
  j["p"] = spec.profile.p;
  std::vector<std::string> models;
  for (const auto& d : spec.profile.models) models.push_back(to_string(d));
  j["models"] = models;
  j["n"] = spec.n;
  j["k"] = spec.k;
  j["h_source"] = to_string(spec.source);
  if (!spec.tables.empty()) {
    const auto& s = spec.tables.front().source();
    j["table"] = {{"max_a", spec.tables.front().max_a()},
                  {"samples", s.samples},
                  {"seed", s.seed},
                  {"workers", s.workers}};
  }
  return j;
}

ObjectiveSpec spec_from_json(const json& j) {
  try {
    TypeProfile profile = make_profile(j.at("p").get<std::vector<double>>(),
                                       parse_models(j.at("models").get<std::vector<std::string>>()));
    const int n = j.at("n").get<int>();
    const int k = j.at("k").get<int>();
    const HSource source = j.contains("h_source")
                               ? parse_hsource(j.at("h_source").get<std::string>())
                               : make_spec(profile, n, k).source;
    if (source != HSource::order_stat_table) {
      ObjectiveSpec spec{std::move(profile), n, k, source, {}};
      validate(spec);
      return spec;
    }
    const json& t = j.at("table");
    TableOptions opt;
    opt.samples = t.value("samples", opt.samples);
    opt.seed = t.value("seed", opt.seed);
    opt.workers = t.value("workers", opt.workers);
    const int max_a = t.value("max_a", n);
    std::vector<OrderStatTable> tables;
    for (const auto& d : profile.models) {
      tables.push_back(build_order_stat_table_cached(d, max_a, opt, cache_dir_from_env()));
    }
    return make_spec(std::move(profile), n, k, std::move(tables));
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("objective spec: ") + e.what());
  }
}

}  // namespace divrec
