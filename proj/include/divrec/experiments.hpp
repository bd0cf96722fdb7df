#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "divrec/allocator.hpp"
#include "divrec/distribution.hpp"
#include "divrec/diversity.hpp"
#include "divrec/objective.hpp"

namespace divrec {

enum class ExperimentKind { heatmap, bernoulli_chart, convergence, solve_once };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::heatmap;

  int n = 30;
  std::vector<double> p = {0.7, 0.3};
  int k = 1;
  bool k_equals_n = false;  // convergence: k tracks n
  int k_min = 1;            // heatmap k-range; k_max = 0 means n
  int k_max = 0;

  // heatmap grids: Beta(beta_first, beta) and Pareto(alpha)
  std::vector<double> beta_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  double beta_first = 1.0;
  std::vector<double> pareto_grid = {1.5, 2.0, 3.0, 5.0};

  // Monte Carlo order statistics
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int workers = 4;
  std::filesystem::path cache_dir;  // empty: no cache

  // Bernoulli chart
  double q = 0.4;
  std::vector<std::vector<double>> p_pairs = {{0.9, 0.1}, {0.7, 0.3}, {0.5, 0.5}};
  std::vector<int> n_grid;  // empty: 1..60, 100, 200, 500, 1000

  // solve_once / convergence
  std::vector<std::string> models = {"uniform"};
  SolverKind solver = SolverKind::greedy;
  std::int64_t brute_budget = 10'000'000;
  SettingParams setting;
  std::vector<int> schedule = {50, 100, 200, 500, 1000};

  std::string output;  // empty: stdout
  OutputFormat format = OutputFormat::csv;
};

/// Missing keys keep their defaults; unknown keys are rejected. Throws
/// Error(invalid_argument) on schema problems.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);

struct HeatmapRow {
  std::string dist;  // "beta" or "pareto"
  double param = 0.0;
  int k = 0;
  std::vector<int> counts;
  double objective = 0.0;
  std::optional<GammaFit> fit;
};

std::vector<HeatmapRow> run_heatmap(const ExperimentConfig& cfg);
/// Columns: dist,param,k,a_1..a_m,objective,gamma_fit,residual.
void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapRow>& rows, int m);

struct ChartRow {
  std::vector<double> p;
  int n = 0;
  std::vector<int> counts;
  double r_1 = 0.0;
  double objective = 0.0;
};

std::vector<int> default_chart_grid();
std::vector<ChartRow> run_bernoulli_chart(const ExperimentConfig& cfg);
/// Columns: p_1,p_2,n,a_1,a_2,r_1,objective.
void write_chart_csv(std::ostream& out, const std::vector<ChartRow>& rows);

struct ConvergenceResult {
  PredictedLimit prediction;
  std::vector<ProbePoint> points;
};

ConvergenceResult run_convergence(const ExperimentConfig& cfg);

/// Objective spec described by the config at its n and k. Models without
/// closed-form order statistics get a Monte Carlo table of depth max_a
/// (default n).
ObjectiveSpec spec_from_config(const ExperimentConfig& cfg, int n, int k,
                               std::optional<int> max_a = std::nullopt);

SolveReport solve_once(const ExperimentConfig& cfg);

nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const ObjectiveSpec& spec);
/// Inverse of to_json(ObjectiveSpec). Tables are rebuilt from the recorded
/// sampling parameters.
ObjectiveSpec spec_from_json(const nlohmann::json& j);

}  // namespace divrec
