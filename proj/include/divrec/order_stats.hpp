#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "divrec/distribution.hpp"

namespace divrec {

/// Expected i-th smallest of a independent draws (1 <= i <= a), when a closed
/// form exists: Uniform, Exponential and FiniteDiscrete. Everything else
/// (Beta, Pareto, both Bernoulli variants) yields nullopt. Throws
/// Error(out_of_range) for a bad index.
std::optional<double> order_stat_mean_analytic(const Distribution& dist, int i, int a);

/// Gamma((alpha-1)/alpha) * a^(1/alpha): the large-a behaviour of the expected
/// Pareto maximum. Asymptotic reference only; never used to fill tables.
double pareto_max_asymptotic(double alpha, int a);

struct TableSource {
  enum class Kind { analytic, monte_carlo };
  Kind kind = Kind::analytic;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  int workers = 1;

  std::string describe() const;
  friend bool operator==(const TableSource&, const TableSource&) = default;
};

/// Dense triangle of mu(i, a) for 1 <= i <= a <= max_a with a standard error per
/// cell (zero for analytic cells).
class OrderStatTable {
 public:
  OrderStatTable(Distribution dist, int max_a, TableSource source, std::vector<double> mu,
                 std::vector<double> se);

  const Distribution& dist() const { return dist_; }
  int max_a() const { return max_a_; }
  const TableSource& source() const { return source_; }
  bool is_analytic() const { return source_.kind == TableSource::Kind::analytic; }

  double mu(int i, int a) const { return mu_[index(i, a)]; }
  double se(int i, int a) const { return se_[index(i, a)]; }

  const std::vector<double>& raw_mu() const { return mu_; }
  const std::vector<double>& raw_se() const { return se_; }

  static std::size_t cell_count(int max_a) {
    return static_cast<std::size_t>(max_a) * (max_a + 1) / 2;
  }

 private:
  std::size_t index(int i, int a) const;

  Distribution dist_;
  int max_a_;
  TableSource source_;
  std::vector<double> mu_;
  std::vector<double> se_;
};

struct TableOptions {
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  /// Sample partitions. Output is bit-identical for a fixed (seed, workers).
  int workers = 4;
  /// Upper bound on max_a * samples.
  double budget = 2e9;
  /// Sample even when closed forms exist (used to validate the sampler).
  bool force_monte_carlo = false;
};

/// Analytic when the distribution admits closed forms, Monte Carlo otherwise:
/// for each a, `samples` independent sets of a draws are sorted and averaged
/// per rank.
OrderStatTable build_order_stat_table(const Distribution& dist, int max_a,
                                      const TableOptions& options = {});

/// Columns: dist,params,i,a,mu,se,source.
void write_table_csv(std::ostream& out, const OrderStatTable& table);

// Binary cache keyed by (distribution, max_a, samples, seed, workers). Analytic
// tables are never cached.
std::string table_cache_key(const Distribution& dist, int max_a, const TableOptions& options);
std::optional<OrderStatTable> load_cached_table(const std::filesystem::path& dir,
                                                const Distribution& dist, int max_a,
                                                const TableOptions& options);
void save_cached_table(const std::filesystem::path& dir, const OrderStatTable& table);

/// Loads from `cache_dir` when present, otherwise builds and stores. An empty
/// path disables caching.
OrderStatTable build_order_stat_table_cached(const Distribution& dist, int max_a,
                                             const TableOptions& options,
                                             const std::filesystem::path& cache_dir);

/// Directory named by DIVREC_CACHE_DIR, or empty.
std::filesystem::path cache_dir_from_env();

}  // namespace divrec
