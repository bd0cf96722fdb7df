#include "divrec/order_stats.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "binomial.hpp"
#include "divrec/error.hpp"
#include "divrec/format.hpp"

namespace divrec {

namespace {

// mu(i, a) for a finite discrete law: v_min + sum over support gaps of
// gap_j * P[X_(i) > v_j], with P[X_(i) > v_j] = P[Binomial(a, F(v_j)) <= i - 1].
double finite_discrete_order_mean(const FiniteDiscrete& f, int i, int a) {
  const std::size_t s = f.values.size();
  double value = f.values[s - 1];
  double cdf = 0.0;
  // Walk the support in ascending order.
  for (std::size_t idx = s; idx-- > 1;) {
    cdf += f.probs[idx];
    double gap = f.values[idx - 1] - f.values[idx];
    value += gap * detail::binomial_cdf(a, std::min(cdf, 1.0), i - 1);
  }
  return value;
}

}  // namespace

std::optional<double> order_stat_mean_analytic(const Distribution& dist, int i, int a) {
  require(a >= 1 && i >= 1 && i <= a, ErrorCode::out_of_range,
          "order statistic index out of range: i=" + std::to_string(i) +
              ", a=" + std::to_string(a));
  if (std::holds_alternative<Uniform>(dist)) {
    return static_cast<double>(i) / (a + 1.0);
  }
  if (const auto* e = std::get_if<Exponential>(&dist)) {
    // mu(a - j, a) = (1/lambda) * sum_{r=j+1..a} 1/r; smallest terms first.
    double total = 0.0;
    for (int r = a; r >= a - i + 1; --r) total += 1.0 / r;
    return total / e->lambda;
  }
  if (const auto* f = std::get_if<FiniteDiscrete>(&dist)) {
    return finite_discrete_order_mean(*f, i, a);
  }
  return std::nullopt;
}

double pareto_max_asymptotic(double alpha, int a) {
  require(alpha > 1.0, ErrorCode::invalid_argument, "pareto alpha must exceed 1");
  return std::tgamma((alpha - 1.0) / alpha) * std::pow(static_cast<double>(a), 1.0 / alpha);
}

std::string TableSource::describe() const {
  if (kind == Kind::analytic) return "analytic";
  return "monte_carlo";
}

OrderStatTable::OrderStatTable(Distribution dist, int max_a, TableSource source,
                               std::vector<double> mu, std::vector<double> se)
    : dist_(std::move(dist)),
      max_a_(max_a),
      source_(source),
      mu_(std::move(mu)),
      se_(std::move(se)) {
  require(max_a_ >= 1, ErrorCode::invalid_argument, "order-stat table needs max_a >= 1");
  require(mu_.size() == cell_count(max_a_) && se_.size() == mu_.size(),
          ErrorCode::invalid_argument, "order-stat table storage has the wrong size");
}

std::size_t OrderStatTable::index(int i, int a) const {
  require(a >= 1 && a <= max_a_ && i >= 1 && i <= a, ErrorCode::coverage,
          "order-stat table does not cover (i=" + std::to_string(i) +
              ", a=" + std::to_string(a) + "), max_a=" + std::to_string(max_a_));
  return static_cast<std::size_t>(a - 1) * a / 2 + (i - 1);
}

namespace {

struct WorkerSums {
  std::int64_t count = 0;
  std::vector<double> sum;      // plain sums; keep per-rank means monotone
  std::vector<double> shift;    // first observation per cell
  std::vector<double> dsum;     // sum of (x - shift)
  std::vector<double> dsum_sq;  // sum of (x - shift)^2
};

WorkerSums run_worker(const Distribution& dist, int max_a, std::int64_t count,
                      std::uint64_t seed, int worker) {
  const std::size_t cells = OrderStatTable::cell_count(max_a);
  WorkerSums acc;
  acc.count = count;
  acc.sum.assign(cells, 0.0);
  acc.shift.assign(cells, 0.0);
  acc.dsum.assign(cells, 0.0);
  acc.dsum_sq.assign(cells, 0.0);
  if (count == 0) return acc;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(worker), 0x5eedu};
  Rng rng(seq);
  std::vector<double> draw(static_cast<std::size_t>(max_a));

  for (int a = 1; a <= max_a; ++a) {
    const std::size_t base = static_cast<std::size_t>(a - 1) * a / 2;
    std::span<double> set(draw.data(), static_cast<std::size_t>(a));
    double* sum = acc.sum.data() + base;
    double* shift = acc.shift.data() + base;
    double* dsum = acc.dsum.data() + base;
    double* dsq = acc.dsum_sq.data() + base;

    draw_set(dist, set, rng);
    std::sort(set.begin(), set.end());
    for (int i = 0; i < a; ++i) {
      shift[i] = set[i];
      sum[i] += set[i];
    }
    for (std::int64_t s = 1; s < count; ++s) {
      draw_set(dist, set, rng);
      std::sort(set.begin(), set.end());
      for (int i = 0; i < a; ++i) {
        const double x = set[i];
        const double d = x - shift[i];
        sum[i] += x;
        dsum[i] += d;
        dsq[i] += d * d;
      }
    }
  }
  return acc;
}

OrderStatTable build_monte_carlo(const Distribution& dist, int max_a, const TableOptions& opt) {
  const int workers = opt.workers;
  const std::size_t cells = OrderStatTable::cell_count(max_a);
  std::vector<WorkerSums> parts(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> threads;
    const std::int64_t base = opt.samples / workers;
    const std::int64_t extra = opt.samples % workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t count = base + (w < extra ? 1 : 0);
      threads.emplace_back([&, w, count] {
        parts[static_cast<std::size_t>(w)] = run_worker(dist, max_a, count, opt.seed, w);
      });
    }
  }

  std::vector<double> mu(cells), se(cells);
  const double total = static_cast<double>(opt.samples);
  for (std::size_t c = 0; c < cells; ++c) {
    double sum = 0.0;
    double n_acc = 0.0, mean_acc = 0.0, m2_acc = 0.0;
    for (const auto& part : parts) {
      if (part.count == 0) continue;
      sum += part.sum[c];
      const double n_w = static_cast<double>(part.count);
      const double mean_w = part.shift[c] + part.dsum[c] / n_w;
      const double m2_w = std::max(0.0, part.dsum_sq[c] - part.dsum[c] * part.dsum[c] / n_w);
      if (n_acc == 0.0) {
        n_acc = n_w;
        mean_acc = mean_w;
        m2_acc = m2_w;
      } else {
        const double n_new = n_acc + n_w;
        const double delta = mean_w - mean_acc;
        m2_acc += m2_w + delta * delta * n_acc * n_w / n_new;
        mean_acc += delta * n_w / n_new;
        n_acc = n_new;
      }
    }
    mu[c] = sum / total;
    se[c] = opt.samples > 1 ? std::sqrt(m2_acc / (total - 1.0) / total)
                            : std::numeric_limits<double>::infinity();
  }
  TableSource source{TableSource::Kind::monte_carlo, opt.samples, opt.seed, workers};
  return OrderStatTable(dist, max_a, source, std::move(mu), std::move(se));
}

}  // namespace

OrderStatTable build_order_stat_table(const Distribution& dist, int max_a,
                                      const TableOptions& options) {
  validate(dist);
  require(max_a >= 1, ErrorCode::invalid_argument, "max_a must be at least 1");
  require(options.samples >= 1, ErrorCode::invalid_argument, "samples must be at least 1");
  require(options.workers >= 1, ErrorCode::invalid_argument, "workers must be at least 1");

  const bool analytic =
      !options.force_monte_carlo && order_stat_mean_analytic(dist, 1, 1).has_value();
  if (analytic) {
    std::vector<double> mu, se(OrderStatTable::cell_count(max_a), 0.0);
    mu.reserve(se.size());
    for (int a = 1; a <= max_a; ++a) {
      for (int i = 1; i <= a; ++i) mu.push_back(*order_stat_mean_analytic(dist, i, a));
    }
    return OrderStatTable(dist, max_a, TableSource{}, std::move(mu), std::move(se));
  }

  const double work = static_cast<double>(max_a) * static_cast<double>(options.samples);
  require(work <= options.budget, ErrorCode::budget_exceeded,
          "order-stat sampling needs max_a * samples = " + format_double(work) +
              " draws-per-rank, budget is " + format_double(options.budget));
  return build_monte_carlo(dist, max_a, options);
}

void write_table_csv(std::ostream& out, const OrderStatTable& table) {
  const std::string kind = kind_name(table.dist());
  const std::string params = params_string(table.dist());
  const std::string source = table.source().describe();
  out << "dist,params,i,a,mu,se,source\n";
  for (int a = 1; a <= table.max_a(); ++a) {
    for (int i = 1; i <= a; ++i) {
      out << kind << ',' << params << ',' << i << ',' << a << ',' << format_double(table.mu(i, a))
          << ',' << format_double(table.se(i, a)) << ',' << source << '\n';
    }
  }
}

}  // namespace divrec
