#include <cstdlib>
#include <fstream>

#include "divrec/error.hpp"
#include "divrec/format.hpp"
#include "divrec/order_stats.hpp"

namespace divrec {

namespace {

constexpr char kMagic[8] = {'D', 'V', 'O', 'S', 'T', '0', '0', '1'};

std::filesystem::path cache_file(const std::filesystem::path& dir, const std::string& key) {
  char name[32];
  std::snprintf(name, sizeof name, "ost_%016llx.bin",
                static_cast<unsigned long long>(fnv1a64(key)));
  return dir / name;
}

template <class T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
bool get(std::istream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof value));
}

}  // namespace

std::string table_cache_key(const Distribution& dist, int max_a, const TableOptions& options) {
  return to_string(dist) + "|max_a=" + std::to_string(max_a) +
         "|samples=" + std::to_string(options.samples) + "|seed=" + std::to_string(options.seed) +
         "|workers=" + std::to_string(options.workers);
}

std::optional<OrderStatTable> load_cached_table(const std::filesystem::path& dir,
                                                const Distribution& dist, int max_a,
                                                const TableOptions& options) {
  const std::string key = table_cache_key(dist, max_a, options);
  std::ifstream in(cache_file(dir, key), std::ios::binary);
  if (!in) return std::nullopt;

  char magic[sizeof kMagic];
  std::uint64_t key_len = 0;
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
    return std::nullopt;
  }
  if (!get(in, key_len) || key_len != key.size()) return std::nullopt;
  std::string stored(key_len, '\0');
  if (!in.read(stored.data(), static_cast<std::streamsize>(key_len)) || stored != key) {
    return std::nullopt;
  }
  const std::size_t cells = OrderStatTable::cell_count(max_a);
  std::vector<double> mu(cells), se(cells);
  if (!in.read(reinterpret_cast<char*>(mu.data()), static_cast<std::streamsize>(cells * 8)) ||
      !in.read(reinterpret_cast<char*>(se.data()), static_cast<std::streamsize>(cells * 8))) {
    return std::nullopt;
  }
  TableSource source{TableSource::Kind::monte_carlo, options.samples, options.seed,
                     options.workers};
  return OrderStatTable(dist, max_a, source, std::move(mu), std::move(se));
}

void save_cached_table(const std::filesystem::path& dir, const OrderStatTable& table) {
  if (table.is_analytic()) return;
  TableOptions options;
  options.samples = table.source().samples;
  options.seed = table.source().seed;
  options.workers = table.source().workers;
  const std::string key = table_cache_key(table.dist(), table.max_a(), options);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create cache directory " + dir.string());
  const auto target = cache_file(dir, key);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put(out, static_cast<std::uint64_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    out.write(reinterpret_cast<const char*>(table.raw_mu().data()),
              static_cast<std::streamsize>(table.raw_mu().size() * 8));
    out.write(reinterpret_cast<const char*>(table.raw_se().data()),
              static_cast<std::streamsize>(table.raw_se().size() * 8));
    require(static_cast<bool>(out), ErrorCode::io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, target, ec);
  require(!ec, ErrorCode::io, "cannot move cache file into place: " + target.string());
}

OrderStatTable build_order_stat_table_cached(const Distribution& dist, int max_a,
                                             const TableOptions& options,
                                             const std::filesystem::path& cache_dir) {
  const bool analytic =
      !options.force_monte_carlo && order_stat_mean_analytic(dist, 1, 1).has_value();
  if (cache_dir.empty() || analytic) return build_order_stat_table(dist, max_a, options);
  if (auto hit = load_cached_table(cache_dir, dist, max_a, options)) return std::move(*hit);
  auto table = build_order_stat_table(dist, max_a, options);
  save_cached_table(cache_dir, table);
  return table;
}

std::filesystem::path cache_dir_from_env() {
  const char* dir = std::getenv("DIVREC_CACHE_DIR");
  return dir ? std::filesystem::path(dir) : std::filesystem::path{};
}

}  // namespace divrec
