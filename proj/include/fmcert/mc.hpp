#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace fmcert {

/// Generator identifier recorded in every MC report.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Substream for one shard, derived from (master seed, shard id).
inline std::mt19937_64 make_shard_rng(std::uint64_t seed, std::uint64_t shard) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (shard * 0xd1342543de82ef95ULL)));
}

/// Streaming mean/variance accumulator that merges across shards.
struct MeanAccumulator {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const MeanAccumulator& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    double m = mean();
    double v = (sum_sq - n * m * m) / (n - 1);
    return v > 0.0 ? v : 0.0;
  }
  double stderr_of_mean() const { return n ? std::sqrt(variance() / n) : 0.0; }
};

/// Splits the sample budget across shards and runs them on worker threads.
/// fn(rng, n_shard, shard_index) -> ShardResult; results are returned in
/// shard order so the caller's reduction is deterministic.
template <class ShardResult, class Fn>
std::vector<ShardResult> run_sharded(std::uint64_t n_samples, int shards,
                                     std::uint64_t seed, Fn fn) {
  if (shards < 1) shards = 1;
  std::vector<ShardResult> results(shards);
  std::vector<std::thread> workers;
  workers.reserve(shards);
  const std::uint64_t base = n_samples / shards;
  const std::uint64_t rem = n_samples % shards;
  for (int s = 0; s < shards; ++s) {
    const std::uint64_t n_shard = base + (static_cast<std::uint64_t>(s) < rem ? 1 : 0);
    workers.emplace_back([&, s, n_shard] {
      auto rng = make_shard_rng(seed, static_cast<std::uint64_t>(s));
      results[s] = fn(rng, n_shard, s);
    });
  }
  for (auto& w : workers) w.join();
  return results;
}

struct McReport {
  std::string estimator;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  int shards = 1;
  double value = 0.0;
  double stderr_ = 0.0;
  nlohmann::json extra;

  nlohmann::json to_json() const {
    nlohmann::json j{{"estimator", estimator}, {"n_samples", n_samples},
                     {"seed", seed},           {"shards", shards},
                     {"value", value},         {"stderr", stderr_},
                     {"rng", kRngAlgorithm}};
    if (!extra.is_null()) j["extra"] = extra;
    return j;
  }
};

}  // namespace fmcert
