#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nnrange/network.hpp"

namespace nnrange {

struct BenchConfig {
  std::size_t n = 2;       // inputs
  std::size_t k = 2;       // hidden layers
  std::size_t N = 10;      // neurons per hidden layer
  double s = 0.5;          // probability that an entry is nonzero
  std::size_t count = 20;  // instances
  std::uint64_t seed = 0;
  double delta = 1e-3;
  double time_limit = 60.0;  // seconds per instance

  void validate() const;
};

/// Random network for instance `instance` of cfg. Draws come from
/// CounterRng(cfg.seed, instance), two per entry in layer order (weights
/// row-major, then biases): u0 decides the entry is nonzero iff u0 < s, u1
/// gives the value 2 * u1 - 1. The last layer is a single linear output.
Network gen_random_network(const BenchConfig& cfg, std::uint64_t instance);

struct BenchRecord {
  std::size_t config_id = 0;
  BenchConfig config;
  std::size_t instance = 0;
  std::string status;  // Tight, TimeLimit, NodeLimit or Error
  double lower = 0.0;
  double upper = 0.0;
  double seconds = 0.0;
  std::size_t rounds = 0;  // global searches, both bounds
  std::size_t milp_nodes = 0;
  std::string error;
};

/// Called once per record, in (config, instance) order.
using RecordSink = std::function<void(const BenchRecord&)>;

/// Ranges every instance over [-1, 1]^n. Instances run on up to `workers`
/// threads; a failing instance becomes an Error record.
std::vector<BenchRecord> run_benchmark(const std::vector<BenchConfig>& cfgs, std::size_t workers = 0,
                                       const RecordSink& sink = {});

inline constexpr const char* kCsvHeader = "config_id,n,k,N,s,instance,status,lower,upper,seconds,rounds,milp_nodes";

void write_csv_row(const BenchRecord& r, std::ostream& out);
void write_csv(const std::vector<BenchRecord>& records, std::ostream& out);

/// Per config: solved count N_c, then avg/min/max time and rounds over the
/// Tight records.
void write_summary(const std::vector<BenchConfig>& cfgs, const std::vector<BenchRecord>& records, std::ostream& out);

/// Either a JSON array of configs or {"configs": [...]}. Missing fields take
/// BenchConfig defaults.
std::vector<BenchConfig> load_bench_configs(std::istream& in);
std::vector<BenchConfig> load_bench_configs_file(const std::string& path);

}  // namespace nnrange
