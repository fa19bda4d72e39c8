#include "nnrange/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <mutex>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "nnrange/error.hpp"
#include "nnrange/parallel.hpp"
#include "nnrange/polytope.hpp"
#include "nnrange/rng.hpp"
#include "nnrange/search.hpp"

namespace nnrange {

using json = nlohmann::json;

void BenchConfig::validate() const {
  if (n == 0 || k == 0 || N == 0) throw Error("bench config needs positive n, k and N");
  if (!(s >= 0.0 && s <= 1.0)) throw Error("bench config sparsity s must lie in [0, 1]");
  if (!(delta > 0.0)) throw Error("bench config delta must be positive");
  if (!(time_limit > 0.0)) throw Error("bench config time_limit must be positive");
}

Network gen_random_network(const BenchConfig& cfg, std::uint64_t instance) {
  cfg.validate();
  CounterRng rng(cfg.seed, instance);
  auto draw = [&] {
    const double keep = rng.uniform();
    const double value = 2.0 * rng.uniform() - 1.0;
    return keep < cfg.s ? value : 0.0;
  };
  std::vector<Layer> layers;
  std::size_t width = cfg.n;
  for (std::size_t l = 0; l <= cfg.k; ++l) {
    const bool output = l == cfg.k;
    const std::size_t rows = output ? 1 : cfg.N;
    Layer layer{Matrix(rows, width), Vector(rows), !output};
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < width; ++j) layer.weights(i, j) = draw();
    for (std::size_t i = 0; i < rows; ++i) layer.bias(i) = draw();
    layers.push_back(std::move(layer));
    width = rows;
  }
  return Network(cfg.n, std::move(layers));
}

namespace {

BenchRecord run_instance(std::size_t config_id, const BenchConfig& cfg, std::size_t instance) {
  BenchRecord rec;
  rec.config_id = config_id;
  rec.config = cfg;
  rec.instance = instance;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Network net = gen_random_network(cfg, instance);
    const Polyhedron box = Polyhedron::from_box(
        Box{Vector::Constant(static_cast<Eigen::Index>(cfg.n), -1.0), Vector::Constant(static_cast<Eigen::Index>(cfg.n), 1.0)});
    SearchParams params;
    params.delta = cfg.delta;
    params.time_limit = cfg.time_limit;
    params.workers = 1;
    params.seed = cfg.seed + instance;
    const RangeResult r = estimate_range(net, box, 0, params);
    rec.status = to_string(r.status);
    rec.lower = r.lower;
    rec.upper = r.upper;
    rec.rounds = r.upper_search.rounds + r.lower_search.rounds;
    rec.milp_nodes = r.milp_stats().nodes;
  } catch (const std::exception& e) {
    rec.status = "Error";
    rec.error = e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

std::vector<BenchRecord> run_benchmark(const std::vector<BenchConfig>& cfgs, std::size_t workers,
                                       const RecordSink& sink) {
  struct Job {
    std::size_t config_id;
    std::size_t instance;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    cfgs[c].validate();
    for (std::size_t i = 0; i < cfgs[c].count; ++i) jobs.push_back({c, i});
  }

  std::vector<BenchRecord> records(jobs.size());
  std::vector<bool> done(jobs.size(), false);
  std::size_t flushed = 0;
  std::mutex mutex;
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    BenchRecord rec = run_instance(jobs[j].config_id, cfgs[jobs[j].config_id], jobs[j].instance);
    std::lock_guard<std::mutex> lock(mutex);
    records[j] = std::move(rec);
    done[j] = true;
    // Emit the completed prefix so the sink sees records in order.
    while (flushed < jobs.size() && done[flushed]) {
      if (sink) sink(records[flushed]);
      ++flushed;
    }
  });
  return records;
}

void write_csv_row(const BenchRecord& r, std::ostream& out) {
  std::ostringstream line;
  line << std::setprecision(17);
  line << r.config_id << ',' << r.config.n << ',' << r.config.k << ',' << r.config.N << ',' << r.config.s << ','
       << r.instance << ',' << r.status << ',';
  if (r.status == "Error")
    line << ",,";
  else
    line << r.lower << ',' << r.upper << ',';
  line << std::setprecision(6) << r.seconds << ',' << r.rounds << ',' << r.milp_nodes << '\n';
  out << line.str();
}

void write_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const BenchRecord& r : records) write_csv_row(r, out);
}

void write_summary(const std::vector<BenchConfig>& cfgs, const std::vector<BenchRecord>& records, std::ostream& out) {
  out << std::left << std::setw(4) << "n" << std::setw(4) << "k" << std::setw(6) << "N" << std::setw(6) << "s"
      << std::setw(10) << "N_c" << std::right << std::setw(10) << "T_avg" << std::setw(10) << "T_min" << std::setw(10)
      << "T_max" << std::setw(9) << "it_avg" << std::setw(8) << "it_min" << std::setw(8) << "it_max" << '\n';
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    std::vector<double> times;
    std::vector<std::size_t> rounds;
    for (const BenchRecord& r : records) {
      if (r.config_id != c || r.status != "Tight") continue;
      times.push_back(r.seconds);
      rounds.push_back(r.rounds);
    }
    const BenchConfig& cfg = cfgs[c];
    std::ostringstream solved;
    solved << times.size() << '/' << cfg.count;
    out << std::left << std::setw(4) << cfg.n << std::setw(4) << cfg.k << std::setw(6) << cfg.N << std::setw(6)
        << cfg.s << std::setw(10) << solved.str() << std::right << std::fixed << std::setprecision(3);
    if (times.empty()) {
      out << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(9) << "-"
          << std::setw(8) << "-" << std::setw(8) << "-";
    } else {
      double sum_t = 0.0;
      double sum_r = 0.0;
      for (double t : times) sum_t += t;
      for (std::size_t r : rounds) sum_r += static_cast<double>(r);
      const auto n = static_cast<double>(times.size());
      out << std::setw(10) << sum_t / n << std::setw(10) << *std::min_element(times.begin(), times.end())
          << std::setw(10) << *std::max_element(times.begin(), times.end()) << std::setprecision(1) << std::setw(9)
          << sum_r / n << std::setw(8) << *std::min_element(rounds.begin(), rounds.end()) << std::setw(8)
          << *std::max_element(rounds.begin(), rounds.end());
    }
    out << std::defaultfloat << std::setprecision(6) << '\n';
  }
}

std::vector<BenchConfig> load_bench_configs(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bench config: ") + e.what());
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("configs")) throw ParseError("bench config: expected an array or an object with \"configs\"");
    list = &doc["configs"];
  }
  if (!list->is_array()) throw ParseError("bench config: \"configs\" must be an array");

  std::vector<BenchConfig> cfgs;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& j = (*list)[i];
    const std::string where = "bench config [" + std::to_string(i) + "]";
    if (!j.is_object()) throw ParseError(where + " must be an object");
    BenchConfig cfg;
    try {
      cfg.n = j.value("n", cfg.n);
      cfg.k = j.value("k", cfg.k);
      cfg.N = j.value("N", cfg.N);
      cfg.s = j.value("s", cfg.s);
      cfg.count = j.value("count", cfg.count);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.delta = j.value("delta", cfg.delta);
      cfg.time_limit = j.value("time_limit", cfg.time_limit);
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      cfg.validate();
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
    cfgs.push_back(cfg);
  }
  return cfgs;
}

std::vector<BenchConfig> load_bench_configs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open bench config file " + path);
  return load_bench_configs(in);
}

}  // namespace nnrange
