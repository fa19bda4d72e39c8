#include "nnrange/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nnrange/bench.hpp"
#include "nnrange/error.hpp"
#include "nnrange/milp.hpp"
#include "nnrange/network.hpp"
#include "nnrange/oracle.hpp"
#include "nnrange/polytope.hpp"
#include "nnrange/search.hpp"

namespace nnrange {

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNotTight = 1;
constexpr int kExitInput = 2;

json to_json_vec(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

struct Inputs {
  std::string network;
  std::string poly;
};

struct Loaded {
  Network net;
  Polyhedron p;
};

Loaded load_inputs(const Inputs& in) {
  Network net = load_network_file(in.network);
  Polyhedron p = [&] {
    if (!in.poly.empty()) return load_polyhedron_file(in.poly);
    const auto n = static_cast<Eigen::Index>(net.input_dim());
    return Polyhedron::from_box(Box{Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)});
  }();
  if (p.dim() != net.input_dim())
    throw DimensionMismatch("network has " + std::to_string(net.input_dim()) +
                            " inputs but the polyhedron has dimension " + std::to_string(p.dim()));
  return {std::move(net), std::move(p)};
}

void check_index(const Network& net, std::size_t index, const char* what) {
  if (index >= net.output_dim())
    throw DimensionMismatch(std::string(what) + " " + std::to_string(index) + " is out of range; the network has " +
                            std::to_string(net.output_dim()) + " outputs");
}

std::size_t workers_from_env() {
  const char* env = std::getenv("NNRANGE_WORKERS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long value = std::stoul(env, &used);
    if (used == std::string(env).size()) return value;
  } catch (const std::exception&) {
  }
  throw Error(std::string("NNRANGE_WORKERS must be a nonnegative integer, got \"") + env + "\"");
}

json bound_json(const BoundResult& b) {
  return {{"bound", b.bound},
          {"status", to_string(b.status)},
          {"arg", to_json_vec(b.arg)},
          {"rounds", b.rounds},
          {"local_steps", b.local_steps},
          {"milp_nodes", b.milp.nodes},
          {"lp_solves", b.milp.lp_solves},
          {"milp_seconds", b.milp.seconds}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << content;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Output range analysis for feedforward ReLU networks", "nnrange"};
  app.require_subcommand(1);

  Inputs inputs;
  SearchParams params;
  std::optional<std::size_t> workers;
  std::optional<double> time_limit;
  std::size_t output = 0;
  std::size_t label = 0;
  std::string mode = "both";
  std::string dump_milp;

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--network", inputs.network, "Network JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--poly", inputs.poly, "Polyhedron JSON file (default: box [-1,1]^n)")->check(CLI::ExistingFile);
  };
  auto add_search = [&](CLI::App* sub) {
    sub->add_option("--delta", params.delta, "Tightness slack")->check(CLI::PositiveNumber);
    sub->add_option("--restarts", params.restarts, "Local search starting points")->check(CLI::PositiveNumber);
    sub->add_option("--time-limit", time_limit, "Seconds per bound")->check(CLI::PositiveNumber);
    sub->add_option("--workers", workers, "Thread cap (default: NNRANGE_WORKERS, else all cores)");
    sub->add_option("--seed", params.seed, "Seed for the random starting points");
  };

  CLI::App* range = app.add_subcommand("range", "Compute a delta-tight output range");
  add_inputs(range);
  add_search(range);
  range->add_option("--output", output, "Output index");
  range->add_option("--mode", mode, "Which bounds to compute")->check(CLI::IsMember({"upper", "lower", "both"}));
  range->add_option("--dump-milp", dump_milp, "Write the final upper-bound MILP in LP format to this file");

  CLI::App* certify = app.add_subcommand("certify", "Check that a label wins everywhere on the input set");
  add_inputs(certify);
  add_search(certify);
  certify->add_option("--label", label, "Label to certify")->required();

  CLI::App* adversarial = app.add_subcommand("adversarial", "Search for an input that changes the label");
  add_inputs(adversarial);
  add_search(adversarial);
  adversarial->add_option("--label", label, "Label the input should keep")->required();

  BenchConfig gen_cfg;
  std::string config_path;
  std::string out_path;
  std::string summary_path;
  std::uint64_t instance = 0;

  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark batch and write CSV records");
  bench->add_option("--config", config_path, "Benchmark config JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out_path, "CSV output file (default: stdout)");
  bench->add_option("--summary", summary_path, "Also write the summary table here");
  bench->add_option("--workers", workers, "Thread cap (default: NNRANGE_WORKERS, else all cores)");

  CLI::App* gen = app.add_subcommand("gen", "Generate a random benchmark network");
  gen->add_option("--n", gen_cfg.n, "Inputs")->required();
  gen->add_option("--k", gen_cfg.k, "Hidden layers")->required();
  gen->add_option("--N", gen_cfg.N, "Neurons per hidden layer")->required();
  gen->add_option("--s", gen_cfg.s, "Nonzero probability")->required();
  gen->add_option("--seed", gen_cfg.seed, "Seed");
  gen->add_option("--instance", instance, "Instance number within the seed");
  gen->add_option("--out", out_path, "Network file (default: stdout)");

  bool show_cells = false;
  CLI::App* oracle = app.add_subcommand("oracle", "Exact range by activation-pattern enumeration");
  add_inputs(oracle);
  oracle->add_option("--output", output, "Output index");
  oracle->add_flag("--cells", show_cells, "List the cells on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    params.workers = workers ? *workers : workers_from_env();
    params.time_limit = time_limit;

    if (range->parsed()) {
      const Loaded in = load_inputs(inputs);
      check_index(in.net, output, "output index");
      RangeStatus status;
      std::optional<double> upper;
      if (mode == "both") {
        const RangeResult r = estimate_range(in.net, in.p, output, params);
        json rec = to_json(r);
        rec["mode"] = mode;
        out << rec.dump() << '\n';
        status = r.status;
        upper = r.upper;
      } else {
        const BoundResult b = mode == "upper" ? find_upper_bound(in.net, in.p, params, output)
                                              : find_lower_bound(in.net, in.p, params, output);
        json rec = bound_json(b);
        rec["output"] = output;
        rec["mode"] = mode;
        rec["delta"] = params.delta;
        out << rec.dump() << '\n';
        status = b.status;
        if (mode == "upper") upper = b.bound;
      }
      if (!dump_milp.empty()) {
        if (!upper) upper = find_upper_bound(in.net, in.p, params, output).bound;
        const MilpProblem m = encode_network(in.net, in.p, *upper, ThresholdSense::AtLeast, output);
        std::ofstream f(dump_milp);
        if (!f) throw Error("cannot write " + dump_milp);
        write_lp_format(m, f);
      }
      return status == RangeStatus::Tight ? kExitOk : kExitNotTight;
    }

    if (certify->parsed()) {
      const Loaded in = load_inputs(inputs);
      check_index(in.net, label, "label");
      const CertifyResult c = certify_label(in.net, in.p, label, params);
      json ranges = json::array();
      bool tight = true;
      for (const RangeResult& r : c.ranges) {
        ranges.push_back(to_json(r));
        tight = tight && r.status == RangeStatus::Tight;
      }
      json rec = {{"label", label},
                  {"verdict", to_string(c.verdict)},
                  {"overlapping", c.overlapping},
                  {"counterexample", c.counterexample ? to_json_vec(*c.counterexample) : json(nullptr)},
                  {"ranges", ranges}};
      out << rec.dump() << '\n';
      return c.verdict == Certification::Undetermined && !tight ? kExitNotTight : kExitOk;
    }

    if (adversarial->parsed()) {
      const Loaded in = load_inputs(inputs);
      check_index(in.net, label, "label");
      const std::optional<Vector> x = adversarial_search(in.net, in.p, label, params);
      json rec = {{"label", label}, {"found", x.has_value()}};
      if (x) {
        const Vector outs = forward(in.net, *x).outputs;
        Eigen::Index predicted = 0;
        outs.maxCoeff(&predicted);
        rec["point"] = to_json_vec(*x);
        rec["outputs"] = to_json_vec(outs);
        rec["predicted"] = predicted;
      }
      out << rec.dump() << '\n';
      return kExitOk;
    }

    if (bench->parsed()) {
      const std::vector<BenchConfig> cfgs = load_bench_configs_file(config_path);
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw Error("cannot write " + out_path);
      }
      std::ostream& csv = out_path.empty() ? out : file;
      csv << kCsvHeader << '\n';
      const auto records = run_benchmark(cfgs, params.workers, [&](const BenchRecord& r) {
        write_csv_row(r, csv);
        csv.flush();
        if (!r.error.empty()) err << "config " << r.config_id << " instance " << r.instance << ": " << r.error << '\n';
      });
      std::ostringstream summary;
      write_summary(cfgs, records, summary);
      err << summary.str();
      if (!summary_path.empty()) write_file(summary_path, summary.str());
      for (const BenchRecord& r : records)
        if (r.status != "Tight") return kExitNotTight;
      return kExitOk;
    }

    if (gen->parsed()) {
      const Network net = gen_random_network(gen_cfg, instance);
      if (out_path.empty()) {
        save_network(net, out);
      } else {
        save_network_file(net, out_path);
      }
      return kExitOk;
    }

    if (oracle->parsed()) {
      const Loaded in = load_inputs(inputs);
      check_index(in.net, output, "output index");
      if (show_cells) write_cells(enumerate_cells(in.net, in.p, output), err);
      const ExactRange r = exact_range(in.net, in.p, output);
      json rec = {{"output", output},
                  {"lower", r.lower},
                  {"upper", r.upper},
                  {"cells", r.cells},
                  {"arg_lower", to_json_vec(r.arg_lower)},
                  {"arg_upper", to_json_vec(r.arg_upper)}};
      out << rec.dump() << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace nnrange
