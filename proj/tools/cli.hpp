#pragma once

// Command-line front end. Kept in a header so the test suite can drive the
// exact same code path in-process.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homsample/homsample.hpp"

namespace homsample::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct DataOptions {
  std::string graph;
  std::string features;
  std::string labels;
};

struct SynthOptions {
  NodeId nodes = 1000;
  int blocks = 2;
  std::vector<double> widths;
  double p_in = 0.02;
  double p_out = 0.002;
  int dim = 16;
  double noise = 0.3;
  double signal = 1.0;
  std::uint64_t seed = 0;

  GraphonSpec spec() const {
    std::vector<double> w = widths;
    if (w.empty()) w.assign(static_cast<std::size_t>(blocks), 1.0 / blocks);
    auto s = GraphonSpec::blocks(std::move(w), p_in, p_out, nodes);
    s.feature_dim = dim;
    s.noise = noise;
    s.signal = signal;
    s.seed = seed;
    return s;
  }
};

struct GnnOptions {
  int layers = 2;
  int hidden = 64;
  int taps = 2;
  int epochs = 200;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  std::string shift = "normalized";
  std::string activation = "relu";
  std::uint64_t seed = 0;

  gnn::GnnConfig config() const {
    gnn::GnnConfig c;
    c.layers = layers;
    c.hidden = {hidden};
    c.taps = taps;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.weight_decay = weight_decay;
    c.shift = gnn::parse_shift(shift);
    c.activation = gnn::parse_activation(activation);
    c.seed = seed;
    return c;
  }
};

inline void add_data_options(CLI::App* cmd, DataOptions& d, bool features_required, bool labels_required) {
  cmd->add_option("--graph", d.graph, "Edge list file")->required();
  auto* f = cmd->add_option("--features", d.features, "Feature CSV file");
  if (features_required) f->required();
  auto* l = cmd->add_option("--labels", d.labels, "Label CSV file");
  if (labels_required) l->required();
}

inline void add_synth_options(CLI::App* cmd, SynthOptions& s) {
  cmd->add_option("--nodes", s.nodes, "Number of nodes")->capture_default_str();
  cmd->add_option("--blocks", s.blocks, "Number of equal-width blocks (ignored with --widths)")->capture_default_str();
  cmd->add_option("--widths", s.widths, "Comma-separated block widths summing to 1")->delimiter(',');
  cmd->add_option("--p-in", s.p_in, "Within-block edge probability")->capture_default_str();
  cmd->add_option("--p-out", s.p_out, "Between-block edge probability")->capture_default_str();
  cmd->add_option("--dim", s.dim, "Feature dimension")->capture_default_str();
  cmd->add_option("--noise", s.noise, "Feature noise standard deviation")->capture_default_str();
  cmd->add_option("--signal", s.signal, "Block one-hot magnitude")->capture_default_str();
  cmd->add_option("--graph-seed", s.seed, "Generator seed")->capture_default_str();
}

inline void add_gnn_options(CLI::App* cmd, GnnOptions& g) {
  cmd->add_option("--layers", g.layers, "GNN layers")->capture_default_str();
  cmd->add_option("--hidden", g.hidden, "Hidden width")->capture_default_str();
  cmd->add_option("--taps", g.taps, "Filter taps K per layer")->capture_default_str();
  cmd->add_option("--epochs", g.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", g.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", g.weight_decay, "Decoupled weight decay")->capture_default_str();
  cmd->add_option("--shift", g.shift, "Shift operator: normalized | adjacency | laplacian")->capture_default_str();
  cmd->add_option("--activation", g.activation, "relu | sigmoid")->capture_default_str();
  cmd->add_option("--gnn-seed", g.seed, "Weight initialization seed")->capture_default_str();
}

inline io::Dataset load(const DataOptions& d) {
  std::optional<fs::path> features;
  std::optional<fs::path> labels;
  if (!d.features.empty()) features = d.features;
  if (!d.labels.empty()) labels = d.labels;
  return io::load_dataset(d.graph, features, labels);
}

inline io::Dataset from_synthetic(SyntheticDataset ds) {
  io::Dataset out;
  out.graph = std::move(ds.graph);
  out.features = std::move(ds.features);
  out.labels = std::move(ds.labels);
  return out;
}

inline std::string dataset_name(const std::string& path) { return fs::path(path).stem().string(); }

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feature-homophily graph sampling toolkit"};
  app.require_subcommand(1);

  DataOptions data;
  SynthOptions synth;
  GnnOptions gnn_opts;
  double gamma = 0.5;
  std::string method = "homophily";
  std::uint64_t seed = 0;
  std::string out_path;
  bool use_raw_scores = false;

  auto* homophily_cmd = app.add_subcommand("homophily", "Print h_G, tr(L) and the trace lower bound");
  add_data_options(homophily_cmd, data, true, false);

  auto* sample_cmd = app.add_subcommand("sample", "Subsample a graph and write the result");
  add_data_options(sample_cmd, data, false, false);
  sample_cmd->add_option("--gamma", gamma, "Keep rate in (0, 1]")->required();
  sample_cmd->add_option("--method", method, "homophily | random | degree_greedy")->capture_default_str();
  sample_cmd->add_option("--seed", seed, "Seed for the random method")->capture_default_str();
  sample_cmd->add_option("--out", out_path, "Output directory")->required();
  sample_cmd->add_flag("--use-raw-scores", use_raw_scores, "Score raw instead of normalized features");

  auto* metrics_cmd = app.add_subcommand("metrics", "Connectivity and homophily report for a graph");
  add_data_options(metrics_cmd, data, false, false);
  metrics_cmd->add_option("--out", out_path, "Report file (stdout when omitted)");

  auto* train_cmd = app.add_subcommand("train-eval", "Train on a subsample, evaluate on the full graph");
  add_data_options(train_cmd, data, true, true);
  train_cmd->add_option("--gamma", gamma, "Keep rate in (0, 1]")->capture_default_str();
  train_cmd->add_option("--method", method, "homophily | random | degree_greedy")->capture_default_str();
  train_cmd->add_option("--seed", seed, "Seed for the random method")->capture_default_str();
  train_cmd->add_option("--out", out_path, "Report file (stdout when omitted)");
  train_cmd->add_flag("--use-raw-scores", use_raw_scores, "Score raw instead of normalized features");
  add_gnn_options(train_cmd, gnn_opts);

  std::vector<double> rates{0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};
  std::vector<std::string> methods{"homophily", "random"};
  int reps = 50;
  int workers = 1;
  bool metrics_only = false;
  std::string dataset_id;
  auto* exp_cmd = app.add_subcommand("experiment", "Sweep rates and methods; write reports and a summary");
  exp_cmd->add_option("--graph", data.graph, "Edge list file (synthetic graphon data when omitted)");
  exp_cmd->add_option("--features", data.features, "Feature CSV file");
  exp_cmd->add_option("--labels", data.labels, "Label CSV file");
  add_synth_options(exp_cmd, synth);
  exp_cmd->add_option("--rates", rates, "Comma-separated keep rates")->delimiter(',');
  exp_cmd->add_option("--method", methods, "Comma-separated methods")->delimiter(',');
  exp_cmd->add_option("--reps", reps, "Repetitions of the random method")->capture_default_str();
  exp_cmd->add_option("--seed", seed, "Base seed")->capture_default_str();
  exp_cmd->add_option("--workers", workers, "Parallel cells (capped by HOMSAMPLE_THREADS)")->capture_default_str();
  exp_cmd->add_flag("--metrics-only", metrics_only, "Skip GNN training");
  exp_cmd->add_flag("--use-raw-scores", use_raw_scores, "Score raw instead of normalized features");
  exp_cmd->add_option("--dataset-id", dataset_id, "Dataset name recorded in reports");
  exp_cmd->add_option("--out", out_path, "Output directory")->required();
  add_gnn_options(exp_cmd, gnn_opts);

  experiment::BenchPlan bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the sampler as edges and feature width grow");
  bench_cmd->add_option("--nodes", bench.nodes, "Nodes per graph")->capture_default_str();
  bench_cmd->add_option("--sizes", bench.edge_counts, "Comma-separated edge counts (fixed --dim)")->delimiter(',');
  bench_cmd->add_option("--dim", bench.fixed_dim, "Feature width for the edge sweep")->capture_default_str();
  bench_cmd->add_option("--dims", bench.dims, "Comma-separated feature widths (fixed --edges)")->delimiter(',');
  bench_cmd->add_option("--edges", bench.fixed_edges, "Edge count for the width sweep")->capture_default_str();
  bench_cmd->add_option("--gamma", bench.gamma, "Keep rate")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Generator seed")->capture_default_str();
  bench_cmd->add_option("--min-seconds", bench.min_seconds, "Minimum time per measurement batch")->capture_default_str();
  bench_cmd->add_option("--trials", bench.trials, "Batches per measurement (fastest kept)")->capture_default_str();
  bench_cmd->add_option("--out", out_path, "CSV file (stdout when omitted)");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a graphon graph with block features and labels");
  add_synth_options(synth_cmd, synth);
  synth_cmd->add_option("--out", out_path, "Output directory")->required();

  std::vector<std::string> argv_store{"homsample"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (homophily_cmd->parsed()) {
      const auto ds = load(data);
      const auto xh = normalize_features(*ds.features);
      const double h = feature_homophily(ds.graph, xh);
      const double tr = laplacian_trace(ds.graph);
      out << "homophily " << io::format_double(h) << "\n";
      out << "trace " << io::format_double(tr) << "\n";
      const double bound = trace_lower_bound(h, xh);
      out << "bound " << io::format_double(bound) << "\n";
      const bool ok = tr >= bound - experiment::kBoundTolerance;
      out << "bound_satisfied " << (ok ? "true" : "false") << "\n";
      return ok ? kOk : kNumerical;
    }

    if (sample_cmd->parsed()) {
      if (!(gamma > 0.0 && gamma <= 1.0)) throw UsageError("--gamma must lie in (0, 1]");
      const auto ds = load(data);
      const SampleSpec spec{gamma, parse_sample_method(method), seed, use_raw_scores};
      const auto result = homsample::sample(ds.graph, ds.features ? &*ds.features : nullptr, spec,
                                            ds.labels ? &*ds.labels : nullptr);
      io::write_sample(result, out_path);
      out << "kept " << result.kept.size() << " of " << ds.graph.num_nodes() << " nodes, "
          << result.subgraph.num_edges() << " edges -> " << out_path << "\n";
      return kOk;
    }

    if (metrics_cmd->parsed()) {
      const auto ds = load(data);
      auto report = experiment::measure(ds.graph, ds.features ? &*ds.features : nullptr);
      report.dataset = dataset_name(data.graph);
      report.method = "full";
      report.phases = {"metrics"};
      if (out_path.empty()) {
        out << io::serialize_report(report);
      } else {
        io::write_report(report, out_path);
      }
      return kOk;
    }

    if (train_cmd->parsed()) {
      if (!(gamma > 0.0 && gamma <= 1.0)) throw UsageError("--gamma must lie in (0, 1]");
      const auto ds = load(data);
      const SampleSpec spec{gamma, parse_sample_method(method), seed, use_raw_scores};
      const auto sample = homsample::sample(ds.graph, &*ds.features, spec, &*ds.labels);
      auto report = experiment::measure(sample.subgraph, &sample.features);
      const auto transfer = experiment::train_and_transfer(ds.graph, *ds.features, *ds.labels, sample, gnn_opts.config());
      report.dataset = dataset_name(data.graph);
      report.method = method;
      report.gamma = gamma;
      report.seed = seed;
      report.accuracy = transfer.accuracy;
      report.phases = {"sample", "metrics", "train", "evaluate"};
      if (out_path.empty()) {
        out << io::serialize_report(report);
      } else {
        io::write_report(report, out_path);
      }
      return kOk;
    }

    if (exp_cmd->parsed()) {
      experiment::ExperimentPlan plan;
      io::Dataset ds;
      if (!data.graph.empty()) {
        ds = load(data);
        plan.dataset_id = dataset_id.empty() ? dataset_name(data.graph) : dataset_id;
      } else {
        ds = from_synthetic(generate_dataset(synth.spec()));
        plan.dataset_id = dataset_id.empty() ? "graphon" : dataset_id;
      }
      plan.rates = rates;
      plan.methods.clear();
      for (const auto& m : methods) plan.methods.push_back(parse_sample_method(m));
      plan.repetitions = reps;
      plan.seed = seed;
      plan.metrics_only = metrics_only;
      plan.use_raw_scores = use_raw_scores;
      plan.gnn = gnn_opts.config();
      plan.output_dir = out_path;
      plan.workers = workers;
      const auto result = experiment::run_experiment(plan, ds);
      std::size_t failed = 0;
      for (const auto& c : result.cells) failed += c.report ? 0 : 1;
      out << result.cells.size() << " cells, " << failed << " failed -> " << out_path << "\n";
      out << experiment::format_summary_csv(result.summary);
      return kOk;
    }

    if (bench_cmd->parsed()) {
      const auto rows = experiment::run_bench(bench);
      const auto csv = experiment::format_bench_csv(rows);
      const auto slopes = experiment::bench_slopes(rows);
      if (out_path.empty()) {
        out << csv;
      } else {
        io::write_text(out_path, csv);
      }
      out << "slope_time_vs_edges " << io::format_double(slopes.edges) << "\n";
      out << "slope_time_vs_dim " << io::format_double(slopes.dim) << "\n";
      return kOk;
    }

    if (synth_cmd->parsed()) {
      const auto ds = generate_dataset(synth.spec());
      std::error_code ec;
      fs::create_directories(out_path, ec);
      if (ec) throw DataError("cannot create directory '" + out_path + "': " + ec.message());
      io::write_edge_list(ds.graph, fs::path(out_path) / "graph.edges");
      io::write_features_csv(ds.features, fs::path(out_path) / "features.csv");
      io::write_labels_csv(ds.labels, fs::path(out_path) / "labels.csv");
      out << "wrote " << ds.graph.num_nodes() << " nodes, " << ds.graph.num_edges() << " edges -> " << out_path << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace homsample::cli
