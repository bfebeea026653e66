#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "homsample/errors.hpp"
#include "homsample/features.hpp"
#include "homsample/gnn.hpp"
#include "homsample/graph.hpp"
#include "homsample/graphon.hpp"
#include "homsample/io.hpp"
#include "homsample/sampling.hpp"

namespace homsample::experiment {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Absolute slack on the tr(L) >= bound check.
inline constexpr double kBoundTolerance = 1e-9;

/// Connectivity and homophily metrics of one graph. Features, when given,
/// are normalized on this graph before h_G and the trace bound are taken.
inline io::MetricsReport measure(const Graph& g, const FeatureMatrix* x) {
  io::MetricsReport r;
  r.nodes = g.num_nodes();
  r.edges = static_cast<std::int64_t>(g.num_edges());
  r.trace = laplacian_trace(g);
  r.adjusted_trace = adjusted_trace(g);
  r.components = connected_components(g).count;
  r.laplacian_rank = r.nodes - r.components;
  if (x != nullptr) {
    const auto xh = normalize_features(*x);
    r.homophily = feature_homophily(g, xh);
    if (*r.homophily > 1e-12) throw NumericalError("feature homophily is positive");
    if (xh.valid_count() > 0) {
      r.trace_bound = trace_lower_bound(*r.homophily, xh);
      r.bound_satisfied = r.trace >= *r.trace_bound - kBoundTolerance;
    }
  }
  r.validate();
  return r;
}

/// Nodes carrying a label (>= 0).
inline std::vector<NodeId> labeled_nodes(const Labels& labels) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

inline int class_count(const Labels& labels) {
  int top = -1;
  for (int l : labels) top = std::max(top, l);
  if (top < 0) throw DataError("no labeled nodes");
  return top + 1;
}

struct TransferOutcome {
  double accuracy = 0.0;
  std::size_t train_nodes = 0;
  std::size_t eval_nodes = 0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

/// Trains on the sampled subgraph and evaluates the same weights on the full
/// graph. Features are normalized with the map fitted on the subsample.
/// Evaluation covers labeled nodes outside the sample (all labeled nodes
/// when the sample is the whole graph).
inline TransferOutcome train_and_transfer(const Graph& full, const FeatureMatrix& x, const Labels& labels,
                                          const SampleResult& sample, const gnn::GnnConfig& cfg) {
  if (!sample.labels) throw UsageError("sample carries no labels");
  const int classes = class_count(labels);
  const auto normalizer = FeatureNormalizer::fit(sample.features);
  const auto train_nodes = labeled_nodes(*sample.labels);
  if (train_nodes.empty()) throw DataError("sample contains no labeled nodes");

  TransferOutcome out;
  const auto t0 = Clock::now();
  const auto trained =
      gnn::train(sample.subgraph, normalizer.apply(sample.features).values, *sample.labels, train_nodes, cfg, classes);
  out.train_seconds = seconds_since(t0);

  std::vector<NodeId> eval_nodes;
  for (NodeId u : labeled_nodes(labels)) {
    if (!sample.kept.contains(u)) eval_nodes.push_back(u);
  }
  if (eval_nodes.empty()) eval_nodes = labeled_nodes(labels);
  const auto t1 = Clock::now();
  out.accuracy = gnn::evaluate(trained.model, full, normalizer.apply(x).values, labels, eval_nodes, cfg);
  out.eval_seconds = seconds_since(t1);
  out.train_nodes = train_nodes.size();
  out.eval_nodes = eval_nodes.size();
  return out;
}

struct ExperimentPlan {
  std::string dataset_id = "dataset";
  /// Keep rates, each in (0, 1].
  std::vector<double> rates{0.25, 0.5, 0.75};
  std::vector<SampleMethod> methods{SampleMethod::homophily, SampleMethod::random};
  /// Repetitions of the random method; deterministic methods run once.
  int repetitions = 50;
  std::uint64_t seed = 0;
  bool metrics_only = true;
  bool use_raw_scores = false;
  gnn::GnnConfig gnn;
  fs::path output_dir = "out";
  int workers = 1;

  void validate() const {
    if (rates.empty()) throw UsageError("experiment needs at least one rate");
    for (double r : rates) {
      if (!(r > 0.0 && r <= 1.0)) throw UsageError("rates must lie in (0, 1], got " + io::format_double(r));
    }
    if (methods.empty()) throw UsageError("experiment needs at least one method");
    if (repetitions < 1) throw UsageError("repetitions must be at least 1");
    if (workers < 1) throw UsageError("workers must be at least 1");
  }
};

struct Cell {
  double rate = 1.0;
  SampleMethod method = SampleMethod::homophily;
  std::uint64_t seed = 0;
};

struct CellOutcome {
  Cell cell;
  std::optional<io::MetricsReport> report;
  std::string error;
  std::vector<std::pair<std::string, double>> timings;
};

inline std::vector<Cell> plan_cells(const ExperimentPlan& plan) {
  std::vector<Cell> cells;
  for (double rate : plan.rates) {
    for (SampleMethod m : plan.methods) {
      const int reps = m == SampleMethod::random ? plan.repetitions : 1;
      for (int r = 0; r < reps; ++r) cells.push_back({rate, m, plan.seed + static_cast<std::uint64_t>(r)});
    }
  }
  return cells;
}

inline std::string report_filename(const Cell& c) {
  return "rate_" + io::format_double(c.rate) + "_" + std::string(to_string(c.method)) + "_seed_" + std::to_string(c.seed) +
         ".json";
}

/// Worker count: the plan's, capped by HOMSAMPLE_THREADS when set.
inline int effective_workers(int requested) {
  int workers = std::max(1, requested);
  if (const char* env = std::getenv("HOMSAMPLE_THREADS")) {
    const auto cap = io::detail::parse_number<int>(env);
    if (cap && *cap >= 1) workers = std::min(workers, *cap);
  }
  return workers;
}

inline CellOutcome run_cell(const ExperimentPlan& plan, const io::Dataset& data, const Cell& cell) {
  CellOutcome out{cell, std::nullopt, {}, {}};
  try {
    const FeatureMatrix* x = data.features ? &*data.features : nullptr;
    const Labels* labels = data.labels ? &*data.labels : nullptr;
    SampleSpec spec{cell.rate, cell.method, cell.seed, plan.use_raw_scores};

    auto t = Clock::now();
    const auto sample = homsample::sample(data.graph, x, spec, labels);
    out.timings.emplace_back("sample", seconds_since(t));

    t = Clock::now();
    auto report = measure(sample.subgraph, x ? &sample.features : nullptr);
    out.timings.emplace_back("metrics", seconds_since(t));
    report.dataset = plan.dataset_id;
    report.method = std::string(to_string(cell.method));
    report.gamma = cell.rate;
    report.seed = cell.seed;
    report.phases = {"sample", "metrics"};

    if (!plan.metrics_only) {
      if (x == nullptr || labels == nullptr) throw UsageError("training requires features and labels");
      auto cfg = plan.gnn;
      cfg.seed = plan.gnn.seed + cell.seed;
      const auto transfer = train_and_transfer(data.graph, *x, *labels, sample, cfg);
      report.accuracy = transfer.accuracy;
      report.phases.emplace_back("train");
      report.phases.emplace_back("evaluate");
      out.timings.emplace_back("train", transfer.train_seconds);
      out.timings.emplace_back("evaluate", transfer.eval_seconds);
    }
    io::write_report(report, plan.output_dir / "reports" / report_filename(cell));
    out.report = std::move(report);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct SummaryRow {
  double rate = 1.0;
  SampleMethod method = SampleMethod::homophily;
  std::size_t runs = 0;
  std::size_t failed = 0;
  /// metric name -> (mean, standard error); only metrics present in every run.
  std::vector<std::pair<std::string, std::pair<double, double>>> stats;
  std::string notes;
};

/// Mean and standard error (sample std / sqrt(R); 0 for a single run).
inline std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

inline const std::vector<std::string>& summary_metrics() {
  static const std::vector<std::string> names{"adjusted_trace", "trace", "components", "laplacian_rank", "homophily",
                                              "accuracy"};
  return names;
}

inline std::vector<SummaryRow> summarize(const ExperimentPlan& plan, const std::vector<CellOutcome>& outcomes) {
  std::vector<SummaryRow> rows;
  for (double rate : plan.rates) {
    for (SampleMethod m : plan.methods) {
      SummaryRow row{rate, m, 0, 0, {}, {}};
      std::map<std::string, std::vector<double>> values;
      for (const auto& o : outcomes) {
        if (o.cell.rate != rate || o.cell.method != m) continue;
        ++row.runs;
        if (!o.report) {
          ++row.failed;
          if (!row.notes.empty()) row.notes += "; ";
          row.notes += "seed " + std::to_string(o.cell.seed) + ": " + o.error;
          continue;
        }
        const auto& r = *o.report;
        values["adjusted_trace"].push_back(r.adjusted_trace);
        values["trace"].push_back(r.trace);
        values["components"].push_back(static_cast<double>(r.components));
        values["laplacian_rank"].push_back(static_cast<double>(r.laplacian_rank));
        if (r.homophily) values["homophily"].push_back(*r.homophily);
        if (r.accuracy) values["accuracy"].push_back(*r.accuracy);
      }
      const std::size_t ok = row.runs - row.failed;
      for (const auto& name : summary_metrics()) {
        const auto it = values.find(name);
        if (ok > 0 && it != values.end() && it->second.size() == ok) row.stats.emplace_back(name, mean_and_se(it->second));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "rate,method,runs,failed";
  for (const auto& name : summary_metrics()) out += "," + name + "_mean," + name + "_se";
  out += ",notes\n";
  for (const auto& row : rows) {
    out += io::format_double(row.rate) + "," + std::string(to_string(row.method)) + "," + std::to_string(row.runs) + "," +
           std::to_string(row.failed);
    for (const auto& name : summary_metrics()) {
      const auto it = std::find_if(row.stats.begin(), row.stats.end(), [&](const auto& s) { return s.first == name; });
      if (it == row.stats.end()) {
        out += ",,";
      } else {
        out += "," + io::format_double(it->second.first) + "," + io::format_double(it->second.second);
      }
    }
    std::string notes = row.notes;
    std::replace(notes.begin(), notes.end(), ',', ' ');
    std::replace(notes.begin(), notes.end(), '\n', ' ');
    out += "," + notes + "\n";
  }
  return out;
}

struct ExperimentResult {
  std::vector<CellOutcome> cells;
  std::vector<SummaryRow> summary;
};

/// Runs every (rate, method, seed) cell, writing one report per cell under
/// <out>/reports, then <out>/summary.csv. Per-phase wall-clock times go to
/// <out>/timings.csv so reports and summary stay byte-reproducible. A failed
/// cell is recorded in the summary notes and the sweep continues.
inline ExperimentResult run_experiment(const ExperimentPlan& plan, const io::Dataset& data) {
  plan.validate();
  std::error_code ec;
  fs::create_directories(plan.output_dir / "reports", ec);
  if (ec) throw DataError("cannot create '" + (plan.output_dir / "reports").string() + "': " + ec.message());

  const auto cells = plan_cells(plan);
  ExperimentResult result;
  result.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) result.cells[i] = run_cell(plan, data, cells[i]);
  };
  const int workers = std::min<int>(effective_workers(plan.workers), static_cast<int>(cells.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  result.summary = summarize(plan, result.cells);
  io::write_text(plan.output_dir / "summary.csv", format_summary_csv(result.summary));

  std::string timings = "rate,method,seed,phase,seconds\n";
  for (const auto& o : result.cells) {
    for (const auto& [phase, secs] : o.timings) {
      timings += io::format_double(o.cell.rate) + "," + std::string(to_string(o.cell.method)) + "," +
                 std::to_string(o.cell.seed) + "," + phase + "," + io::format_double(secs) + "\n";
    }
  }
  io::write_text(plan.output_dir / "timings.csv", timings);
  return result;
}

// ---------------------------------------------------------------------------
// Runtime scaling of the sampler.

struct BenchPlan {
  NodeId nodes = 1000;
  /// Target edge counts for the m-sweep (fixed dimension).
  std::vector<std::size_t> edge_counts{10000, 20000, 40000, 80000};
  int fixed_dim = 64;
  /// Feature dimensions for the d-sweep (fixed edge count).
  std::vector<int> dims{32, 64, 128, 256};
  std::size_t fixed_edges = 40000;
  double gamma = 0.5;
  std::uint64_t seed = 0;
  /// Minimum accumulated time per measurement batch.
  double min_seconds = 0.02;
  int trials = 5;
};

struct BenchRow {
  std::string sweep;
  NodeId nodes = 0;
  std::size_t edges = 0;
  int dim = 0;
  double score_seconds = 0.0;
  double homophily_seconds = 0.0;
  double selection_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Times normalization + scores, edge-wise homophily and the keep-set
/// selection on one instance. Each trial repeats the pipeline until
/// min_seconds have accumulated; the fastest per-iteration trial is kept.
inline BenchRow time_sampler(const Graph& g, const FeatureMatrix& x, double gamma, double min_seconds, int trials) {
  BenchRow best;
  best.total_seconds = std::numeric_limits<double>::infinity();
  volatile double sink = 0.0;
  for (int t = 0; t < std::max(1, trials); ++t) {
    double score = 0.0, hom = 0.0, sel = 0.0;
    int iterations = 0;
    const auto start = Clock::now();
    do {
      auto t0 = Clock::now();
      const auto xh = normalize_features(x);
      const Vector s = node_scores(xh);
      score += seconds_since(t0);
      t0 = Clock::now();
      sink = sink + feature_homophily(g, xh);
      hom += seconds_since(t0);
      t0 = Clock::now();
      const auto kept = lowest_score_nodes(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), gamma);
      sel += seconds_since(t0);
      sink = sink + static_cast<double>(kept.size());
      ++iterations;
    } while (seconds_since(start) < min_seconds);
    const double total = (score + hom + sel) / iterations;
    if (total < best.total_seconds) {
      best.score_seconds = score / iterations;
      best.homophily_seconds = hom / iterations;
      best.selection_seconds = sel / iterations;
      best.total_seconds = total;
    }
  }
  best.nodes = g.num_nodes();
  best.edges = g.num_edges();
  best.dim = static_cast<int>(x.cols());
  return best;
}

inline Graph bench_graph(NodeId n, std::size_t edges, std::uint64_t seed) {
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double p = static_cast<double>(edges) / pairs;
  if (p > 1.0) throw UsageError("edge count " + std::to_string(edges) + " exceeds the number of node pairs");
  auto spec = GraphonSpec::constant(p, n);
  spec.seed = seed;
  return sample_graphon_graph(spec).graph;
}

inline FeatureMatrix bench_features(NodeId n, int d, std::uint64_t seed) {
  CounterRng rng(seed, 7);
  FeatureMatrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

inline std::vector<BenchRow> run_bench(const BenchPlan& plan) {
  std::vector<BenchRow> rows;
  const FeatureMatrix fixed_x = bench_features(plan.nodes, plan.fixed_dim, plan.seed);
  for (std::size_t m : plan.edge_counts) {
    const Graph g = bench_graph(plan.nodes, m, plan.seed);
    auto row = time_sampler(g, fixed_x, plan.gamma, plan.min_seconds, plan.trials);
    row.sweep = "edges";
    rows.push_back(row);
  }
  const Graph fixed_g = bench_graph(plan.nodes, plan.fixed_edges, plan.seed);
  for (int d : plan.dims) {
    auto row = time_sampler(fixed_g, bench_features(plan.nodes, d, plan.seed), plan.gamma, plan.min_seconds, plan.trials);
    row.sweep = "dim";
    rows.push_back(row);
  }
  return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("slope needs at least two paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct BenchSlopes {
  double edges = 0.0;
  double dim = 0.0;
};

inline BenchSlopes bench_slopes(const std::vector<BenchRow>& rows) {
  std::vector<double> m, tm, d, td;
  for (const auto& r : rows) {
    if (r.sweep == "edges") {
      m.push_back(static_cast<double>(r.edges));
      tm.push_back(r.total_seconds);
    } else if (r.sweep == "dim") {
      d.push_back(r.dim);
      td.push_back(r.total_seconds);
    }
  }
  BenchSlopes s;
  if (m.size() >= 2) s.edges = loglog_slope(m, tm);
  if (d.size() >= 2) s.dim = loglog_slope(d, td);
  return s;
}

inline std::string format_bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "sweep,nodes,edges,dim,score_seconds,homophily_seconds,selection_seconds,total_seconds\n";
  for (const auto& r : rows) {
    out += r.sweep + "," + std::to_string(r.nodes) + "," + std::to_string(r.edges) + "," + std::to_string(r.dim) + "," +
           io::format_double(r.score_seconds) + "," + io::format_double(r.homophily_seconds) + "," +
           io::format_double(r.selection_seconds) + "," + io::format_double(r.total_seconds) + "\n";
  }
  return out;
}

}  // namespace homsample::experiment
