#include <gtest/gtest.h>

#include <filesystem>

#include "homsample/io.hpp"
#include "homsample/sampling.hpp"
#include "oracles.hpp"

using namespace homsample;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("homsample_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

io::MetricsReport sample_report() {
  io::MetricsReport r;
  r.dataset = "cora \"export\"";
  r.method = "homophily";
  r.gamma = 0.625;
  r.seed = 17;
  r.nodes = 1354;
  r.edges = 2711;
  r.homophily = -0.1 / 3.0;
  r.trace = 5422.0;
  r.adjusted_trace = 5422.0 / 1354.0;
  r.components = 7;
  r.laplacian_rank = 1347;
  r.trace_bound = 0.1 / 7.0;
  r.bound_satisfied = true;
  r.accuracy = 0.8123456789012345;
  r.phases = {"sample", "metrics", "train", "evaluate"};
  return r;
}

}  // namespace

TEST(FormatDouble, SeventeenDigitsAndNoNegativeZero) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(2.0), "2");
  EXPECT_EQ(io::format_double(-0.0), "0");
  EXPECT_THROW(io::format_double(std::numeric_limits<double>::infinity()), NumericalError);
}

TEST(EdgeList, PathFile) {
  const Graph g = io::parse_edge_list("0 1\n1 2\n");
  EXPECT_EQ(g.num_nodes(), 3);
  EXPECT_EQ(g.edge_list(), (std::vector<Edge>{{0, 1}, {1, 2}}));
}

TEST(EdgeList, CommentsDuplicatesAndHeader) {
  const Graph g = io::parse_edge_list("# comment\nn=5\n0 1\n1 0\n  2\t3  \n\n3 3\n# tail\n");
  EXPECT_EQ(g.num_nodes(), 5);
  EXPECT_EQ(g.edge_list(), (std::vector<Edge>{{0, 1}, {2, 3}}));
}

TEST(EdgeList, CrlfLineEndings) {
  EXPECT_EQ(io::parse_edge_list("0 1\r\n1 2\r\n").num_edges(), 2u);
}

TEST(EdgeList, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of([] { io::parse_edge_list("0 1\n1 x\n", "g.txt"); }).find("g.txt:2"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_edge_list("0 1\n1 2.5\n"); }).find(":2"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_edge_list("# c\n0 -1\n"); }).find(":2: negative"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_edge_list("0 1 2\n"); }).find(":1"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_edge_list("0 1\nn=3\n"); }).find(":2"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_edge_list("n=2\n0 5\n"); }), "");
  EXPECT_NE(error_of([] { io::parse_edge_list("# nothing\n"); }).find("empty graph"), std::string::npos);
}

TEST(EdgeList, RoundTripIsIdentityOnCanonicalForm) {
  TempDir tmp;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Graph g = build_graph(oracle::random_edge_list(60, 0.1, seed), 64);
    const auto path = tmp.path() / "g.edges";
    io::write_edge_list(g, path);
    const Graph back = io::read_edge_list(path);
    EXPECT_EQ(back, g);
    EXPECT_EQ(io::format_edge_list(back), io::read_text(path));
  }
}

TEST(FeaturesCsv, ParsesMatrix) {
  const auto x = io::parse_features_csv("1,2\n3.5, -4\n+5,6e-1\n");
  ASSERT_EQ(x.rows(), 3);
  ASSERT_EQ(x.cols(), 2);
  EXPECT_EQ(x(1, 0), 3.5);
  EXPECT_EQ(x(1, 1), -4.0);
  EXPECT_EQ(x(2, 0), 5.0);
  EXPECT_EQ(x(2, 1), 0.6);
}

TEST(FeaturesCsv, Errors) {
  EXPECT_NE(error_of([] { io::parse_features_csv(""); }).find("empty"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_features_csv("\n\n"); }).find("empty"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_features_csv("1,2\n3,abc\n", "f.csv"); }).find("f.csv:2, column 2"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_features_csv("1,2\n3\n"); }).find(":2"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_features_csv("1,2\n\n3,4\n"); }).find(":2"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_features_csv("1,nan\n"); }).find("column 2"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_features_csv("1,\n"); }).find("column 2"), std::string::npos);
}

TEST(FeaturesCsv, LargeRoundTrip) {
  TempDir tmp;
  const Matrix x = oracle::random_matrix(500, 20, 3) * 1e3;
  io::write_features_csv(x, tmp.path() / "x.csv");
  const Matrix back = io::read_features_csv(tmp.path() / "x.csv");
  EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(back, x);
}

TEST(LabelsCsv, ParseAndErrors) {
  EXPECT_EQ(io::parse_labels_csv("0\n2\n1\n"), (Labels{0, 2, 1}));
  EXPECT_NE(error_of([] { io::parse_labels_csv(""); }).find("empty"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_labels_csv("0\n1.5\n", "y.csv"); }).find("y.csv:2"), std::string::npos);
  TempDir tmp;
  io::write_labels_csv(Labels{3, 1, 4}, tmp.path() / "y.csv");
  EXPECT_EQ(io::read_labels_csv(tmp.path() / "y.csv"), (Labels{3, 1, 4}));
}

TEST(LoadDataset, CrossChecksRowCounts) {
  TempDir tmp;
  io::write_text(tmp.path() / "g.edges", "0 1\n1 2\n");
  io::write_text(tmp.path() / "x.csv", "1\n2\n3\n");
  io::write_text(tmp.path() / "short.csv", "1\n2\n");
  io::write_text(tmp.path() / "y.csv", "0\n1\n0\n");
  const auto ds = io::load_dataset(tmp.path() / "g.edges", tmp.path() / "x.csv", tmp.path() / "y.csv");
  EXPECT_EQ(ds.features->rows(), 3);
  EXPECT_EQ(ds.labels->size(), 3u);
  EXPECT_THROW(io::load_dataset(tmp.path() / "g.edges", tmp.path() / "short.csv"), DataError);
  EXPECT_THROW(io::load_dataset(tmp.path() / "g.edges", std::nullopt, tmp.path() / "short.csv"), DataError);
  const auto missing = error_of([&] { io::load_dataset(tmp.path() / "nope.edges"); });
  EXPECT_NE(missing.find("nope.edges"), std::string::npos);
}

TEST(WriteSample, FullRateKeepsAllIds) {
  TempDir tmp;
  const Graph p3 = io::parse_edge_list("0 1\n1 2\n");
  SampleSpec spec;
  spec.method = SampleMethod::random;
  io::write_sample(sample(p3, nullptr, spec), tmp.path() / "s");
  EXPECT_EQ(io::read_text(tmp.path() / "s" / "kept.txt"), "0\n1\n2\n");
  EXPECT_EQ(io::read_text(tmp.path() / "s" / "idmap.txt"), "0 0\n1 1\n2 2\n");
  EXPECT_FALSE(fs::exists(tmp.path() / "s" / "features.csv"));
}

TEST(WriteSample, KeptFileReinducesSubgraph) {
  TempDir tmp;
  const NodeId n = 120;
  const Graph g = build_graph(oracle::random_edge_list(n, 0.05, 4), n);
  const Matrix x = oracle::random_matrix(n, 3, 5);
  Labels y(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) y[u] = static_cast<int>(u % 3);
  io::write_edge_list(g, tmp.path() / "g.edges");
  for (auto method : {SampleMethod::homophily, SampleMethod::random, SampleMethod::degree_greedy}) {
    SampleSpec spec;
    spec.gamma = 0.375;
    spec.method = method;
    spec.seed = 8;
    const auto r = sample(g, &x, spec, &y);
    const auto dir = tmp.path() / std::string(to_string(method));
    io::write_sample(r, dir);
    const Graph original = io::read_edge_list(tmp.path() / "g.edges");
    const auto kept = io::read_kept(dir / "kept.txt");
    const Graph again = induced_subgraph(original, NodeIndexSet(kept, original.num_nodes()));
    EXPECT_EQ(again, r.subgraph);
    const Graph relabeled = io::read_edge_list(dir / "subgraph.edges");
    EXPECT_EQ(relabeled.edge_list(), r.subgraph.edge_list());
    EXPECT_EQ(io::read_features_csv(dir / "features.csv"), r.features);
    EXPECT_EQ(io::read_labels_csv(dir / "labels.csv"), *r.labels);
  }
}

TEST(Report, RoundTripIsBitIdentical) {
  const auto r = sample_report();
  const std::string text = io::serialize_report(r);
  const auto back = io::parse_report(text);
  EXPECT_EQ(back, r);
  EXPECT_EQ(io::serialize_report(back), text);
  EXPECT_EQ(std::memcmp(&*back.homophily, &*r.homophily, sizeof(double)), 0);
}

TEST(Report, RandomValuesRoundTrip) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    auto r = sample_report();
    r.homophily = -std::abs(unit(rng)) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    r.trace = std::abs(unit(rng)) * 1e6;
    r.adjusted_trace = std::abs(unit(rng));
    r.trace_bound = std::abs(unit(rng)) * 1e-3;
    r.accuracy = std::nullopt;
    r.timings = {{"sample", std::abs(unit(rng))}, {"metrics", 1e-7}};
    const auto text = io::serialize_report(r);
    EXPECT_EQ(io::parse_report(text), r);
    EXPECT_EQ(io::serialize_report(io::parse_report(text)), text);
  }
}

TEST(Report, FixedLayout) {
  io::MetricsReport r;
  r.dataset = "d";
  r.method = "random";
  r.gamma = 0.5;
  r.nodes = 2;
  r.edges = 1;
  r.trace = 2;
  r.adjusted_trace = 1;
  r.components = 1;
  r.laplacian_rank = 1;
  r.phases = {"sample", "metrics"};
  EXPECT_EQ(io::serialize_report(r),
            "{\n"
            "  \"dataset\": \"d\",\n"
            "  \"method\": \"random\",\n"
            "  \"gamma\": 0.5,\n"
            "  \"seed\": 0,\n"
            "  \"nodes\": 2,\n"
            "  \"edges\": 1,\n"
            "  \"homophily\": null,\n"
            "  \"trace\": 2,\n"
            "  \"adjusted_trace\": 1,\n"
            "  \"components\": 1,\n"
            "  \"laplacian_rank\": 1,\n"
            "  \"trace_bound\": null,\n"
            "  \"bound_satisfied\": null,\n"
            "  \"accuracy\": null,\n"
            "  \"phases\": [\"sample\", \"metrics\"]\n"
            "}\n");
}

TEST(Report, ViolatedBoundIsRejected) {
  auto r = sample_report();
  r.bound_satisfied = false;
  EXPECT_THROW(io::serialize_report(r), NumericalError);
}

TEST(Report, ParseErrorsNameTheField) {
  const std::string good = io::serialize_report(sample_report());
  auto without = [&](const std::string& key) {
    auto j = nlohmann::json::parse(good);
    j.erase(key);
    return j.dump();
  };
  EXPECT_NE(error_of([&] { io::parse_report(without("trace"), "r.json"); }).find("'trace' is missing"), std::string::npos);
  auto j = nlohmann::json::parse(good);
  j["nodes"] = "many";
  EXPECT_NE(error_of([&] { io::parse_report(j.dump()); }).find("'nodes'"), std::string::npos);
  EXPECT_NE(error_of([] { io::parse_report("{not json"); }), "");
}

TEST(Report, FileRoundTrip) {
  TempDir tmp;
  const auto r = sample_report();
  io::write_report(r, tmp.path() / "r.json");
  EXPECT_EQ(io::read_report(tmp.path() / "r.json"), r);
  EXPECT_THROW(io::write_report(r, tmp.path() / "missing_dir" / "r.json"), DataError);
}
