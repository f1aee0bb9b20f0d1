#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "pcomq/parallel.hpp"
#include "pcomq/tensor_io.hpp"

namespace pcomq {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Rows = std::vector<std::vector<std::string>>;

Rows parse_csv(const std::string& text) {
  Rows rows;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(cells);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("pcomq-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  std::string path(const std::string& name) const { return (root_ / name).string(); }

  fs::path root_;
};

TEST_F(CliTest, SimulateIsDeterministic) {
  ASSERT_EQ(run_cli({"simulate", "--seed", "7", "--out-dir", path("a")}).code, 0);
  ASSERT_EQ(run_cli({"simulate", "--seed", "7", "--out-dir", path("b")}).code, 0);
  for (const char* f : {"weights.pqt", "calib.pqt", "manifest.json"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
  const Matrix w = read_tensor(root_ / "a" / "weights.pqt");
  const Matrix x = read_tensor(root_ / "a" / "calib.pqt");
  EXPECT_EQ(w.rows(), 64u);
  EXPECT_EQ(w.cols(), 64u);
  EXPECT_EQ(x.rows(), 256u);
  EXPECT_EQ(x.cols(), 64u);
  SimWeightParams p;
  p.seed = 7;
  EXPECT_EQ(w, gen_weights(p));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({"simulate", "--outlier-frac", "1.5", "--out-dir", path("x")}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--outlier-range", "6,3", "--out-dir", path("x")}).code, 2);
  EXPECT_EQ(run_cli({"simulate"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"bogus"}).code, 2);
  ASSERT_EQ(run_cli({"simulate", "--out-dir", path("d")}).code, 0);
  const std::string w = path("d/weights.pqt");
  EXPECT_EQ(run_cli({"quantize", "--method", "comq", "--weights", w, "--out-dir", path("q")}).code, 2);
  EXPECT_EQ(run_cli({"quantize", "--method", "rtn", "--bits", "3", "--weights", w, "--out-dir",
                     path("q")})
                .code,
            2);
  EXPECT_EQ(run_cli({"quantize", "--method", "nope", "--weights", w, "--out-dir", path("q")}).code, 2);
  EXPECT_EQ(run_cli({"quantize", "--method", "rtn", "--lambda", "0", "--weights", w, "--out-dir",
                     path("q")})
                .code,
            2);
}

TEST_F(CliTest, DataErrorsExitOne) {
  ASSERT_EQ(run_cli({"simulate", "--out-dir", path("d")}).code, 0);
  ASSERT_EQ(run_cli({"simulate", "--m", "32", "--out-dir", path("e")}).code, 0);
  EXPECT_EQ(run_cli({"quantize", "--method", "rtn", "--weights", path("missing.pqt"), "--out-dir",
                     path("q")})
                .code,
            1);
  EXPECT_EQ(run_cli({"quantize", "--method", "comq", "--weights", path("d/weights.pqt"), "--calib",
                     path("e/calib.pqt"), "--out-dir", path("q")})
                .code,
            1);
  EXPECT_EQ(run_cli({"eval", "--weights", path("d/weights.pqt"), "--quantized", path("e/weights.pqt"),
                     "--calib", path("d/calib.pqt")})
                .code,
            1);
  write_text_file(root_ / "junk.pqt", "not a tensor");
  const RunResult r = run_cli({"quantize", "--method", "rtn", "--weights", path("junk.pqt"),
                               "--out-dir", path("q")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bad magic"), std::string::npos);
}

TEST_F(CliTest, RtnOnGridReproducesWeights) {
  const UnitLayout layout(16, 8, Granularity::per_channel());
  const Matrix w = testing::on_grid_matrix(layout, 4, 1);
  write_tensor(root_ / "w.pqt", w);
  ASSERT_EQ(run_cli({"quantize", "--method", "rtn", "--bits", "4", "--granularity", "channel",
                     "--weights", path("w.pqt"), "--out-dir", path("q")})
                .code,
            0);
  EXPECT_EQ(slurp(root_ / "q" / "quantized.pqt"), slurp(root_ / "w.pqt"));
}

TEST_F(CliTest, ComqWithIdentityCalibrationEqualsRtn) {
  write_tensor(root_ / "w.pqt", testing::random_matrix(12, 6, 2));
  write_tensor(root_ / "x.pqt", Matrix::identity(12));
  for (const char* g : {"layer", "channel", "block"}) {
    const std::vector<std::string> common{"--bits", "2", "--granularity", g, "--block-size", "5",
                                          "--weights", path("w.pqt")};
    auto rtn = common;
    rtn.insert(rtn.begin(), {"quantize", "--method", "rtn", "--out-dir", path("r")});
    auto comq = common;
    comq.insert(comq.begin(), {"quantize", "--method", "comq", "--no-scale-update", "--calib",
                               path("x.pqt"), "--out-dir", path("c")});
    ASSERT_EQ(run_cli(rtn).code, 0);
    ASSERT_EQ(run_cli(comq).code, 0);
    EXPECT_EQ(slurp(root_ / "r" / "quantized.pqt"), slurp(root_ / "c" / "quantized.pqt")) << g;
    EXPECT_EQ(slurp(root_ / "r" / "codes.pqt"), slurp(root_ / "c" / "codes.pqt")) << g;
  }
}

TEST_F(CliTest, PermcomqWritesAllOutputsAndDescendingTrace) {
  ASSERT_EQ(run_cli({"simulate", "--seed", "3", "--out-dir", path("d")}).code, 0);
  ASSERT_EQ(run_cli({"quantize", "--method", "permcomq", "--bits", "2", "--granularity", "block",
                     "--block-size", "16", "--weights", path("d/weights.pqt"), "--calib",
                     path("d/calib.pqt"), "--out-dir", path("q")})
                .code,
            0);
  for (const char* f : {"quantized.pqt", "codes.pqt", "params.csv", "loss_trace.csv", "plan.csv",
                        "manifest.json"}) {
    EXPECT_TRUE(fs::exists(root_ / "q" / f)) << f;
  }
  const Rows trace = parse_csv(slurp(root_ / "q" / "loss_trace.csv"));
  ASSERT_EQ(trace[0], (std::vector<std::string>{"event", "kind", "iteration", "row", "loss", "feasible"}));
  ASSERT_EQ(trace.size(), 1u + 2 * (64 + 1));
  double previous = 0.0;
  bool seen_feasible = false;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const double loss = std::stod(trace[k][4]);
    if (trace[k][5] == "1") {
      if (seen_feasible) EXPECT_LE(loss, previous * (1 + 1e-9)) << "event " << k - 1;
      seen_feasible = true;
    }
    previous = loss;
  }
  EXPECT_TRUE(seen_feasible);

  const Rows plan = parse_csv(slurp(root_ / "q" / "plan.csv"));
  ASSERT_EQ(plan[0], (std::vector<std::string>{"column", "position", "source_row"}));
  EXPECT_EQ(plan.size(), 1u + 64 * 64);
}

TEST_F(CliTest, EvalSchemaAndIdentity) {
  ASSERT_EQ(run_cli({"simulate", "--out-dir", path("d")}).code, 0);
  const RunResult r = run_cli({"eval", "--weights", path("d/weights.pqt"), "--quantized",
                               path("d/weights.pqt"), "--calib", path("d/calib.pqt"), "--bins", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Rows rows = parse_csv(r.out);
  ASSERT_EQ(rows[0], (std::vector<std::string>{"bin_lo", "bin_hi", "count", "mean_rel_err",
                                               "proxy_loss", "max_abs_error"}));
  ASSERT_EQ(rows.size(), 9u);
  std::size_t total = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    total += std::stoul(rows[k][2]);
    if (rows[k][3] != "nan") EXPECT_EQ(std::stod(rows[k][3]), 0.0);
    EXPECT_EQ(std::stod(rows[k][4]), 0.0);
    EXPECT_EQ(std::stod(rows[k][5]), 0.0);
  }
  EXPECT_EQ(total, 64u * 64u);

  ASSERT_EQ(run_cli({"eval", "--weights", path("d/weights.pqt"), "--quantized",
                     path("d/weights.pqt"), "--calib", path("d/calib.pqt"), "--out", path("e.csv")})
                .code,
            0);
  EXPECT_EQ(parse_csv(slurp(root_ / "e.csv")).size(), 17u);
}

TEST_F(CliTest, CompareIsComplete) {
  const RunResult r = run_cli({"compare", "--seeds", "1..10", "--bits", "2", "--bins", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Rows rows = parse_csv(r.out);
  ASSERT_EQ(rows[0].size(), 10u);
  std::set<std::pair<std::string, std::string>> cells;
  std::map<std::string, int> summaries;
  std::size_t bins = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][0] == "cell") cells.insert({rows[k][1], rows[k][3]});
    if (rows[k][0] == "summary") ++summaries[rows[k][1]];
    if (rows[k][0] == "bin") ++bins;
  }
  EXPECT_EQ(cells.size(), 30u);
  EXPECT_EQ(bins, 30u * 4);
  EXPECT_EQ(summaries, (std::map<std::string, int>{{"comq", 1}, {"permcomq", 1}, {"rtn", 1}}));
  EXPECT_EQ(run_cli({"compare", "--seeds", "3..1"}).code, 2);
  EXPECT_EQ(run_cli({"compare", "--methods", "comq,foo"}).code, 2);
}

TEST_F(CliTest, EightBitMethodsWithinFivePercent) {
  const RunResult r = run_cli({"compare", "--bits", "8", "--bins", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, double> mean_loss;
  for (const auto& row : parse_csv(r.out)) {
    if (row[0] == "summary") mean_loss[row[1]] = std::stod(row[8]);
  }
  ASSERT_EQ(mean_loss.size(), 3u);
  double lo = INFINITY, hi = 0.0;
  for (const auto& [method, loss] : mean_loss) {
    lo = std::min(lo, loss);
    hi = std::max(hi, loss);
  }
  EXPECT_LE(hi, 1.05 * lo) << "rtn " << mean_loss["rtn"] << ", comq " << mean_loss["comq"]
                           << ", permcomq " << mean_loss["permcomq"];
}

TEST_F(CliTest, OutputsIndependentOfThreadCount) {
  ASSERT_EQ(run_cli({"simulate", "--seed", "11", "--out-dir", path("d")}).code, 0);
  auto quantize_with = [&](std::size_t workers, const char* env, const std::string& dir) {
    ScopedWorkerCount guard(workers);
    ::setenv("PQ_THREADS", env, 1);
    const int code = run_cli({"quantize", "--method", "permcomq", "--bits", "2", "--weights",
                              path("d/weights.pqt"), "--calib", path("d/calib.pqt"), "--out-dir",
                              path(dir)})
                         .code;
    ::unsetenv("PQ_THREADS");
    return code;
  };
  ASSERT_EQ(quantize_with(1, "1", "one"), 0);
  ASSERT_EQ(quantize_with(4, "4", "four"), 0);
  for (const auto& entry : fs::directory_iterator(root_ / "one")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(root_ / "four" / name)) << name;
  }
}

}  // namespace
}  // namespace pcomq
