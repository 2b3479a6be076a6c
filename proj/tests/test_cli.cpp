#include "mfsp/cli.hpp"
#include "mfsp/io.hpp"
#include "mfsp/iterative.hpp"
#include "mfsp/random.hpp"
#include "mfsp/reconstruct.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

using namespace mfsp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "mfsp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("mfsp_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    Matrix y(30, 40);
    for (Eigen::Index t = 0; t < y.cols(); ++t) {
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double x = static_cast<double>(i) / 30.0, tt = static_cast<double>(t);
        y(i, t) = 1.0 + std::sin(6.0 * x + 0.15 * tt) + 0.4 * std::cos(17.0 * x) * std::sin(0.4 * tt) +
                  0.1 * std::sin(31.0 * x) * std::cos(0.9 * tt);
      }
    }
    io::save_matrix(p("snap.csv"), y);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  void build_model() {
    const auto r = run({"basis", "--data", p("snap.csv"), "--out", p("model"), "--energy", "0.999"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::vector<std::string> problem() const {
    return {"--cost-cheap", "1", "--cost-exp", "3", "--sigma-cheap", "0.05", "--sigma-exp", "0.01",
            "--budget", "12"};
  }

  fs::path dir_;
};

}  // namespace

TEST(CliBasic, PrunePrintsTriple) {
  const auto r = run({"prune", "--cost-cheap", "1", "--cost-exp", "2", "--budget", "100"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "2601 51 51\n");
}

TEST(CliBasic, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  const auto r = run({"prune", "--cost-cheap", "1", "--bogus", "2"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"prune", "--cost-cheap", "1", "--cost-exp", "2"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliBasic, DataErrors) {
  EXPECT_EQ(run({"prune", "--cost-cheap", "3", "--cost-exp", "2", "--budget", "10"}).code, cli::kData);
  EXPECT_EQ(run({"basis", "--data", "/nonexistent/x.csv", "--out", "/tmp/none"}).code, cli::kData);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  io::write_text(p("run.cfg"), "costs = 1, 2\nbudget = 50\n");
  auto r = run({"--config", p("run.cfg"), "prune"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto direct = prune_allocations(1, 2, 50);
  EXPECT_EQ(r.out, std::to_string(direct.feasible_count) + " " +
                       std::to_string(direct.allocations.size()) + " " + std::to_string(direct.bound) + "\n");
  r = run({"--config", p("run.cfg"), "prune", "--budget", "100"});
  EXPECT_EQ(r.out, "2601 51 51\n");
}

TEST_F(Cli, GreedyWithTinyBudgetIsEmpty) {
  build_model();
  const auto r = run({"design", "--model", p("model"), "--algorithm", "greedy", "--cost-cheap", "1",
                      "--cost-exp", "3", "--sigma-cheap", "0.05", "--sigma-exp", "0.01", "--budget",
                      "0.5", "--out", p("d.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto d = io::read_design(p("d.json"));
  EXPECT_TRUE(d.result.selection.empty());
  EXPECT_EQ(d.result.phi_d, 0.0);
}

TEST_F(Cli, PipelineMatchesLibrary) {
  build_model();
  auto args = problem();
  args.insert(args.begin(), {"design", "--model", p("model"), "--algorithm", "iterative", "--out", p("it.json")});
  ASSERT_EQ(run(args).code, 0);
  const auto ev = run({"evaluate", "--model", p("model"), "--design", p("it.json"), "--seed", "9",
                       "--out", p("err.csv")});
  ASSERT_EQ(ev.code, 0) << ev.err;

  // same computation in-process
  const Matrix raw = io::load_matrix(p("snap.csv"));
  auto [train, test] = split_chronological(raw, 0.7);
  BasisOptions opts;
  opts.energy = 0.999;
  const auto model = make_reduced_model(make_snapshots(train, true), 0.01, opts);
  const FidelityClass cheap{1, 0.05}, exp{3, 0.01};
  const auto inst = assemble_instance(model, cheap, exp, 12);
  const auto winner = iterative_select(inst).winner;
  const auto file = io::read_design(p("it.json"));
  EXPECT_EQ(file.result.selection, winner.selection.sorted());
  EXPECT_EQ(file.result.phi_d, winner.phi_d);
  EXPECT_EQ(file.fingerprint, io::instance_fingerprint(inst));

  EvalOptions eo;
  eo.seed = 9;
  const auto s = evaluate(model, cheap, exp, winner.selection, test, eo);
  EXPECT_NE(ev.out.find("mean_rel_err=" + io::format_double(s.mean_rel_err)), std::string::npos) << ev.out;
  EXPECT_EQ(io::load_matrix(p("err.csv")), Matrix(s.per_snapshot_rel_err));
}

TEST_F(Cli, RunsAreByteIdentical) {
  build_model();
  for (const char* tag : {"a", "b"}) {
    auto g = problem();
    g.insert(g.begin(), {"design", "--model", p("model"), "--out", p(std::string("g_") + tag + ".json")});
    ASSERT_EQ(run(g).code, 0);
    auto rnd = problem();
    rnd.insert(rnd.begin(), {"design", "--model", p("model"), "--algorithm", "random", "--k-cheap", "3",
                             "--k-exp", "3", "--seed", "4", "--out", p(std::string("r_") + tag + ".json")});
    ASSERT_EQ(run(rnd).code, 0);
    const auto c = run({"compare", "--model", p("model"), "--designs", p(std::string("g_") + tag + ".json"),
                        p(std::string("r_") + tag + ".json"), "--samples", "30", "--seed", "2", "--out-table",
                        p(std::string("t_") + tag + ".csv"), "--out-hist", p(std::string("h_") + tag + ".csv")});
    ASSERT_EQ(c.code, 0) << c.err;
  }
  for (const char* stem : {"g_", "r_"}) {
    EXPECT_EQ(io::read_text(p(std::string(stem) + "a.json")), io::read_text(p(std::string(stem) + "b.json")));
  }
  EXPECT_EQ(io::read_text(p("t_a.csv")), io::read_text(p("t_b.csv")));
  EXPECT_EQ(io::read_text(p("h_a.csv")), io::read_text(p("h_b.csv")));
  EXPECT_EQ(io::read_text(p("t_a.csv")).rfind("design,k_ch,k_exp,spend,phi_d,mean_rel_err\n", 0), 0u);
}

TEST_F(Cli, MismatchedModelIsRejected) {
  build_model();
  auto g = problem();
  g.insert(g.begin(), {"design", "--model", p("model"), "--out", p("g.json")});
  ASSERT_EQ(run(g).code, 0);
  ASSERT_EQ(run({"basis", "--data", p("snap.csv"), "--out", p("other"), "--lambda", "0.5"}).code, 0);
  const auto r = run({"evaluate", "--model", p("other"), "--design", p("g.json")});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("fingerprint"), std::string::npos);
}

TEST_F(Cli, OracleGuardsCandidateCount) {
  build_model();
  auto o = problem();
  o.insert(o.begin(), {"oracle", "--model", p("model")});
  EXPECT_EQ(run(o).code, cli::kData);

  Matrix mask = Matrix::Zero(30, 1);
  for (int i : {1, 6, 12, 18, 24, 29}) mask(i, 0) = 1.0;
  io::save_matrix(p("mask.csv"), mask);
  ASSERT_EQ(run({"basis", "--data", p("snap.csv"), "--out", p("small"), "--mask", p("mask.csv")}).code, 0);
  o = problem();
  o.insert(o.begin(), {"oracle", "--model", p("small"), "--out", p("opt.json")});
  const auto r = run(o);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::read_design(p("opt.json")).result.algorithm, "exhaustive");
}

TEST_F(Cli, ReconstructWritesState) {
  build_model();
  auto g = problem();
  g.insert(g.begin(), {"design", "--model", p("model"), "--out", p("g.json")});
  ASSERT_EQ(run(g).code, 0);
  const auto r = run({"reconstruct", "--model", p("model"), "--design", p("g.json"), "--data", p("snap.csv"),
                      "--snapshot", "35", "--noise-free", "--out", p("est.mfsm")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Matrix est = io::load_matrix(p("est.mfsm"));
  EXPECT_EQ(est.rows(), 30);
  EXPECT_EQ(est.cols(), 1);
  EXPECT_NE(r.out.find("rel_err="), std::string::npos);
}
