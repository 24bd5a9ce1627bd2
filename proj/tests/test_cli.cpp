#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace tdm;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("tdm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
    clean = (dir / "clean.pgm").string();
    save_pgm(make_phantom(PhantomKind::Circle, 64, 64), clean);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
  std::string clean;
};

}  // namespace

TEST_F(CliTest, MissingInputIsUsageError) {
  const auto r = invoke({"speckle", "--out", path("x.pgm")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--in"), std::string::npos);
}

TEST_F(CliTest, NoSubcommandIsUsageError) { EXPECT_EQ(invoke({}).code, 2); }

TEST_F(CliTest, SpeckleIsDeterministic) {
  const auto a = invoke({"speckle", "--in", clean, "--out", path("a.pgm"), "--looks", "3", "--seed", "9"});
  const auto b = invoke({"speckle", "--in", clean, "--out", path("b.pgm"), "--looks", "3", "--seed", "9"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a.pgm")), slurp(path("b.pgm")));
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "noise_mor,noise_vor");
}

TEST_F(CliTest, SpeckleOneLookNoiseVarianceNearOne) {
  save_pgm(make_phantom(PhantomKind::Circle, 256, 256), clean);
  const auto r = invoke({"speckle", "--in", clean, "--out", path("n.pgm"), "--looks", "1", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto row = r.out.substr(r.out.find('\n') + 1);
  const double vor = std::stod(row.substr(row.find(',') + 1));
  EXPECT_NEAR(vor, 1.0, 0.05);
}

TEST_F(CliTest, SpeckleMissingFileIsRuntimeError) {
  const auto r = invoke({"speckle", "--in", path("absent.pgm"), "--out", path("x.pgm")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("absent.pgm"), std::string::npos);
}

TEST_F(CliTest, DespeckleConstantInputIsIdentity) {
  const auto flat = path("flat.pgm");
  save_pgm(ImageGrid(40, 40, 128.0 / 255.0), flat);
  write_text(path("run.toml"), "stop = rel_change\n");
  const auto r = invoke({"despeckle", "--in", flat, "--out", path("out.pgm"), "--config", path("run.toml")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "steps,best_step\n1,1\n");
  EXPECT_EQ(slurp(flat), slurp(path("out.pgm")));
  const auto hist = slurp(path("out.pgm.history.csv"));
  EXPECT_EQ(hist.substr(0, hist.find('\n')), "step,rel_change,psnr,gs_sweeps,max_g");
}

TEST_F(CliTest, DespeckleBestPsnrNeedsReference) {
  write_text(path("run.toml"), "stop = best_psnr\n");
  const auto r = invoke({"despeckle", "--in", clean, "--out", path("out.pgm"), "--config", path("run.toml")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stop"), std::string::npos);
}

TEST_F(CliTest, DespeckleUnknownKeyNamesIt) {
  write_text(path("run.toml"), "gama = 2\n");
  const auto r = invoke({"despeckle", "--in", clean, "--out", path("out.pgm"), "--config", path("run.toml")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("gama"), std::string::npos);
}

TEST_F(CliTest, DespeckleCflViolationPrintsAdmissibleTau) {
  write_text(path("run.toml"), "tau = 3\n");
  const auto r = invoke({"despeckle", "--in", clean, "--out", path("out.pgm"), "--config", path("run.toml")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("admissible tau: "), std::string::npos);
}

TEST_F(CliTest, DespeckleImprovesPsnrWithReference) {
  save_pgm(make_phantom(PhantomKind::Circle, 128, 128), clean);
  ASSERT_EQ(invoke({"speckle", "--in", clean, "--out", path("noisy.pgm"), "--looks", "10", "--seed", "1"}).code, 0);
  write_text(path("run.toml"),
             "model = telegraph\ngamma = 2\nexponent = avg_gray\np0 = 2.2\nK = 0.1\nnu = 1\nstop = best_psnr\n");
  const auto r = invoke({"despeckle", "--in", path("noisy.pgm"), "--out", path("out.pgm"), "--config", path("run.toml"),
                      "--reference", clean, "--history", path("h.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "steps,best_step,psnr_in,psnr_out");
  std::vector<std::string> cells;
  std::stringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_GT(std::stod(cells[3]), std::stod(cells[2]));
  EXPECT_TRUE(fs::exists(path("h.csv")));
}

TEST_F(CliTest, MetricsRestoredEqualsNoisyHasZeroGain) {
  ASSERT_EQ(invoke({"speckle", "--in", clean, "--out", path("noisy.pgm"), "--looks", "3", "--seed", "2"}).code, 0);
  const auto r = invoke({"metrics", "--clean", clean, "--noisy", path("noisy.pgm"), "--restored", path("noisy.pgm")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "psnr,mssim,mor,vor,vor_norm,dg,enl,enl_star,si,fom");
  std::vector<std::string> cells;
  std::stringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 10u);
  EXPECT_EQ(cells[5], "0");
  EXPECT_EQ(cells[4], "nan");
}

TEST_F(CliTest, MetricsRestoredEqualsCleanIsInfinite) {
  ASSERT_EQ(invoke({"speckle", "--in", clean, "--out", path("noisy.pgm"), "--looks", "3", "--seed", "2"}).code, 0);
  const auto r = invoke({"metrics", "--clean", clean, "--noisy", path("noisy.pgm"), "--restored", clean, "--looks", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto row = r.out.substr(r.out.find('\n') + 1);
  EXPECT_EQ(row.substr(0, 4), "inf,");
}

TEST_F(CliTest, MetricsShapeMismatchFails) {
  save_pgm(ImageGrid(32, 32, 0.5), path("small.pgm"));
  const auto r = invoke({"metrics", "--clean", clean, "--noisy", clean, "--restored", path("small.pgm")});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, BenchWritesReport) {
  write_text(path("suite.toml"),
             "phantoms = circle\nlooks = 5\nseeds = 1\nwidth = 32\nheight = 32\nstop = best_psnr\nmax_steps = 20\n"
             "[DCE]\nmodel = diffusion\n[TCE]\nmodel = telegraph\n");
  const auto r = invoke({"bench", "--suite", path("suite.toml"), "--out", path("a.csv"), "--jobs", "2", "--no-timing"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "cases,failed\n2,0\n");
  ASSERT_EQ(invoke({"bench", "--suite", path("suite.toml"), "--out", path("b.csv"), "--no-timing"}).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CliTest, BenchFailedCaseGivesNonzeroExit) {
  write_text(path("suite.toml"),
             "phantoms = file:" + path("absent.pgm") + "\nlooks = 1\nseeds = 1\n[DCE]\nstop = best_psnr\n");
  const auto r = invoke({"bench", "--suite", path("suite.toml"), "--out", path("a.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "cases,failed\n1,1\n");
}

TEST_F(CliTest, BinaryRunsEndToEnd) {
  const std::string cmd = std::string("\"") + TDM_CLI_PATH + "\" speckle --in \"" + clean + "\" --out \"" +
                          path("bin.pgm") + "\" --looks 2 --seed 5 > \"" + path("stdout.txt") + "\"";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(load_pgm(path("bin.pgm")).width(), 64u);
  const std::string bad = std::string("\"") + TDM_CLI_PATH + "\" speckle --out x.pgm 2> \"" + path("e.txt") + "\"";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
