#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "drunkgames/experiments.hpp"

using namespace drunk;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("drunkgames_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(experiments::sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(experiments::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Fig1, QuadrantOutcomes) {
  IntegrateOptions opt;
  opt.t_max = 1000;
  // PD -> 0, HG -> 1, SD(0.5, 1.5) -> 0.5, symmetric SH sits on the separatrix.
  EXPECT_EQ(experiments::single_game_outcome(PayoffMatrix::standard(-0.5, 1.5), 0.5, opt).x, 0.0);
  EXPECT_EQ(experiments::single_game_outcome(PayoffMatrix::standard(0.5, 0.5), 0.5, opt).x, 1.0);
  const auto sd = experiments::single_game_outcome(PayoffMatrix::standard(0.5, 1.5), 0.5, opt);
  EXPECT_DOUBLE_EQ(sd.x, 0.5);
  EXPECT_FALSE(sd.on_separatrix);
  const auto sh = experiments::single_game_outcome(PayoffMatrix::standard(-0.5, 0.5), 0.5, opt);
  EXPECT_TRUE(sh.on_separatrix);
  EXPECT_EQ(sh.x, 0.5);
  // F = G = 0: nothing moves.
  const auto flat = experiments::single_game_outcome(PayoffMatrix::standard(0.0, 1.0), 0.5, opt);
  EXPECT_EQ(flat.x, 0.5);
  EXPECT_NE(flat.termination, Termination::converged);
}

TEST(Fig1, GridQuadrants) {
  IntegrateOptions opt;
  opt.t_max = 1000;
  const auto cells = experiments::fig1_grid(9, 0.5, opt, 0);
  ASSERT_EQ(cells.size(), 81u);
  for (const auto& c : cells) {
    const auto q = classify_game(PayoffMatrix::standard(c.S, c.T)).quadrant;
    if (q == Quadrant::PD) EXPECT_EQ(c.outcome.x, 0.0) << c.S << "," << c.T;
    if (q == Quadrant::HG) EXPECT_EQ(c.outcome.x, 1.0) << c.S << "," << c.T;
  }
}

TEST(Reproduce, Fig2ManifestAndDeterminism) {
  const fs::path dir = fresh_dir("fig2");
  experiments::ExperimentSpec spec;
  spec.figure = "fig2";
  spec.out_dir = dir;
  const auto m = experiments::reproduce(spec);
  ASSERT_GE(m.files.size(), 4u);
  for (const auto& f : m.files) {
    EXPECT_EQ(experiments::sha256_hex(slurp(dir / f.path)), f.sha256) << f.path;
  }
  EXPECT_TRUE(fs::exists(dir / "fig2" / "manifest.json"));
  const auto eq = config::Json::parse(slurp(dir / "fig2" / "equilibria.json"));
  ASSERT_EQ(eq.size(), 5u);
  int stable = 0, unstable = 0, saddle = 0;
  for (const auto& e : eq) {
    const std::string s = e["stability"];
    if (s == "saddle") ++saddle;
    else if (s.rfind("stable", 0) == 0) ++stable;
    else if (s.rfind("unstable", 0) == 0) ++unstable;
  }
  EXPECT_EQ(stable, 2);
  EXPECT_EQ(unstable, 2);
  EXPECT_EQ(saddle, 1);
  const std::string first = slurp(dir / "fig2" / "manifest.json");
  experiments::reproduce(spec);
  EXPECT_EQ(slurp(dir / "fig2" / "manifest.json"), first);
  const auto params = config::Json::parse(slurp(dir / "fig2" / "params.json"));
  EXPECT_EQ(params["params"]["resolution"], 21);
}

TEST(Reproduce, OverridesAndErrors) {
  const fs::path dir = fresh_dir("fig7");
  experiments::ExperimentSpec spec;
  spec.figure = "fig7";
  spec.out_dir = dir;
  spec.overrides = {{"N", 200}, {"rounds", 30}};
  const auto m = experiments::reproduce(spec);
  EXPECT_EQ(m.files.size(), 5u);  // params, three runs, manifest
  const auto params = config::Json::parse(slurp(dir / "fig7" / "params.json"));
  EXPECT_EQ(params["params"]["N"], 200);

  spec.overrides = {{"bogus", 1}};
  EXPECT_THROW(experiments::reproduce(spec), Error);
  spec.overrides = {{"N", "many"}};
  EXPECT_THROW(experiments::reproduce(spec), Error);
  spec.figure = "fig9";
  spec.overrides = config::Json::object();
  EXPECT_THROW(experiments::reproduce(spec), Error);
}

TEST(Reproduce, FailureCleansUp) {
  const fs::path dir = fresh_dir("fail");
  experiments::ExperimentSpec spec;
  spec.figure = "fig6";
  spec.out_dir = dir;
  // N = 1 is rejected after params.json has been written.
  spec.overrides = {{"N", 1}, {"grid", 2}, {"rounds", 5}};
  EXPECT_THROW(experiments::reproduce(spec), Error);
  EXPECT_FALSE(fs::exists(dir / "fig6"));
}

TEST(Reproduce, Fig6SmallGrid) {
  const fs::path dir = fresh_dir("fig6");
  experiments::ExperimentSpec spec;
  spec.figure = "fig6";
  spec.out_dir = dir;
  spec.overrides = {{"N", 100}, {"grid", 3}, {"rounds", 20}};
  experiments::reproduce(spec);
  const std::string csv = slurp(dir / "fig6" / "heatmap.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,delta0,dist_interior_avg,delta_alpha_final");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
}
