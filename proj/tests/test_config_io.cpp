#include <gtest/gtest.h>

#include <sstream>

#include "drunkgames/config.hpp"
#include "drunkgames/io/csv.hpp"
#include "oracles.hpp"

using namespace drunk;

TEST(Csv, ShortestRoundTrip) {
  oracle::Gen gen(51);
  for (int i = 0; i < 10000; ++i) {
    const double v = gen.range(-1e3, 1e3) * std::pow(10.0, gen.range(-12, 12));
    const std::string s = io::format_double(v);
    EXPECT_EQ(std::stod(s), v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(std::nan("")), "nan");
}

TEST(Csv, TrajectoryHeaderAndDigits) {
  const DrunkGame dg = presets::drunk_prisoner(0.4);
  IntegrateOptions opt;
  opt.t_max = 5;
  const Trajectory tr = integrate(dg, {0.3, 0.3}, std::span<const State>{}, opt);
  std::ostringstream os;
  io::write_trajectory(os, tr);
  const auto table = io::parse_csv(os.str());
  EXPECT_EQ(table.columns, (std::vector<std::string>{"t", "x", "alpha"}));
  ASSERT_EQ(table.rows.size(), tr.samples.size());
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    EXPECT_EQ(table.rows[i][1], tr.samples[i].state.x);
    EXPECT_EQ(table.rows[i][2], tr.samples[i].state.alpha);
  }
}

TEST(Csv, Headers) {
  auto first_line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
  std::ostringstream f;
  io::write_field(f, field_grid(presets::pub_dilemma(), 2));
  EXPECT_EQ(first_line(f.str()), "x,alpha,dx,dalpha");
  SweepDataset grid;
  grid.axis_names = {"S2", "T2"};
  std::ostringstream g;
  io::write_sweep(g, grid);
  EXPECT_EQ(first_line(g.str()), "S2,T2,kappa,attractiveness,n_samples,seed");
  SweepDataset line;
  line.axis_names = {"S1"};
  std::ostringstream l;
  io::write_sweep(l, line);
  EXPECT_EQ(first_line(l.str()), "S1,kappa,attractiveness,n_samples,seed");
  std::ostringstream a;
  io::write_abm_stats(a, std::vector<AbmStats>{});
  EXPECT_EQ(first_line(a.str()),
            "t,x_mean,alpha_mean,alpha_g1,alpha_g2,coop_g1,coop_g2,delta_alpha,dist_interior");
  std::ostringstream h;
  io::write_heatmap(h, std::vector<io::HeatmapCell>{});
  EXPECT_EQ(first_line(h.str()), "s,delta0,dist_interior_avg,delta_alpha_final");
}

TEST(GameConfig, ExplicitAndPreset) {
  const auto c = config::parse_game_config(R"({
    "g1": {"R": 1, "S": -0.5, "T": 1.5, "P": 0},
    "g2": {"R": 1, "S": 0.5, "T": 0.5, "P": 0},
    "kappa": 2,
    "q": {"type": "linear", "mu": 0.4}
  })");
  const DrunkGame dg = c.resolve();
  EXPECT_EQ(dg, presets::pub_dilemma(2.0, 0.4));
  const auto p = config::parse_game_config(
      R"({"preset": {"name": "drunk_prisoner", "params": {"s": 0.8, "kappa": 3}}})");
  EXPECT_EQ(p.resolve(), presets::drunk_prisoner(0.8, 3.0));
  const auto poly = config::parse_game_config(R"({
    "g1": {"R": 1, "S": -0.5, "T": 1.5, "P": 0},
    "g2": {"R": 1, "S": 0.5, "T": 0.5, "P": 0},
    "q": {"type": "poly", "coeffs": [-0.25, 0, 1]}
  })");
  EXPECT_EQ(poly.resolve().q, QPoly({-0.25, 0.0, 1.0}));
  EXPECT_EQ(poly.resolve().kappa, 1.0);
}

TEST(GameConfig, Diagnostics) {
  auto diag = [](const std::string& text) {
    try {
      config::parse_game_config(text);
    } catch (const config::ConfigError& e) {
      return std::make_pair(e.field(), e.line());
    }
    return std::make_pair(std::string("no error"), -1);
  };
  EXPECT_EQ(diag("{\n \"g1\": {\"R\": 1, \"S\": 0, \"T\": 1},\n \"g2\": {}\n}"),
            std::make_pair(std::string("/g1/P"), 2));
  EXPECT_EQ(diag("{\n \"g1\": {\"R\": 1, \"S\": 0, \"T\": 1, \"P\": 0},\n \"g2\": {\"R\": 1, \"S\": 0, \"T\": \"x\", \"P\": 0}\n}"),
            std::make_pair(std::string("/g2/T"), 3));
  EXPECT_EQ(diag("{\n \"preset\": {\"name\": \"pub_dilemma\"},\n \"g1\": {}\n}").first, "/preset");
  EXPECT_EQ(diag("{\n \"preset\": {\"name\": \"tavern\"}\n}"), std::make_pair(std::string("/preset/name"), 2));
  EXPECT_EQ(diag("{}").first, "/");
  EXPECT_EQ(diag("{\n\n  \"g1\": ,\n}").second, 3);
  EXPECT_EQ(diag(R"({"preset": {"name": "pub_dilemma"}, "extra": 1})").first, "/extra");
  EXPECT_EQ(diag(R"({"g1": {"R": 1, "S": 0, "T": 1, "P": 0}, "g2": {"R": 1, "S": 0, "T": 1, "P": 0}, "q": {"type": "cubic"}})").first,
            "/q/type");
}

TEST(GameConfigProperty, RoundTrip) {
  oracle::Gen gen(52);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> coeffs;
    const std::size_t deg = gen.below(4);
    for (std::size_t k = 0; k <= deg; ++k) coeffs.push_back(gen.range(-2, 2));
    const DrunkGame dg = make_drunk_game(gen.general_matrix(), gen.general_matrix(),
                                         gen.range(0.01, 100), i % 2 ? QPoly(coeffs) : QPoly::linear(gen.unit()));
    config::GameConfigFile f;
    f.explicit_game = dg;
    const std::string text = config::game_config_to_json(f).dump(2);
    const auto back = config::parse_game_config(text);
    EXPECT_EQ(back.resolve(), dg);
    EXPECT_EQ(config::game_config_to_json(back).dump(2), text);
  }
  config::GameConfigFile p;
  p.preset = config::PresetSpec{"battle", {{"s1", 0.3}}};
  const auto back = config::parse_game_config(config::game_config_to_json(p).dump());
  EXPECT_EQ(back.resolve(), presets::battle(0.3));
}

TEST(AbmConfigFile, ParseAndDefaults) {
  const auto f = config::parse_abm_config(R"({
    "game": {"preset": {"name": "drunk_prisoner", "params": {"s": 0.8}}},
    "N": 500, "delta0": 0.04, "t_max": 20, "seed": 9, "perception_mode": "per_round"
  })");
  EXPECT_EQ(f.abm.N, 500u);
  EXPECT_DOUBLE_EQ(f.abm.alpha1, 0.48);
  EXPECT_DOUBLE_EQ(f.abm.alpha2, 0.52);
  EXPECT_EQ(f.abm.t_max, 20u);
  EXPECT_EQ(f.abm.seed, 9u);
  EXPECT_EQ(f.abm.perception_mode, PerceptionMode::per_round);
  EXPECT_EQ(f.abm.beta, 0.1);
  const auto again = config::parse_abm_config(config::abm_config_file_to_json(f).dump());
  EXPECT_EQ(again.abm.alpha1, f.abm.alpha1);
  EXPECT_EQ(again.abm.N, f.abm.N);
  EXPECT_EQ(again.game.resolve(), f.game.resolve());
}

TEST(AbmConfigFile, Errors) {
  auto field_of = [](const std::string& text) {
    try {
      config::parse_abm_config(text);
    } catch (const config::ConfigError& e) {
      return e.field();
    }
    return std::string("no error");
  };
  EXPECT_EQ(field_of(R"({"N": 10})"), "/game");
  EXPECT_EQ(field_of(R"({"game": {"preset": {"name": "pub_dilemma"}}, "N": -3})"), "/N");
  EXPECT_EQ(field_of(R"({"game": {"preset": {"name": "pub_dilemma"}}, "delta0": 0.2, "alpha1": 0.1})"), "/alpha1");
  EXPECT_EQ(field_of(R"({"game": {"preset": {"name": "pub_dilemma"}}, "perception_mode": "psychic"})"),
            "/perception_mode");
  EXPECT_EQ(field_of(R"({"game": {"preset": {"name": "pub_dilemma"}}, "beta": 2})"), "/");
}

TEST(Reports, EquilibriaJsonFields) {
  const auto j = config::equilibria_to_json(fixed_points(presets::pub_dilemma()));
  ASSERT_EQ(j.size(), 5u);
  for (const auto& e : j) {
    for (const char* k : {"x", "alpha", "kind", "stability", "u", "v", "lambda1_re", "lambda1_im",
                          "lambda2_re", "lambda2_im"}) {
      EXPECT_TRUE(e.contains(k)) << k;
    }
  }
  EXPECT_EQ(j[4]["stability"], "saddle");
}
