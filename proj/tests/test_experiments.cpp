#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cim/experiments.hpp"

using namespace cim;
using namespace cim::experiments;

namespace {

ResultTable sample_table() {
  ResultTable t;
  t.name = "demo";
  t.metadata = {{"figure", "fig4"}, {"config", "{\"a\":1}"}};
  t.columns = {"tau", "value", "value_se"};
  t.add_row({0.0, 0.1 + 0.2, 1e-17});
  t.add_row({1.0, -3.5e8, std::numeric_limits<double>::quiet_NaN()});
  t.add_row({2.0, 1.0 / 3.0, 123456789.123456789});
  return t;
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Csv, RoundTripIsExact) {
  const auto t = sample_table();
  auto back = parse_csv(to_csv(t));
  back.name = t.name;
  EXPECT_EQ(back, t);
  EXPECT_EQ(to_csv(back), to_csv(t));
}

TEST(Csv, FormatHasHeaderMetadataAndEnoughDigits) {
  const std::string csv = to_csv(sample_table());
  EXPECT_EQ(csv.rfind("# figure: fig4\n", 0), 0u);
  EXPECT_NE(csv.find("\ntau,value,value_se\n"), std::string::npos);
  EXPECT_NE(csv.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(csv.find("1,-350000000,\n"), std::string::npos);
}

TEST(Csv, RejectsMalformedInput) {
  EXPECT_THROW(parse_csv(""), std::invalid_argument);
  EXPECT_THROW(parse_csv("a,b\n1\n"), std::invalid_argument);
  EXPECT_THROW(parse_csv("a\nxyz\n"), std::invalid_argument);
  ResultTable t;
  t.columns = {"a,b"};
  EXPECT_THROW(to_csv(t), std::invalid_argument);
  EXPECT_THROW(t.add_row({1.0, 2.0}), std::invalid_argument);
}

TEST(Config, EmptyFileGivesDefaults) {
  const auto c = parse_ensemble_config("");
  const ensemble::EnsembleConfig d;
  EXPECT_EQ(c.model, d.model);
  EXPECT_EQ(c.n_trajectories, d.n_trajectories);
  EXPECT_EQ(c.master_seed, d.master_seed);
  EXPECT_DOUBLE_EQ(c.continuous.g, d.continuous.g);
  EXPECT_DOUBLE_EQ(c.integrator.dt, d.integrator.dt);
  EXPECT_FALSE(c.observables.empty());
  EXPECT_EQ(parse_ensemble_config("{}").n_trajectories, d.n_trajectories);
}

TEST(Config, OverridesAreReflectedInMetadata) {
  const auto c = parse_ensemble_config(R"({"n_trajectories": 100, "xi": 0.6})");
  EXPECT_EQ(c.n_trajectories, 100u);
  EXPECT_NE(describe_config(c).find("\"n_trajectories\":100"), std::string::npos);
  auto s = parse_experiment_spec(R"({"figure": "fig4", "trajectories": 100})");
  EXPECT_EQ(s.trajectories, 100u);
}

TEST(Config, RangeErrorsCarryKeyPaths) {
  try {
    parse_ensemble_config(R"({"xi": 1.5})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "xi");
    EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos);
  }
  try {
    parse_ensemble_config(R"({"integrator": {"dt": 0.01, "stepz": 3}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "integrator.stepz");
  }
  try {
    parse_ensemble_config(R"({"model": "discrete", "discrete": {"couplings": [[0, 0, 1]]}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "discrete.couplings[0]");
  }
  EXPECT_THROW(parse_ensemble_config(R"({"n_trajectories": "many"})"), ConfigError);
  EXPECT_THROW(parse_ensemble_config(R"({"model": "ring_wigner", "xi": 0.6})"), ConfigError);
  EXPECT_THROW(parse_ensemble_config("{not json"), ConfigError);
  EXPECT_THROW(parse_ensemble_config(R"({"observables": ["epr:0:9"]})"), ConfigError);
  EXPECT_THROW(parse_ensemble_config(R"({"discrete": {}})"), ConfigError);
}

TEST(Config, DiscreteSchema) {
  const auto c = parse_ensemble_config(R"({
    "model": "discrete",
    "reservoir": {"kind": "squeezed", "r": 0.6},
    "discrete": {"n": 4, "p": 1.1, "couplings": [[0, 1, -0.01], [1, 2, -0.01]],
                 "rounds": 10, "injection": "pre_gain"}
  })");
  EXPECT_EQ(c.discrete.n, 4u);
  EXPECT_DOUBLE_EQ(c.discrete.coupling[1 * 4 + 0], -0.01);
  EXPECT_EQ(c.discrete.reservoir, ReservoirSpec::squeezed(0.6));
  EXPECT_EQ(c.discrete.order, discrete::InjectionOrder::pre_gain);
  auto lin = c.discrete;
  EXPECT_NEAR(c.discrete.pump_e, 1.1 * discrete::linear_threshold(lin), 1e-15);
}

TEST(Config, DescribeRoundTripsThroughParser) {
  const auto c = parse_ensemble_config(R"({
    "model": "two_dopo_positive_p", "xi": 0.6, "n_trajectories": 50,
    "pump": {"kind": "linear_ramp", "e_max": 1.5, "tau_max": 200},
    "integrator": {"dt": 0.005, "total_time": 10, "sample_spacing": 1},
    "observables": ["epr"]
  })");
  const auto again = parse_ensemble_config(describe_config(c));
  EXPECT_EQ(describe_config(again), describe_config(c));
}

TEST(ExperimentSpec, RejectsUnknownFigureAndOverride) {
  EXPECT_THROW(parse_experiment_spec(R"({"figure": "fig99"})"), ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"figure": "fig4", "overrides": {"bogus": 1}})"),
               ConfigError);
  ExperimentSpec s;
  s.figure = "fig4";
  s.overrides = {{"dt", -1.0}};
  s.trajectories = 10;
  EXPECT_THROW(run_experiment(s), std::invalid_argument);
}

TEST(Experiments, Fig4ColumnsAndDeterminismAcrossWorkers) {
  ExperimentSpec s;
  s.figure = "fig4";
  s.trajectories = 40;
  s.overrides = {{"total_time", 4.0}, {"dt", 0.01}, {"xi", 0.6}};
  s.workers = 1;
  const auto a = run_experiment(s);
  ASSERT_EQ(a.size(), 1u);
  const auto& t = a[0];
  EXPECT_EQ(t.columns[0], "tau");
  EXPECT_NO_THROW(t.column_index("epr_sum_wigner"));
  EXPECT_NO_THROW(t.column_index("epr_sum_wigner_se"));
  EXPECT_NO_THROW(t.column_index("epr_sum_positive_p_se"));
  EXPECT_EQ(t.rows.size(), 5u);
  s.workers = 4;
  const auto b = run_experiment(s);
  EXPECT_EQ(to_csv(a[0]), to_csv(b[0]));
}

TEST(Experiments, WriteProducesCsvAndSidecar) {
  ExperimentSpec s;
  s.figure = "fig12";
  s.trajectories = 16;
  s.r = {0.0, 1.2};
  s.p = {0.9, 1.0, 1.05, 1.1, 1.2, 1.3, 1.5};
  s.overrides = {{"rounds", 200}};
  s.out_dir = std::filesystem::temp_directory_path() / "cim_fig12_test";
  std::filesystem::remove_all(s.out_dir);
  const auto panels = run_experiment(s);
  const auto paths = write_experiment(s, panels, 1.5);
  ASSERT_EQ(paths.size(), 2u);
  std::ifstream in(paths[0]);
  const auto back = read_csv(in);
  EXPECT_EQ(back.columns[0], "p");
  EXPECT_NO_THROW(back.column_index("success_probability_r0"));
  EXPECT_NO_THROW(back.column_index("success_probability_r1.2_se"));
  EXPECT_EQ(back.rows.size(), 7u);
  const std::string csv = read(paths[0]);
  EXPECT_NE(csv.find("# trajectories: 16"), std::string::npos);
  EXPECT_EQ(csv.find("runtime"), std::string::npos);
  EXPECT_NE(read(paths[1]).find("runtime_seconds"), std::string::npos);
  std::filesystem::remove_all(s.out_dir);
}

TEST(Experiments, EveryFigureHasPreset) {
  for (const auto& id : figure_ids()) {
    ExperimentSpec s;
    s.figure = id;
    EXPECT_NO_THROW(s.validate()) << id;
  }
}

TEST(ThresholdScan, StableAcrossSeeds) {
  std::vector<double> p_grid;
  for (int k = 0; k <= 15; ++k) p_grid.push_back(0.5 + 0.1 * k);
  std::vector<double> estimates;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ensemble::EnsembleConfig c;
    c.model = ensemble::ModelKind::discrete;
    c.n_trajectories = 200;
    c.master_seed = seed;
    c.discrete.coupling = discrete::ring_coupling(16, -0.01);
    const double e_lin = discrete::linear_threshold(c.discrete);
    std::vector<double> grid;
    for (double p : p_grid) grid.push_back(p * e_lin);
    const auto scan = threshold_scan(c, grid);
    EXPECT_EQ(scan.table.rows.size(), grid.size());
    estimates.push_back(scan.estimate.pump / e_lin);
  }
  const auto [lo, hi] = std::minmax_element(estimates.begin(), estimates.end());
  EXPECT_LE(*hi - *lo, 0.1 + 1e-12);
  EXPECT_GT(*lo, 0.8);
  EXPECT_LT(*hi, 1.4);
}

TEST(ThresholdScan, FromJson) {
  const auto scan = threshold_scan_from_json(R"({
    "model": "discrete", "n_trajectories": 20,
    "discrete": {"rounds": 300}, "p_grid": [0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.6]
  })");
  EXPECT_EQ(scan.table.columns[0], "pump_e");
  EXPECT_THROW(threshold_scan_from_json(R"({"model": "discrete"})"), ConfigError);
}
