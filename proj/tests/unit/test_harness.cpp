#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "gridcurio/errors.hpp"
#include "gridcurio/harness/config.hpp"
#include "gridcurio/harness/experiment.hpp"
#include "gridcurio/harness/metrics.hpp"
#include "gridcurio/harness/plot.hpp"
#include "mock_embed_server.hpp"

namespace fs = std::filesystem;

namespace gridcurio {
namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("gridcurio_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- config

TEST(Config, ParsesSectionsAndComments) {
  const ExperimentConfig c = parse_config(
      "# desk run\n"
      "env.id = MultiRoom-N2-S4\n"
      "intrinsic.method = ride   # learned embeddings\n"
      "intrinsic.beta = 0.01\n"
      "intrinsic.view = full\n"
      "ppo.learning_rate = 3e-4\n"
      "run.seeds = 4, 5\n"
      "run.total_steps = 8192\n");
  EXPECT_EQ(c.env.family, Family::MultiRoom);
  EXPECT_EQ(c.env.n_rooms, 2);
  EXPECT_EQ(c.intrinsic.method, IntrinsicMethod::Ride);
  EXPECT_EQ(c.intrinsic.input_view, InputView::Full);
  EXPECT_EQ(c.intrinsic.input_format, InputFormat::Encoded);
  EXPECT_DOUBLE_EQ(c.intrinsic.beta, 0.01);
  EXPECT_DOUBLE_EQ(c.ppo.learning_rate, 3e-4);
  EXPECT_EQ(c.ppo.n_envs, 16);
  EXPECT_EQ(c.run.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(c.run.total_steps, 8192);
}

TEST(Config, EmbeddingNoveltyDefaultsToRgb) {
  const ExperimentConfig c = parse_config("env.id = KeyCorridorS3R3\nintrinsic.method = embedding_novelty\n");
  EXPECT_EQ(c.intrinsic.input_format, InputFormat::Rgb);
}

TEST(Config, UnknownKeysAndBadValuesAreConfigErrors) {
  try {
    parse_config("env.id = MultiRoom-N2-S4\n\nppo.learnin_rate = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ppo.learnin_rate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse_config("env.id = MultiRoom-N2-S4\nppo.epochs = four\n"), ConfigError);
  EXPECT_THROW(parse_config("ppo.epochs = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("env.id = Nowhere-v0\n"), ConfigError);
  EXPECT_THROW(parse_config("env.id = MultiRoom-N2-S4\nrun.total_steps = 3000\n"), ConfigError);
  EXPECT_THROW(parse_config("env.id = MultiRoom-N2-S4\nintrinsic.method = ride\nintrinsic.format = rgb\n"),
               ConfigError);
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  try {
    parse_config("env.id = MultiRoom-N2-S4\n# ok\nthis line has no equals\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  try {
    parse_config("env.id = MultiRoom-N2-S4\nppo.epochs = 2\nppo.epochs = 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Config, OverridesReplaceFileValues) {
  const ExperimentConfig c =
      parse_config("env.id = MultiRoom-N2-S4\nintrinsic.beta = 0.1\n", {"intrinsic.beta=0.005", "run.name = x"});
  EXPECT_DOUBLE_EQ(c.intrinsic.beta, 0.005);
  EXPECT_EQ(c.run.name, "x");
  EXPECT_THROW(parse_config("env.id = MultiRoom-N2-S4\n", {"nonsense"}), ConfigError);
  EXPECT_THROW(parse_config("env.id = MultiRoom-N2-S4\n", {"run.bogus=1"}), ConfigError);
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig c = parse_config(
      "env.id = KeyCorridorS4R3\nintrinsic.method = embedding_novelty\nintrinsic.beta = 0.0005\n"
      "intrinsic.episodic = false\nintrinsic.view = partial\nintrinsic.endpoint = http://h:1\n"
      "ppo.entropy_coef = 0.001\nrun.seeds = 7,8,9\nrun.output_dir = /tmp/x\nrun.optimal_return = 0.77\n");
  const std::string text = config_to_text(c);
  const ExperimentConfig d = parse_config(text);
  EXPECT_EQ(config_to_text(d), text);
  EXPECT_EQ(d.env.family, Family::KeyCorridor);
  EXPECT_EQ(d.env.room_size, 4);
  EXPECT_EQ(d.intrinsic.episodic_enabled, false);
  EXPECT_EQ(d.intrinsic.endpoint, "http://h:1");
  EXPECT_DOUBLE_EQ(d.intrinsic.beta, 0.0005);
  EXPECT_EQ(d.run.seeds, c.run.seeds);
}

// ---------------------------------------------------------------- metrics

MetricsRow row(long step, double ret) {
  MetricsRow r;
  r.global_step = step;
  r.mean_return = ret;
  return r;
}

TEST(StepsToConvergence, Examples) {
  std::vector<MetricsRow> rows;
  for (long s = 100000; s <= 1000000; s += 100000) rows.push_back(row(s, s >= 500000 ? 0.9 : 0.1));
  EXPECT_EQ(steps_to_convergence(rows, 0.9, 0.95), 500000);
  EXPECT_FALSE(steps_to_convergence(rows, 1.0, 0.95).has_value());

  // Crosses, dips, then crosses again for good.
  std::vector<MetricsRow> dip;
  const double ret[] = {0.1, 0.9, 0.9, 0.2, 0.9, 0.9};
  for (int k = 0; k < 6; ++k) dip.push_back(row((k + 1) * 1000, ret[k]));
  EXPECT_EQ(steps_to_convergence(dip, 0.9, 0.95), 5000);
  EXPECT_FALSE(steps_to_convergence(std::vector<MetricsRow>{}, 0.9, 0.95).has_value());
}

TEST(StepsToConvergence, TrailingWindowAveragesRows) {
  std::vector<MetricsRow> rows{row(1, 0.0), row(2, 1.0), row(3, 1.0), row(4, 1.0)};
  EXPECT_EQ(steps_to_convergence(rows, 1.0, 0.95, 1), 2);
  EXPECT_EQ(steps_to_convergence(rows, 1.0, 0.95, 2), 3);
}

TEST(StepsToConvergence, MonotoneInThreshold) {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<MetricsRow> rows;
    double level = 0;
    for (int k = 0; k < 40; ++k) {
      level = std::clamp(level + uniform_real(rng, -0.1, 0.15), 0.0, 1.0);
      rows.push_back(row((k + 1) * 2048, level));
    }
    for (double th = 0.05; th <= 1.0; th += 0.05) {
      const auto s = steps_to_convergence(rows, 1.0, th, 3);
      const auto p = steps_to_convergence(rows, 1.0, th - 0.05, 3);
      if (s) {
        ASSERT_TRUE(p.has_value());
        EXPECT_LE(*p, *s);
      }
    }
  }
}

TEST(Metrics, WriterReaderRoundTripAndOrdering) {
  TempDir dir("metrics");
  const std::string path = dir.file("m.csv");
  {
    MetricsWriter w(path);
    MetricsRow r = row(2048, 0.25);
    r.entropy = 1.9;
    r.wall_clock_seconds = 1.5;
    w.append(r);
    w.append(row(4096, 0.5));
    EXPECT_THROW(w.append(row(4096, 0.6)), UsageError);
  }
  const auto rows = read_metrics(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].global_step, 2048);
  EXPECT_DOUBLE_EQ(rows[0].mean_return, 0.25);
  EXPECT_DOUBLE_EQ(rows[0].entropy, 1.9);
  EXPECT_EQ(slurp(path).substr(0, std::string(kMetricsHeader).size()), kMetricsHeader);
  EXPECT_EQ(steps_to_convergence(path, 0.5, 0.95), 4096);
}

TEST(Metrics, MalformedFilesReportTheLine) {
  TempDir dir("bad_metrics");
  const std::string path = dir.file("m.csv");
  std::ofstream(path) << kMetricsHeader << "\n" << format_row(row(1, 0)) << "\n1,2,three\n";
  try {
    read_metrics(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  std::ofstream(path) << "wrong,header\n";
  EXPECT_THROW(read_metrics(path), ParseError);
  EXPECT_THROW(read_metrics(dir.file("missing.csv")), std::exception);
}

// ---------------------------------------------------------------- grid search

TEST(MedianSteps, NoneOrdersLast) {
  EXPECT_EQ(median_steps({5, 1, 3}), 3);
  EXPECT_EQ(median_steps({5, std::nullopt, 3}), 5);
  EXPECT_FALSE(median_steps({5, std::nullopt, std::nullopt}).has_value());
  EXPECT_EQ(median_steps({7}), 7);
}

ExperimentConfig tiny_config(const std::string& out_dir) {
  return parse_config(
      "env.id = MultiRoom-N2-S4\n"
      "ppo.n_envs = 2\nppo.rollout_len = 16\nppo.minibatch_count = 2\n"
      "run.total_steps = 64\nrun.metrics_every = 32\nrun.seeds = 0\nrun.optimal_return = 0.85\n"
      "run.output_dir = " + out_dir + "\n");
}

TEST(BetaGridSearch, OneRowPerGridValueEvenWhenRunsFail) {
  TempDir dir("grid");
  ExperimentConfig c = tiny_config(dir.str());
  c.intrinsic.method = IntrinsicMethod::EmbeddingNovelty;
  c.intrinsic.input_format = InputFormat::Rgb;
  c.intrinsic.provider = ProviderKind::RemoteService;
  c.intrinsic.endpoint = testing::dead_endpoint();
  const std::vector<double> grid{0.1, 0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001};
  const GridSearchResult r = beta_grid_search(c, grid);
  ASSERT_EQ(r.rows.size(), 7u);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(r.rows[k].beta, grid[k]);
    ASSERT_EQ(r.rows[k].per_seed.size(), 1u);
    EXPECT_FALSE(r.rows[k].median.has_value());
  }
  EXPECT_FALSE(r.best.has_value());
  const std::string table = format_grid_table(r);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 8);
}

TEST(BetaGridSearch, SingleValueGrid) {
  TempDir dir("grid1");
  const ExperimentConfig c = tiny_config(dir.str());
  const GridSearchResult r = beta_grid_search(c, {0.01});
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.best.has_value(), r.rows[0].median.has_value());
  EXPECT_TRUE(fs::exists(dir.str() + "/run_beta0.01/seed_0/metrics.csv"));
  EXPECT_THROW(beta_grid_search(c, {}), UsageError);
}

// ---------------------------------------------------------------- runs

TEST(RunExperiment, DefaultBatchGivesTwoUpdatesFor4096Steps) {
  TempDir dir("run2");
  ExperimentConfig c = parse_config("env.id = MultiRoom-N2-S4\nrun.total_steps = 4096\nrun.optimal_return = 0.85\n"
                                    "run.output_dir = " + dir.str() + "\n");
  const RunResult r = run_experiment(c, 0);
  EXPECT_EQ(r.updates, 2);
  EXPECT_EQ(r.steps, 4096);
  const auto rows = read_metrics(r.metrics_path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows.back().global_step, 4096);
  EXPECT_TRUE(fs::exists(r.checkpoint_path));
  EXPECT_EQ(parse_config(slurp(r.directory + "/config.txt")).run.total_steps, 4096);
}

std::string strip_wall_clock(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << "\n";
  return out.str();
}

TEST(RunExperiment, SameSeedSameMetricsWithFrozenEmbeddings) {
  TempDir dir("det");
  ExperimentConfig c = tiny_config(dir.str());
  c.intrinsic.method = IntrinsicMethod::EmbeddingNovelty;
  c.intrinsic.input_format = InputFormat::Rgb;
  c.intrinsic.embedding_dim = 32;
  c.run.name = "a";
  const RunResult a = run_experiment(c, 3);
  c.run.name = "b";
  const RunResult b = run_experiment(c, 3);
  c.run.name = "c";
  const RunResult other = run_experiment(c, 4);
  EXPECT_EQ(strip_wall_clock(slurp(a.metrics_path)), strip_wall_clock(slurp(b.metrics_path)));
  EXPECT_NE(strip_wall_clock(slurp(a.metrics_path)), strip_wall_clock(slurp(other.metrics_path)));
}

// ---------------------------------------------------------------- plot

std::string write_curve(const TempDir& dir, const std::string& name, double scale) {
  const std::string path = dir.file(name);
  MetricsWriter w(path);
  for (int k = 1; k <= 10; ++k) w.append(row(k * 2048, scale * k / 10.0));
  return path;
}

int count_class(const boost::property_tree::ptree& node, const std::string& tag, const std::string& cls) {
  int n = 0;
  for (const auto& [name, child] : node) {
    if (name == tag && child.get<std::string>("<xmlattr>.class", "") == cls) ++n;
    n += count_class(child, tag, cls);
  }
  return n;
}

TEST(EmitPlot, BandsOnlyForSharedLabels) {
  TempDir dir("plot");
  const std::vector<std::string> files{write_curve(dir, "s0.csv", 0.8), write_curve(dir, "s1.csv", 0.9),
                                       write_curve(dir, "s2.csv", 1.0), write_curve(dir, "p.csv", 0.5)};
  const std::string out = dir.file("fig.svg");
  emit_plot(files, {"ride full", "ride full", "ride full", "ride partial <obs>"}, 0.85, out);

  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(out, tree);
  const auto& svg = tree.get_child("svg");
  EXPECT_EQ(count_class(svg, "polyline", "series"), 2);
  EXPECT_EQ(count_class(svg, "polygon", "band"), 1);
  bool found_optimal = false;
  std::function<void(const boost::property_tree::ptree&)> walk = [&](const auto& node) {
    for (const auto& [name, child] : node) {
      if (name == "line" && child.template get<std::string>("<xmlattr>.id", "") == "optimal") {
        found_optimal = true;
        EXPECT_FALSE(child.template get<std::string>("<xmlattr>.stroke-dasharray", "").empty());
      }
      walk(child);
    }
  };
  walk(svg);
  EXPECT_TRUE(found_optimal);

  emit_plot({files[0]}, {"one"}, 0.85, out);
  boost::property_tree::ptree single;
  boost::property_tree::read_xml(out, single);
  EXPECT_EQ(count_class(single.get_child("svg"), "polygon", "band"), 0);
  EXPECT_EQ(count_class(single.get_child("svg"), "polyline", "series"), 1);

  EXPECT_THROW(emit_plot({}, {}, 0.85, out), UsageError);
  EXPECT_THROW(emit_plot({files[0]}, {"a", "b"}, 0.85, out), UsageError);
}

}  // namespace
}  // namespace gridcurio
