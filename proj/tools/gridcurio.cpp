// Command-line front end: train, gridsearch, convergence, plot, render.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gridcurio/errors.hpp"
#include "gridcurio/gridworld/env.hpp"
#include "gridcurio/gridworld/observation.hpp"
#include "gridcurio/gridworld/render.hpp"
#include "gridcurio/harness/config.hpp"
#include "gridcurio/harness/experiment.hpp"
#include "gridcurio/harness/metrics.hpp"
#include "gridcurio/harness/plot.hpp"

using namespace gridcurio;

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--grid: '" + item + "' is not a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridworld exploration experiments"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train one seed");
  std::string train_config;
  std::uint64_t train_seed = 0;
  std::vector<std::string> overrides;
  train->add_option("--config", train_config, "config file")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", train_seed, "run seed")->required();
  train->add_option("--override", overrides, "key=value, repeatable");

  auto* grid = app.add_subcommand("gridsearch", "beta grid search over run.seeds");
  std::string grid_config, grid_values;
  std::vector<std::string> grid_overrides;
  grid->add_option("--config", grid_config, "config file")->required()->check(CLI::ExistingFile);
  grid->add_option("--grid", grid_values, "comma-separated beta values")->required();
  grid->add_option("--override", grid_overrides, "key=value, repeatable");

  auto* conv = app.add_subcommand("convergence", "steps to convergence of a metrics file");
  std::string conv_metrics;
  double conv_optimal = 0.0, conv_threshold = 0.95;
  int conv_window = 1;
  conv->add_option("--metrics", conv_metrics, "metrics.csv")->required();
  conv->add_option("--optimal", conv_optimal, "optimal return")->required();
  conv->add_option("--threshold", conv_threshold, "fraction of optimal");
  conv->add_option("--window", conv_window, "trailing rows averaged");

  auto* plot = app.add_subcommand("plot", "SVG learning curves");
  std::string plot_out;
  std::vector<std::string> plot_files, plot_labels;
  double plot_optimal = 0.0;
  plot->add_option("--out", plot_out, "output .svg")->required();
  plot->add_option("metrics", plot_files, "metrics files")->required();
  plot->add_option("--labels", plot_labels, "one label per file")->required();
  plot->add_option("--optimal", plot_optimal, "optimal return")->required();

  auto* render = app.add_subcommand("render", "dump an observation");
  std::string r_env, r_view = "full", r_format = "rgb", r_out;
  std::uint64_t r_seed = 0;
  int r_tile = 8;
  render->add_option("--env", r_env, "environment id")->required();
  render->add_option("--seed", r_seed, "episode seed");
  render->add_option("--view", r_view, "full or partial")->check(CLI::IsMember({"full", "partial"}));
  render->add_option("--format", r_format, "enc or rgb")->check(CLI::IsMember({"enc", "rgb"}));
  render->add_option("--tile", r_tile, "pixels per cell");
  render->add_option("--out", r_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const ExperimentConfig config = load_config(train_config, overrides);
      const RunResult r = run_experiment(config, train_seed);
      std::cout << "metrics " << r.metrics_path << "\n"
                << "checkpoint " << r.checkpoint_path << "\n"
                << "steps " << r.steps << " updates " << r.updates << "\n"
                << "optimal_return " << r.optimal_return << "\n";
      const auto conv_step = steps_to_convergence(r.metrics_path, r.optimal_return, config.run.convergence_threshold);
      std::cout << "steps_to_convergence " << (conv_step ? std::to_string(*conv_step) : "-") << "\n";
    } else if (*grid) {
      const ExperimentConfig config = load_config(grid_config, grid_overrides);
      const GridSearchResult r = beta_grid_search(config, parse_grid(grid_values));
      std::cout << "optimal_return " << r.optimal_return << "\n" << format_grid_table(r);
    } else if (*conv) {
      const auto s = steps_to_convergence(conv_metrics, conv_optimal, conv_threshold, conv_window);
      std::cout << (s ? std::to_string(*s) : "-") << "\n";
    } else if (*plot) {
      emit_plot(plot_files, plot_labels, plot_optimal, plot_out);
      std::cout << "wrote " << plot_out << "\n";
    } else if (*render) {
      EnvConfig c = parse_env_id(r_env);
      c.tile_size = r_tile;
      const GridState s = reset(c, r_seed);
      const EncodedTensor t = r_view == "full" ? encode_full(s) : encode_partial(s);
      if (r_format == "rgb") {
        write_png(r_out, render_rgb(t, c.tile_size));
      } else {
        std::ofstream out(r_out);
        if (!out) throw UsageError("render: cannot write " + r_out);
        out << dump_text(t);
      }
      std::cout << "wrote " << r_out << "\n";
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
