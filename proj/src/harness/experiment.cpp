#include "gridcurio/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gridcurio/errors.hpp"
#include "gridcurio/gridworld/solver.hpp"
#include "gridcurio/harness/metrics.hpp"
#include "gridcurio/learner/checkpoint.hpp"
#include "gridcurio/learner/rollout.hpp"

namespace gridcurio {

namespace fs = std::filesystem;

namespace {

double mean_of(const std::deque<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::string beta_tag(double beta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return buf;
}

}  // namespace

double resolve_optimal_return(const ExperimentConfig& config) {
  if (config.run.optimal_return > 0.0) return config.run.optimal_return;
  return estimate_optimal_return(config.env, 100);
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  validate(config);
  const PpoConfig& ppo = config.ppo;
  RunResult result;
  result.optimal_return = resolve_optimal_return(config);
  result.directory = (fs::path(config.run.output_dir) / config.run.name / ("seed_" + std::to_string(seed))).string();
  fs::create_directories(result.directory);
  result.metrics_path = (fs::path(result.directory) / "metrics.csv").string();
  result.checkpoint_path = (fs::path(result.directory) / "checkpoint.gckp").string();
  const std::string echo = config_to_text(config);
  {
    std::ofstream out(fs::path(result.directory) / "config.txt");
    out << echo << "# seed = " << seed << "\n";
  }

  const auto started = std::chrono::steady_clock::now();
  Rng rng(mix_seeds(seed, 0x72756eULL));
  ActorCriticNet<float> net(mix_seeds(seed, 0x706f6cULL));
  nn::Adam<float> optimizer(net.parameters(), nn::AdamOptions{ppo.learning_rate});
  IntrinsicStack intrinsic(config.intrinsic, config.env, seed, ppo.n_envs,
                           RideTrainingOptions{ppo.learning_rate, ppo.max_grad_norm, ppo.minibatch_count});
  VecEnv envs(config.env, ppo.n_envs, rng);
  RolloutBuffer buffer(ppo.n_envs, ppo.rollout_len);
  MetricsWriter writer(result.metrics_path);

  const auto window = static_cast<std::size_t>(config.run.convergence_window);
  const double target = config.run.convergence_threshold * result.optimal_return;
  std::deque<double> returns, lengths;
  long episodes = 0;
  long next_log = config.run.metrics_every;
  long converged_since = -1;

  while (result.steps < config.run.total_steps) {
    const RolloutStats stats = collect_rollout(envs, net, intrinsic, buffer, rng);
    const RideLosses ride = intrinsic.update(stats.intrinsic_inputs_t, buffer.actions, stats.intrinsic_inputs_next, rng);
    const GaeResult gae = compute_gae(buffer, ppo);
    const PpoStats ps = ppo_update(net, optimizer, buffer, gae, ppo, rng);
    result.steps += ppo.batch_size();
    ++result.updates;

    for (std::size_t k = 0; k < stats.episode_returns.size(); ++k) {
      returns.push_back(stats.episode_returns[k]);
      lengths.push_back(static_cast<double>(stats.episode_lengths[k]));
      if (returns.size() > window) {
        returns.pop_front();
        lengths.pop_front();
      }
    }
    episodes += static_cast<long>(stats.episode_returns.size());

    const double mean_return = mean_of(returns);
    bool stop = false;
    if (config.run.early_stop_steps >= 0) {
      if (mean_return >= target) {
        if (converged_since < 0) converged_since = result.steps;
        stop = result.steps - converged_since >= config.run.early_stop_steps;
      } else {
        converged_since = -1;
      }
    }

    if (result.steps >= next_log || result.steps >= config.run.total_steps || stop) {
      MetricsRow row;
      row.global_step = result.steps;
      row.episodes_completed = episodes;
      row.mean_return = mean_return;
      row.mean_episode_length = mean_of(lengths);
      row.mean_intrinsic_reward = stats.mean_intrinsic_reward;
      row.forward_loss = ride.forward_loss;
      row.inverse_loss = ride.inverse_loss;
      row.policy_loss = ps.policy_loss;
      row.value_loss = ps.value_loss;
      row.entropy = ps.entropy;
      row.wall_clock_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      writer.append(row);
      while (next_log <= result.steps) next_log += config.run.metrics_every;
    }
    if (stop) break;
  }

  nn::ParameterList<float> params = net.parameters();
  if (RideNets<float>* ride = intrinsic.ride_nets()) {
    const auto extra = ride->parameters();
    params.insert(params.end(), extra.begin(), extra.end());
  }
  write_checkpoint(result.checkpoint_path, snapshot(params, echo));
  return result;
}

std::optional<long> median_steps(std::vector<std::optional<long>> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const auto& lo = values[n / 2 - 1];
  const auto& hi = values[n / 2];
  if (!lo || !hi) return std::nullopt;
  return (*lo + *hi) / 2;
}

GridSearchResult beta_grid_search(const ExperimentConfig& base, const std::vector<double>& grid) {
  if (grid.empty()) throw UsageError("beta_grid_search: grid is empty");
  GridSearchResult out;
  out.optimal_return = resolve_optimal_return(base);
  for (double beta : grid) {
    GridRow row;
    row.beta = beta;
    ExperimentConfig c = base;
    c.intrinsic.beta = beta;
    c.run.optimal_return = out.optimal_return;
    c.run.name = base.run.name + "_beta" + beta_tag(beta);
    for (std::uint64_t seed : base.run.seeds) {
      std::optional<long> steps;
      try {
        const RunResult r = run_experiment(c, seed);
        steps = steps_to_convergence(r.metrics_path, out.optimal_return, c.run.convergence_threshold);
      } catch (const std::exception& e) {
        std::cerr << "beta " << beta << " seed " << seed << " failed: " << e.what() << "\n";
      }
      row.per_seed.push_back(steps);
    }
    row.median = median_steps(row.per_seed);
    out.rows.push_back(row);
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (!out.rows[i].median) continue;
    if (!out.best || *out.rows[i].median < *out.rows[*out.best].median) out.best = i;
  }
  return out;
}

std::string format_grid_table(const GridSearchResult& result) {
  std::ostringstream o;
  o << "beta\tmedian_steps\tper_seed\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const GridRow& r = result.rows[i];
    o << beta_tag(r.beta) << "\t" << (r.median ? std::to_string(*r.median) : "-") << "\t";
    for (std::size_t k = 0; k < r.per_seed.size(); ++k) {
      o << (k ? "," : "") << (r.per_seed[k] ? std::to_string(*r.per_seed[k]) : "-");
    }
    if (result.best && *result.best == i) o << "\t(best)";
    o << "\n";
  }
  return o.str();
}

}  // namespace gridcurio
