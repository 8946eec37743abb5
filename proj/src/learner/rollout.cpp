#include "gridcurio/learner/rollout.hpp"

#include "gridcurio/gridworld/env.hpp"
#include "gridcurio/gridworld/observation.hpp"
#include "gridcurio/nn/trunk.hpp"

namespace gridcurio {

VecEnv::VecEnv(const EnvConfig& config, int n_envs, Rng& rng) : config_(config) {
  validate(config_);
  if (n_envs < 1) throw ConfigError("ppo.n_envs: must be >= 1");
  for (int e = 0; e < n_envs; ++e) states_.push_back(reset(config_, rng()));
  returns_.assign(static_cast<std::size_t>(n_envs), 0.0);
}

void VecEnv::reset_env(int env, Rng& rng) {
  states_[static_cast<std::size_t>(env)] = reset(config_, rng());
  returns_[static_cast<std::size_t>(env)] = 0.0;
}

RolloutStats collect_rollout(VecEnv& envs, ActorCriticNet<float>& net, IntrinsicStack& intrinsic,
                             RolloutBuffer& buffer, Rng& rng) {
  const int n = envs.size();
  if (buffer.n_envs != n) throw UsageError("collect_rollout: buffer and env counts differ");
  buffer.clear();
  RolloutStats stats;
  const bool learn_embeddings = intrinsic.ride_nets() != nullptr;
  const double beta = intrinsic.active() ? intrinsic.config().beta : 0.0;

  std::vector<const GridState*> current(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) current[static_cast<std::size_t>(e)] = &envs.state(e);
  std::vector<Eigen::VectorXd> emb = intrinsic.embed(current);

  double intrinsic_sum = 0.0;
  std::vector<GridState> next(static_cast<std::size_t>(n));
  std::vector<const GridState*> next_ptrs(static_cast<std::size_t>(n));
  std::vector<bool> done(static_cast<std::size_t>(n));
  std::vector<double> r_e(static_cast<std::size_t>(n));

  for (int t = 0; t < buffer.rollout_len; ++t) {
    for (int e = 0; e < n; ++e) buffer.obs[buffer.index(t, e)] = encode_partial(envs.state(e));
    std::vector<const EncodedTensor*> obs_ptrs;
    for (int e = 0; e < n; ++e) obs_ptrs.push_back(&buffer.obs[buffer.index(t, e)]);
    const PolicyOutput<float> out = net.forward(nn::encoded_batch<float>(obs_ptrs));

    for (int e = 0; e < n; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      const std::size_t i = buffer.index(t, e);
      const SampledAction a = sample_action(out.logits.col(e).cast<double>(), rng);
      buffer.actions[i] = a.action;
      buffer.log_probs[i] = a.log_prob;
      buffer.values[i] = static_cast<double>(out.values(e));
      if (learn_embeddings) stats.intrinsic_inputs_t.push_back(intrinsic_view(envs.state(e), intrinsic.config().input_view));
      next[ue] = envs.state(e);
      const auto [reward, finished] = step_inplace(next[ue], a.action);
      r_e[ue] = reward;
      done[ue] = finished;
      next_ptrs[ue] = &next[ue];
    }

    const std::vector<Eigen::VectorXd> emb_next = intrinsic.embed(next_ptrs);
    std::vector<int> finished_envs;
    for (int e = 0; e < n; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      const std::size_t i = buffer.index(t, e);
      double r_i = 0.0;
      if (intrinsic.active()) {
        r_i = intrinsic.reward(e, emb[ue], emb_next[ue], encode_partial(next[ue]), done[ue]);
        intrinsic_sum += r_i;
      }
      if (learn_embeddings) stats.intrinsic_inputs_next.push_back(intrinsic_view(next[ue], intrinsic.config().input_view));
      buffer.extrinsic_rewards[i] = r_e[ue];
      buffer.intrinsic_rewards[i] = r_i;
      buffer.combined_rewards[i] = combine_reward(r_e[ue], r_i, beta);
      buffer.dones[i] = done[ue] ? 1 : 0;

      envs.episode_return(e) += r_e[ue];
      if (done[ue]) {
        stats.episode_returns.push_back(envs.episode_return(e));
        stats.episode_lengths.push_back(next[ue].step_count);
        envs.reset_env(e, rng);
        finished_envs.push_back(e);
      } else {
        envs.state(e) = std::move(next[ue]);
        emb[ue] = emb_next[ue];
      }
    }
    if (!finished_envs.empty() && intrinsic.active()) {
      std::vector<const GridState*> fresh;
      for (int e : finished_envs) fresh.push_back(&envs.state(e));
      const auto fresh_emb = intrinsic.embed(fresh);
      for (std::size_t k = 0; k < finished_envs.size(); ++k) emb[static_cast<std::size_t>(finished_envs[k])] = fresh_emb[k];
    }
    buffer.steps = t + 1;
  }

  std::vector<const EncodedTensor*> last_ptrs;
  std::vector<EncodedTensor> last;
  last.reserve(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) last.push_back(encode_partial(envs.state(e)));
  for (const auto& o : last) last_ptrs.push_back(&o);
  const PolicyOutput<float> boot = net.forward(nn::encoded_batch<float>(last_ptrs));
  buffer.bootstrap_values.resize(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) buffer.bootstrap_values[static_cast<std::size_t>(e)] = static_cast<double>(boot.values(e));

  stats.mean_intrinsic_reward = intrinsic_sum / static_cast<double>(buffer.capacity());
  return stats;
}

}  // namespace gridcurio
