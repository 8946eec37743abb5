#pragma once

#include <vector>

#include "gridcurio/gridworld/types.hpp"
#include "gridcurio/intrinsic/stack.hpp"
#include "gridcurio/learner/actor_critic.hpp"
#include "gridcurio/learner/ppo.hpp"
#include "gridcurio/rng.hpp"

namespace gridcurio {

/// Independent environment instances; finished episodes are replaced by
/// fresh ones whose seeds come from the caller's rng.
class VecEnv {
 public:
  VecEnv(const EnvConfig& config, int n_envs, Rng& rng);

  int size() const { return static_cast<int>(states_.size()); }
  const GridState& state(int env) const { return states_[static_cast<std::size_t>(env)]; }
  GridState& state(int env) { return states_[static_cast<std::size_t>(env)]; }
  void reset_env(int env, Rng& rng);
  const EnvConfig& config() const { return config_; }

  double& episode_return(int env) { return returns_[static_cast<std::size_t>(env)]; }

 private:
  EnvConfig config_;
  std::vector<GridState> states_;
  std::vector<double> returns_;
};

struct RolloutStats {
  std::vector<double> episode_returns;  // extrinsic, one per finished episode
  std::vector<int> episode_lengths;
  double mean_intrinsic_reward = 0.0;
  /// Configured intrinsic views of s_t and s_{t+1} for every transition,
  /// filled only when the stack learns embeddings.
  std::vector<EncodedTensor> intrinsic_inputs_t;
  std::vector<EncodedTensor> intrinsic_inputs_next;
};

/// Steps every environment buffer.rollout_len times. Intrinsic rewards use
/// the embedding parameters as they are on entry.
RolloutStats collect_rollout(VecEnv& envs, ActorCriticNet<float>& net, IntrinsicStack& intrinsic,
                             RolloutBuffer& buffer, Rng& rng);

}  // namespace gridcurio
