#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gridcurio/errors.hpp"
#include "gridcurio/gridworld/types.hpp"
#include "gridcurio/learner/actor_critic.hpp"
#include "gridcurio/nn/adam.hpp"
#include "gridcurio/rng.hpp"

namespace gridcurio {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  int epochs = 4;
  int n_envs = 16;
  int rollout_len = 128;
  double learning_rate = 1e-4;
  double entropy_coef = 5e-4;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int minibatch_count = 8;

  int batch_size() const { return n_envs * rollout_len; }
};

/// Throws ConfigError naming the first bad field.
void validate(const PpoConfig& config);

/// Trajectory storage, entry (t, env) at index t * n_envs + env.
struct RolloutBuffer {
  int n_envs = 0;
  int rollout_len = 0;
  int steps = 0;  // rows filled so far

  std::vector<EncodedTensor> obs;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> extrinsic_rewards;
  std::vector<double> intrinsic_rewards;
  std::vector<double> combined_rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> bootstrap_values;  // V(s) of each env's state after the last row

  RolloutBuffer() = default;
  RolloutBuffer(int envs, int len);

  std::size_t capacity() const { return static_cast<std::size_t>(n_envs) * rollout_len; }
  bool full() const { return steps == rollout_len && bootstrap_values.size() == static_cast<std::size_t>(n_envs); }
  void clear();
  std::size_t index(int t, int env) const { return static_cast<std::size_t>(t) * n_envs + env; }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Right-to-left GAE over combined rewards. Throws UsageError unless the
/// buffer is full.
GaeResult compute_gae(const RolloutBuffer& buffer, const PpoConfig& config);

struct SampledAction {
  int action = 0;
  double log_prob = 0.0;
  double entropy = 0.0;
};

/// Categorical sample from softmax(logits). Throws NumericError on
/// non-finite logits.
SampledAction sample_action(const Eigen::VectorXd& logits, Rng& rng);

/// In place: mean 0, std 1 (population std, 1e-8 guard).
void normalize_advantages(std::vector<double>& advantages);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double total_loss = 0.0;
};

/// Minibatch of the PPO objective. `advantages` are used as given.
template <typename Scalar>
struct PpoMinibatch {
  nn::Matrix<Scalar> obs;  // from nn::encoded_batch
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Mean clipped-surrogate + value + entropy loss over the minibatch; with
/// `accumulate`, adds its gradient to the network's parameter grads.
template <typename Scalar>
PpoStats ppo_loss(ActorCriticNet<Scalar>& net, const PpoMinibatch<Scalar>& mb, const PpoConfig& config,
                  bool accumulate) {
  const PolicyOutput<Scalar> out = net.forward(mb.obs);
  const Eigen::Index m = out.logits.cols();
  if (static_cast<std::size_t>(m) != mb.actions.size()) throw UsageError("ppo_loss: minibatch size mismatch");
  const nn::Matrix<Scalar> logp = nn::log_softmax(out.logits);
  const nn::Matrix<Scalar> p = logp.array().exp().matrix();

  nn::Matrix<Scalar> dlogits(out.logits.rows(), m);
  nn::RowVector<Scalar> dvalues(m);
  PpoStats s;
  const double eps = config.clip_epsilon;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const int a = mb.actions[i];
    const double lp = static_cast<double>(logp(a, k));
    const double ratio = std::exp(lp - mb.old_log_probs[i]);
    const double adv = mb.advantages[i];
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    double entropy = 0.0;
    for (Eigen::Index j = 0; j < p.rows(); ++j) entropy -= static_cast<double>(p(j, k) * logp(j, k));
    const double v = static_cast<double>(out.values(k));

    s.policy_loss -= std::min(surr1, surr2) * inv_m;
    s.value_loss += (v - mb.returns[i]) * (v - mb.returns[i]) * inv_m;
    s.entropy += entropy * inv_m;
    s.clip_fraction += (std::abs(ratio - 1.0) > eps ? 1.0 : 0.0) * inv_m;
    s.approx_kl += ((ratio - 1.0) - (lp - mb.old_log_probs[i])) * inv_m;

    // d(-min)/dlogp is -ratio * A unless the clipped branch is the active one.
    const double g_lp = surr1 <= surr2 ? -ratio * adv : 0.0;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const double pj = static_cast<double>(p(j, k));
      const double dlp = (j == a ? 1.0 : 0.0) - pj;
      const double dent = -pj * (static_cast<double>(logp(j, k)) + entropy);
      dlogits(j, k) = static_cast<Scalar>((g_lp * dlp - config.entropy_coef * dent) * inv_m);
    }
    dvalues(k) = static_cast<Scalar>(2.0 * config.value_coef * (v - mb.returns[i]) * inv_m);
  }
  s.total_loss = s.policy_loss + config.value_coef * s.value_loss - config.entropy_coef * s.entropy;
  if (!std::isfinite(s.total_loss)) {
    std::ostringstream msg;
    msg << "ppo_update: non-finite loss (policy " << s.policy_loss << ", value " << s.value_loss << ", entropy "
        << s.entropy << ")";
    throw NumericError(msg.str());
  }
  if (accumulate) net.backward(dlogits, dvalues);
  return s;
}

/// `epochs` passes over `minibatch_count` shuffled minibatches with
/// per-minibatch advantage normalization and global grad-norm clipping.
/// Returns stats averaged over all minibatches.
PpoStats ppo_update(ActorCriticNet<float>& net, nn::Adam<float>& optimizer, const RolloutBuffer& buffer,
                    const GaeResult& gae, const PpoConfig& config, Rng& rng);

}  // namespace gridcurio
