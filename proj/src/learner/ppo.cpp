#include "gridcurio/learner/ppo.hpp"

#include <numeric>

#include "gridcurio/nn/trunk.hpp"

namespace gridcurio {

void validate(const PpoConfig& c) {
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("ppo.gamma: must be in (0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) throw ConfigError("ppo.gae_lambda: must be in [0, 1]");
  if (!(c.clip_epsilon > 0.0 && c.clip_epsilon < 1.0)) throw ConfigError("ppo.clip_epsilon: must be in (0, 1)");
  if (c.epochs < 1) throw ConfigError("ppo.epochs: must be >= 1");
  if (c.n_envs < 1) throw ConfigError("ppo.n_envs: must be >= 1");
  if (c.rollout_len < 1) throw ConfigError("ppo.rollout_len: must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ConfigError("ppo.learning_rate: must be positive");
  if (!(c.entropy_coef >= 0.0)) throw ConfigError("ppo.entropy_coef: must be >= 0");
  if (!(c.value_coef >= 0.0)) throw ConfigError("ppo.value_coef: must be >= 0");
  if (!(c.max_grad_norm > 0.0)) throw ConfigError("ppo.max_grad_norm: must be positive");
  if (c.minibatch_count < 1 || c.batch_size() % c.minibatch_count != 0) {
    throw ConfigError("ppo.minibatch_count: must divide n_envs * rollout_len");
  }
}

RolloutBuffer::RolloutBuffer(int envs, int len) : n_envs(envs), rollout_len(len) {
  const std::size_t n = capacity();
  obs.resize(n);
  actions.resize(n);
  log_probs.resize(n);
  values.resize(n);
  extrinsic_rewards.resize(n);
  intrinsic_rewards.resize(n);
  combined_rewards.resize(n);
  dones.resize(n);
}

void RolloutBuffer::clear() {
  steps = 0;
  bootstrap_values.clear();
}

GaeResult compute_gae(const RolloutBuffer& b, const PpoConfig& config) {
  if (!b.full()) throw UsageError("compute_gae: buffer is not full");
  GaeResult out;
  out.advantages.assign(b.capacity(), 0.0);
  out.returns.assign(b.capacity(), 0.0);
  for (int e = 0; e < b.n_envs; ++e) {
    double next_adv = 0.0;
    double next_value = b.bootstrap_values[static_cast<std::size_t>(e)];
    for (int t = b.rollout_len - 1; t >= 0; --t) {
      const std::size_t i = b.index(t, e);
      const double not_done = b.dones[i] ? 0.0 : 1.0;
      const double delta = b.combined_rewards[i] + config.gamma * next_value * not_done - b.values[i];
      next_adv = delta + config.gamma * config.gae_lambda * not_done * next_adv;
      out.advantages[i] = next_adv;
      out.returns[i] = next_adv + b.values[i];
      next_value = b.values[i];
    }
  }
  return out;
}

SampledAction sample_action(const Eigen::VectorXd& logits, Rng& rng) {
  if (logits.size() == 0 || !logits.allFinite()) throw NumericError("sample_action: non-finite logits");
  const Eigen::VectorXd logp = nn::log_softmax(logits);
  const Eigen::VectorXd p = logp.array().exp();
  SampledAction s;
  s.entropy = -(p.array() * logp.array()).sum();
  const double u = uniform01(rng);
  double acc = 0.0;
  s.action = static_cast<int>(logits.size()) - 1;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    acc += p(j);
    if (u < acc) {
      s.action = static_cast<int>(j);
      break;
    }
  }
  s.log_prob = logp(s.action);
  return s;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  for (double& a : adv) a = (a - mean) / (std + 1e-8);
}

PpoStats ppo_update(ActorCriticNet<float>& net, nn::Adam<float>& optimizer, const RolloutBuffer& buffer,
                    const GaeResult& gae, const PpoConfig& config, Rng& rng) {
  const int batch = config.batch_size();
  if (static_cast<std::size_t>(batch) != buffer.capacity()) throw UsageError("ppo_update: buffer/config size mismatch");
  const int mb_size = batch / config.minibatch_count;
  std::vector<int> order(static_cast<std::size_t>(batch));
  std::iota(order.begin(), order.end(), 0);

  PpoStats mean;
  int count = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(rng, order);
    for (int m = 0; m < config.minibatch_count; ++m) {
      PpoMinibatch<float> mb;
      std::vector<const EncodedTensor*> obs;
      for (int k = 0; k < mb_size; ++k) {
        const auto i = static_cast<std::size_t>(order[static_cast<std::size_t>(m * mb_size + k)]);
        obs.push_back(&buffer.obs[i]);
        mb.actions.push_back(buffer.actions[i]);
        mb.old_log_probs.push_back(buffer.log_probs[i]);
        mb.advantages.push_back(gae.advantages[i]);
        mb.returns.push_back(gae.returns[i]);
      }
      mb.obs = nn::encoded_batch<float>(obs);
      normalize_advantages(mb.advantages);

      optimizer.zero_grad();
      PpoStats s;
      try {
        s = ppo_loss(net, mb, config, true);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", minibatch " +
                           std::to_string(m));
      }
      nn::clip_grad_norm(optimizer.parameters(), config.max_grad_norm);
      optimizer.step();

      mean.policy_loss += s.policy_loss;
      mean.value_loss += s.value_loss;
      mean.entropy += s.entropy;
      mean.clip_fraction += s.clip_fraction;
      mean.approx_kl += s.approx_kl;
      mean.total_loss += s.total_loss;
      ++count;
    }
  }
  for (double* v : {&mean.policy_loss, &mean.value_loss, &mean.entropy, &mean.clip_fraction, &mean.approx_kl,
                    &mean.total_loss}) {
    *v /= count;
  }
  return mean;
}

}  // namespace gridcurio
