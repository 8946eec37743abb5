#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "gradcheck.hpp"
#include "gridcurio/gridworld/env.hpp"
#include "gridcurio/gridworld/observation.hpp"
#include "gridcurio/learner/checkpoint.hpp"
#include "gridcurio/learner/ppo.hpp"
#include "gridcurio/learner/rollout.hpp"
#include "gridcurio/nn/trunk.hpp"

namespace gridcurio {
namespace {

EncodedTensor random_view(Rng& rng) {
  EncodedTensor t(7, 7);
  for (int j = 0; j < 7; ++j) {
    for (int i = 0; i < 7; ++i) {
      t.set(i, j, Cell{static_cast<std::uint8_t>(uniform_int(rng, 0, 10)), static_cast<std::uint8_t>(uniform_int(rng, 0, 5)),
                       static_cast<std::uint8_t>(uniform_int(rng, 0, 2))});
    }
  }
  return t;
}

// ---------------------------------------------------------------- policy net

TEST(PolicyForward, ShapesAndDeterminism) {
  Rng rng(1);
  ActorCriticNet<float> net(3);
  const EncodedTensor a = random_view(rng), b = random_view(rng);
  const auto one = net.forward(nn::encoded_batch<float>(std::vector<EncodedTensor>{a}));
  EXPECT_EQ(one.logits.rows(), 7);
  EXPECT_EQ(one.logits.cols(), 1);
  EXPECT_EQ(one.values.cols(), 1);
  const auto three = net.forward(nn::encoded_batch<float>(std::vector<EncodedTensor>{a, b, a}));
  EXPECT_EQ(three.logits.col(0), three.logits.col(2));
  EXPECT_EQ(three.values(0), three.values(2));
  EXPECT_NE(three.logits.col(0), three.logits.col(1));
  EXPECT_THROW(net.forward(nn::Matrix<float>::Zero(3, 50)), UsageError);
  EXPECT_THROW(net.forward(nn::Matrix<float>::Zero(2, 49)), UsageError);
}

TEST(PolicyForward, MeanValueGradientMatchesFiniteDifferences) {
  Rng rng(2);
  ActorCriticNet<double> net(4);
  std::vector<EncodedTensor> obs;
  for (int k = 0; k < 5; ++k) obs.push_back(random_view(rng));
  const auto x = nn::encoded_batch<double>(obs);
  auto loss = [&] { return net.forward(x).values.mean(); };
  auto analytic = [&] {
    net.forward(x);
    net.backward(nn::Matrix<double>::Zero(7, 5), nn::RowVector<double>::Constant(5, 0.2));
  };
  nn::ParameterList<double> params;
  for (auto* p : net.parameters()) {
    if (p->name.rfind("policy.actor", 0) != 0) params.push_back(p);
  }
  const auto probes = testing::probe_gradients(params, loss, analytic, 20, rng, 1e-5);
  EXPECT_LT(testing::max_rel_error(probes), 1e-3);
}

// ---------------------------------------------------------------- sampling

TEST(SampleAction, UniformLogitsHaveMaximalEntropy) {
  Rng rng(3);
  const SampledAction a = sample_action(Eigen::VectorXd::Zero(7), rng);
  EXPECT_NEAR(a.entropy, std::log(7.0), 1e-12);
  EXPECT_NEAR(a.log_prob, -std::log(7.0), 1e-12);
}

TEST(SampleAction, DominantLogitIsAlmostAlwaysChosen) {
  Rng rng(4);
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(7);
  logits(4) = 20.0;
  int hits = 0;
  for (int k = 0; k < 20000; ++k) {
    const SampledAction a = sample_action(logits, rng);
    hits += a.action == 4;
    if (a.action == 4) EXPECT_GT(std::exp(a.log_prob), 0.999);
  }
  EXPECT_GT(hits, 20000 * 0.999);
}

TEST(SampleAction, FrequenciesFollowSoftmaxAndLogProbsAreNonPositive) {
  Rng rng(5);
  Eigen::VectorXd logits(7);
  logits << 0.5, -1.0, 2.0, 0.0, 0.3, -0.2, 1.0;
  const Eigen::ArrayXd p = logits.array().exp() / logits.array().exp().sum();
  std::vector<int> counts(7, 0);
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const SampledAction a = sample_action(logits, rng);
    EXPECT_LE(a.log_prob, 0.0);
    EXPECT_NEAR(a.log_prob, std::log(p(a.action)), 1e-12);
    ++counts[static_cast<std::size_t>(a.action)];
  }
  for (int j = 0; j < 7; ++j) {
    const double sigma = std::sqrt(p(j) * (1 - p(j)) / n);
    EXPECT_NEAR(counts[static_cast<std::size_t>(j)] / double(n), p(j), 5 * sigma) << j;
  }
}

TEST(SampleAction, RejectsNonFiniteLogits) {
  Rng rng(6);
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(7);
  logits(2) = std::nan("");
  EXPECT_THROW(sample_action(logits, rng), NumericError);
  logits(2) = INFINITY;
  EXPECT_THROW(sample_action(logits, rng), NumericError);
}

// ---------------------------------------------------------------- GAE

RolloutBuffer random_buffer(int envs, int len, Rng& rng) {
  RolloutBuffer b(envs, len);
  for (std::size_t i = 0; i < b.capacity(); ++i) {
    b.values[i] = standard_normal(rng);
    b.combined_rewards[i] = uniform01(rng) < 0.1 ? uniform01(rng) : 0.0;
    b.dones[i] = uniform01(rng) < 0.05;
  }
  b.bootstrap_values.resize(static_cast<std::size_t>(envs));
  for (auto& v : b.bootstrap_values) v = standard_normal(rng);
  b.steps = len;
  return b;
}

/// A_t as the explicit sum over l of (gamma*lambda)^l * delta_{t+l}, cut at the first done.
std::vector<double> gae_oracle(const RolloutBuffer& b, double gamma, double lambda) {
  std::vector<double> adv(b.capacity(), 0.0);
  for (int e = 0; e < b.n_envs; ++e) {
    auto delta = [&](int t) {
      const std::size_t i = b.index(t, e);
      const double v_next = t + 1 < b.rollout_len ? b.values[b.index(t + 1, e)] : b.bootstrap_values[static_cast<std::size_t>(e)];
      return b.combined_rewards[i] + gamma * v_next * (b.dones[i] ? 0.0 : 1.0) - b.values[i];
    };
    for (int t = 0; t < b.rollout_len; ++t) {
      double sum = 0.0, w = 1.0;
      for (int u = t; u < b.rollout_len; ++u) {
        sum += w * delta(u);
        if (b.dones[b.index(u, e)]) break;
        w *= gamma * lambda;
      }
      adv[b.index(t, e)] = sum;
    }
  }
  return adv;
}

TEST(ComputeGae, TerminalOneStep) {
  RolloutBuffer b(1, 1);
  b.combined_rewards[0] = 1.0;
  b.dones[0] = 1;
  b.steps = 1;
  b.bootstrap_values = {5.0};
  const GaeResult g = compute_gae(b, PpoConfig{});
  EXPECT_DOUBLE_EQ(g.advantages[0], 1.0);
  EXPECT_DOUBLE_EQ(g.returns[0], 1.0);
}

TEST(ComputeGae, ZeroRewardsAndValuesGiveZeroAdvantages) {
  RolloutBuffer b(4, 16);
  b.steps = 16;
  b.bootstrap_values.assign(4, 0.0);
  const GaeResult g = compute_gae(b, PpoConfig{});
  for (double a : g.advantages) EXPECT_EQ(a, 0.0);
}

TEST(ComputeGae, IncompleteBufferIsAUsageError) {
  RolloutBuffer b(2, 4);
  b.steps = 3;
  b.bootstrap_values.assign(2, 0.0);
  EXPECT_THROW(compute_gae(b, PpoConfig{}), UsageError);
  b.steps = 4;
  b.bootstrap_values.clear();
  EXPECT_THROW(compute_gae(b, PpoConfig{}), UsageError);
}

TEST(ComputeGae, MatchesExplicitSumOracle) {
  Rng rng(7);
  const PpoConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const RolloutBuffer b = random_buffer(16, 128, rng);
    const GaeResult g = compute_gae(b, cfg);
    const auto ref = gae_oracle(b, cfg.gamma, cfg.gae_lambda);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ASSERT_NEAR(g.advantages[i], ref[i], 1e-10);
      ASSERT_NEAR(g.returns[i], ref[i] + b.values[i], 1e-10);
    }
  }
}

// ---------------------------------------------------------------- PPO loss

TEST(NormalizeAdvantages, MeanZeroUnitStd) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(uniform_int(rng, 2, 512)));
    const double scale = std::exp(uniform_real(rng, -5, 5));
    for (auto& x : a) x = scale * standard_normal(rng) + uniform_real(rng, -3, 3);
    normalize_advantages(a);
    const double mu = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    double var = 0;
    for (double x : a) var += (x - mu) * (x - mu);
    var /= static_cast<double>(a.size());
    EXPECT_LT(std::abs(mu), 1e-6);
    EXPECT_NEAR(std::sqrt(var), 1.0, 1e-6);
  }
  std::vector<double> zeros(10, 0.0);
  normalize_advantages(zeros);
  for (double x : zeros) EXPECT_EQ(x, 0.0);
}

template <typename Scalar>
PpoMinibatch<Scalar> on_policy_minibatch(ActorCriticNet<Scalar>& net, int m, Rng& rng) {
  PpoMinibatch<Scalar> mb;
  std::vector<EncodedTensor> obs;
  for (int k = 0; k < m; ++k) obs.push_back(random_view(rng));
  mb.obs = nn::encoded_batch<Scalar>(obs);
  const auto out = net.forward(mb.obs);
  for (int k = 0; k < m; ++k) {
    const SampledAction a = sample_action(out.logits.col(k).template cast<double>(), rng);
    mb.actions.push_back(a.action);
    mb.old_log_probs.push_back(a.log_prob);
    mb.advantages.push_back(standard_normal(rng));
    mb.returns.push_back(standard_normal(rng));
  }
  return mb;
}

TEST(PpoLoss, FreshPolicyHasNoClipping) {
  Rng rng(9);
  ActorCriticNet<float> net(10);
  const auto mb = on_policy_minibatch(net, 64, rng);
  const PpoStats s = ppo_loss(net, mb, PpoConfig{}, false);
  EXPECT_EQ(s.clip_fraction, 0.0);
  EXPECT_NEAR(s.approx_kl, 0.0, 1e-6);
}

TEST(PpoLoss, ZeroAdvantagesLeaveOnlyValueAndEntropyTerms) {
  Rng rng(10);
  ActorCriticNet<double> net(11);
  auto mb = on_policy_minibatch(net, 16, rng);
  std::fill(mb.advantages.begin(), mb.advantages.end(), 0.0);
  PpoConfig cfg;
  cfg.entropy_coef = 0.0;
  auto params = net.parameters();
  nn::zero_grad(params);
  const PpoStats s = ppo_loss(net, mb, cfg, true);
  EXPECT_EQ(s.policy_loss, 0.0);
  EXPECT_DOUBLE_EQ(s.total_loss, cfg.value_coef * s.value_loss);
  for (auto* p : params) {
    if (p->name.rfind("policy.actor", 0) == 0) EXPECT_EQ(p->grad.norm(), 0.0) << p->name;
    if (p->name.rfind("policy.critic", 0) == 0) EXPECT_GT(p->grad.norm(), 0.0) << p->name;
  }
}

TEST(PpoLoss, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  ActorCriticNet<double> net(12);
  auto mb = on_policy_minibatch(net, 4, rng);
  // Shift the behaviour log-probs so that some ratios sit outside the clip range.
  const double shifts[] = {0.05, -0.4, 0.35, -0.1};
  for (int k = 0; k < 4; ++k) mb.old_log_probs[static_cast<std::size_t>(k)] += shifts[k];
  PpoConfig cfg;
  cfg.entropy_coef = 0.01;
  const PpoStats s0 = ppo_loss(net, mb, cfg, false);
  EXPECT_GT(s0.clip_fraction, 0.0);
  auto loss = [&] { return ppo_loss(net, mb, cfg, false).total_loss; };
  auto analytic = [&] { ppo_loss(net, mb, cfg, true); };
  const auto probes = testing::probe_gradients(net.parameters(), loss, analytic, 30, rng, 1e-5);
  EXPECT_LT(testing::max_rel_error(probes), 1e-3);
}

TEST(PpoLoss, NonFiniteLossIsANumericError) {
  Rng rng(12);
  ActorCriticNet<float> net(13);
  auto mb = on_policy_minibatch(net, 4, rng);
  mb.returns[1] = std::nan("");
  EXPECT_THROW(ppo_loss(net, mb, PpoConfig{}, false), NumericError);
}

// ---------------------------------------------------------------- PPO update

/// Buffer from one fixed observation, actions drawn from the current policy.
RolloutBuffer single_state_buffer(ActorCriticNet<float>& net, const EncodedTensor& obs, const PpoConfig& cfg,
                                  Rng& rng, bool random_rewards) {
  RolloutBuffer b(cfg.n_envs, cfg.rollout_len);
  const auto out = net.forward(nn::encoded_batch<float>(std::vector<EncodedTensor>{obs}));
  for (std::size_t i = 0; i < b.capacity(); ++i) {
    const SampledAction a = sample_action(out.logits.col(0).cast<double>(), rng);
    b.obs[i] = obs;
    b.actions[i] = a.action;
    b.log_probs[i] = a.log_prob;
    b.values[i] = out.values(0);
    b.combined_rewards[i] = random_rewards ? standard_normal(rng) : 0.0;
    b.dones[i] = random_rewards && uniform01(rng) < 0.1;
  }
  b.bootstrap_values.assign(static_cast<std::size_t>(cfg.n_envs), out.values(0));
  b.steps = cfg.rollout_len;
  return b;
}

PpoConfig small_ppo() {
  PpoConfig cfg;
  cfg.n_envs = 4;
  cfg.rollout_len = 32;
  cfg.minibatch_count = 4;
  return cfg;
}

TEST(PpoUpdate, SingleMinibatchSingleEpochHasNoClipping) {
  Rng rng(13);
  ActorCriticNet<float> net(14);
  nn::Adam<float> opt(net.parameters(), nn::AdamOptions{});
  PpoConfig cfg = small_ppo();
  cfg.epochs = 1;
  cfg.minibatch_count = 1;
  const RolloutBuffer b = single_state_buffer(net, random_view(rng), cfg, rng, true);
  const PpoStats s = ppo_update(net, opt, b, compute_gae(b, cfg), cfg, rng);
  EXPECT_EQ(s.clip_fraction, 0.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(PpoUpdate, LargeEntropyBonusDrivesPolicyTowardUniform) {
  Rng rng(14);
  ActorCriticNet<float> net(15);
  // Start from a skewed policy.
  for (auto* p : net.parameters()) {
    if (p->name == "policy.actor.bias") p->value(0, 0) = 1.5f;
  }
  nn::Adam<float> opt(net.parameters(), nn::AdamOptions{});
  PpoConfig cfg = small_ppo();
  cfg.entropy_coef = 0.1;
  const EncodedTensor obs = random_view(rng);
  double entropy = 0.0;
  for (int u = 0; u < 200; ++u) {
    const RolloutBuffer b = single_state_buffer(net, obs, cfg, rng, false);
    entropy = ppo_update(net, opt, b, compute_gae(b, cfg), cfg, rng).entropy;
  }
  EXPECT_GE(entropy, 0.95 * std::log(7.0));
}

TEST(PpoUpdate, StaysFiniteAndBoundedOverManyUpdates) {
  Rng rng(15);
  ActorCriticNet<float> net(16);
  nn::Adam<float> opt(net.parameters(), nn::AdamOptions{});
  const PpoConfig cfg = small_ppo();
  auto norm = [&] {
    double s = 0;
    for (auto* p : net.parameters()) s += p->value.cast<double>().squaredNorm();
    return std::sqrt(s);
  };
  const double initial = norm();
  std::vector<EncodedTensor> views;
  for (int k = 0; k < 8; ++k) views.push_back(random_view(rng));
  for (int u = 0; u < 1000; ++u) {
    const RolloutBuffer b = single_state_buffer(net, views[static_cast<std::size_t>(u % 8)], cfg, rng, true);
    const PpoStats s = ppo_update(net, opt, b, compute_gae(b, cfg), cfg, rng);
    ASSERT_TRUE(std::isfinite(s.total_loss)) << u;
    for (auto* p : net.parameters()) ASSERT_TRUE(p->grad.allFinite()) << p->name << " at " << u;
  }
  EXPECT_LT(norm(), 2.0 * initial);
}

// ---------------------------------------------------------------- rollout

TEST(CollectRollout, FillsTheWholeBuffer) {
  Rng rng(16);
  const EnvConfig env = parse_env_id("MultiRoom-N2-S4");
  const PpoConfig cfg;
  VecEnv envs(env, cfg.n_envs, rng);
  ActorCriticNet<float> net(17);
  IntrinsicStack stack(IntrinsicConfig{}, env, 1, cfg.n_envs);
  RolloutBuffer b(cfg.n_envs, cfg.rollout_len);
  collect_rollout(envs, net, stack, b, rng);
  EXPECT_EQ(b.capacity(), 2048u);
  EXPECT_TRUE(b.full());
  for (std::size_t i = 0; i < b.capacity(); ++i) {
    EXPECT_EQ(b.combined_rewards[i], b.extrinsic_rewards[i]);
    EXPECT_EQ(b.intrinsic_rewards[i], 0.0);
  }
}

TEST(CollectRollout, ResetsEpisodesAndCounters) {
  Rng rng(17);
  EnvConfig env = parse_env_id("MultiRoom-N2-S4");
  env.max_steps = 10;
  IntrinsicConfig ic;
  ic.method = IntrinsicMethod::Ride;
  ic.beta = 0.1;
  VecEnv envs(env, 2, rng);
  ActorCriticNet<float> net(18);
  IntrinsicStack stack(ic, env, 2, 2);
  RolloutBuffer b(2, 25);
  const RolloutStats s = collect_rollout(envs, net, stack, b, rng);
  EXPECT_GE(s.episode_returns.size(), 4u);
  for (int e = 0; e < 2; ++e) {
    int episodes = 0;
    for (int t = 0; t < 25; ++t) {
      const std::size_t i = b.index(t, e);
      EXPECT_NEAR(b.combined_rewards[i], b.extrinsic_rewards[i] + 0.1 * b.intrinsic_rewards[i], 1e-15);
      EXPECT_GE(b.intrinsic_rewards[i], 0.0);
      episodes += b.dones[i];
    }
    EXPECT_EQ(stack.counter(e).episode_id(), episodes);
    // Only the steps since the last reset remain in the counter.
    int tail = 0;
    for (int t = 24; t >= 0 && !b.dones[b.index(t, e)]; --t) ++tail;
    EXPECT_LE(static_cast<int>(stack.counter(e).distinct()), tail);
  }
  EXPECT_EQ(s.intrinsic_inputs_t.size(), 50u);
  EXPECT_EQ(s.intrinsic_inputs_next.size(), 50u);
}

// ---------------------------------------------------------------- checkpoint

TEST(Checkpoint, RoundTripRestoresEveryParameter) {
  const auto dir = std::filesystem::temp_directory_path() / "gridcurio_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "a.gckp").string();
  ActorCriticNet<float> a(20), b(21);
  write_checkpoint(path, snapshot(a.parameters(), "env.id = X\n"));
  const Checkpoint c = read_checkpoint(path);
  EXPECT_EQ(c.version, Checkpoint::kVersion);
  EXPECT_EQ(c.config_echo, "env.id = X\n");
  restore(c, b.parameters());
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t k = 0; k < pa.size(); ++k) EXPECT_EQ(pa[k]->value, pb[k]->value) << pa[k]->name;
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "gridcurio_ckpt_bad";
  std::filesystem::create_directories(dir);
  const std::string good = (dir / "good.gckp").string();
  ActorCriticNet<float> net(22);
  write_checkpoint(good, snapshot(net.parameters(), ""));
  std::string bytes;
  {
    std::ifstream in(good, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& name, const std::string& content) {
    const std::string p = (dir / name).string();
    std::ofstream(p, std::ios::binary) << content;
    return p;
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(read_checkpoint(write("magic.gckp", bad_magic)), ParseError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(read_checkpoint(write("version.gckp", bad_version)), ParseError);
  EXPECT_THROW(read_checkpoint(write("short.gckp", bytes.substr(0, bytes.size() / 2))), ParseError);

  Checkpoint c = snapshot(net.parameters(), "");
  c.tensors.pop_back();
  EXPECT_THROW(restore(c, net.parameters()), UsageError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace gridcurio
