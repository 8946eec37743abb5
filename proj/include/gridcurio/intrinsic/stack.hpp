#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "gridcurio/gridworld/types.hpp"
#include "gridcurio/intrinsic/providers.hpp"
#include "gridcurio/intrinsic/reward.hpp"
#include "gridcurio/intrinsic/ride_nets.hpp"
#include "gridcurio/nn/adam.hpp"
#include "gridcurio/rng.hpp"

namespace gridcurio {

enum class IntrinsicMethod { None, Ride, EmbeddingNovelty };
enum class InputView { Partial, Full };
enum class InputFormat { Encoded, Rgb };

struct IntrinsicConfig {
  IntrinsicMethod method = IntrinsicMethod::None;
  double beta = 0.005;
  bool episodic_enabled = true;
  InputView input_view = InputView::Partial;
  InputFormat input_format = InputFormat::Encoded;
  /// embedding_novelty only: frozen_random or remote_service.
  ProviderKind provider = ProviderKind::FrozenRandom;
  int embedding_dim = 128;
  std::string endpoint;
};

/// Throws ConfigError on an invalid or mismatched combination
/// (ride needs encoded input, embedding_novelty needs rgb).
void validate(const IntrinsicConfig& config);

/// The view/format of `s` the configured embedding consumes.
EncodedTensor intrinsic_view(const GridState& s, InputView view);

struct RideTrainingOptions {
  double learning_rate = 1e-4;
  double max_grad_norm = 0.5;
  int minibatch_count = 8;
};

/// Everything on the intrinsic side of a run: one episodic counter per
/// environment, the embedding source, and the RIDE optimizer.
class IntrinsicStack {
 public:
  IntrinsicStack(const IntrinsicConfig& config, const EnvConfig& env, std::uint64_t seed, int n_envs,
                 RideTrainingOptions ride = {});

  bool active() const { return config_.method != IntrinsicMethod::None; }
  const IntrinsicConfig& config() const { return config_; }

  /// Embeddings of the configured view/format, one per state.
  std::vector<Eigen::VectorXd> embed(const std::vector<const GridState*>& states);

  /// Updates env's counter with the successor's encoded partial observation
  /// and returns the intrinsic reward for the transition.
  double reward(int env, const Eigen::VectorXd& e_t, const Eigen::VectorXd& e_next, const EncodedTensor& obs_next,
                bool done);

  /// One pass of RIDE updates over the transitions, split into minibatches.
  /// Returns mean losses; zeros for methods without learned embeddings.
  RideLosses update(const std::vector<EncodedTensor>& inputs_t, const std::vector<int>& actions,
                    const std::vector<EncodedTensor>& inputs_next, Rng& rng);

  EpisodicCounter& counter(int env) { return counters_[static_cast<std::size_t>(env)]; }
  RideNets<float>* ride_nets() { return ride_.get(); }
  nn::Adam<float>* ride_optimizer() { return ride_opt_.get(); }

 private:
  IntrinsicConfig config_;
  int tile_size_;
  RideTrainingOptions ride_options_;
  std::vector<EpisodicCounter> counters_;
  std::unique_ptr<RideNets<float>> ride_;
  std::unique_ptr<nn::Adam<float>> ride_opt_;
  std::unique_ptr<ImageEmbedder> embedder_;
};

}  // namespace gridcurio
