#include "gridcurio/intrinsic/stack.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "gridcurio/errors.hpp"
#include "gridcurio/gridworld/env.hpp"
#include "gridcurio/gridworld/observation.hpp"
#include "gridcurio/gridworld/render.hpp"

namespace gridcurio {

void validate(const IntrinsicConfig& c) {
  if (c.method == IntrinsicMethod::None) return;
  if (!(c.beta > 0.0)) throw ConfigError("intrinsic.beta: must be positive");
  if (c.method == IntrinsicMethod::Ride && c.input_format != InputFormat::Encoded) {
    throw ConfigError("intrinsic.input_format: ride requires encoded input");
  }
  if (c.method == IntrinsicMethod::EmbeddingNovelty) {
    if (c.input_format != InputFormat::Rgb) {
      throw ConfigError("intrinsic.input_format: embedding_novelty requires rgb input");
    }
    if (c.provider == ProviderKind::RideLearned) {
      throw ConfigError("intrinsic.provider: embedding_novelty needs frozen_random or remote_service");
    }
  }
  if (c.embedding_dim < 0 || (c.embedding_dim == 0 && c.provider != ProviderKind::RemoteService)) {
    throw ConfigError("intrinsic.embedding_dim: must be positive");
  }
}

EncodedTensor intrinsic_view(const GridState& s, InputView view) {
  return view == InputView::Full ? encode_full(s) : encode_partial(s);
}

IntrinsicStack::IntrinsicStack(const IntrinsicConfig& config, const EnvConfig& env, std::uint64_t seed, int n_envs,
                               RideTrainingOptions ride)
    : config_(config), tile_size_(env.tile_size), ride_options_(ride), counters_(static_cast<std::size_t>(n_envs)) {
  validate(config_);
  if (config_.method == IntrinsicMethod::Ride) {
    int w = 7, h = 7;
    if (config_.input_view == InputView::Full) std::tie(w, h) = grid_shape(env);
    ride_ = std::make_unique<RideNets<float>>(mix_seeds(seed, 0x72696465ULL), h, w, config_.embedding_dim);
    ride_opt_ = std::make_unique<nn::Adam<float>>(ride_->parameters(), nn::AdamOptions{ride.learning_rate});
  } else if (config_.method == IntrinsicMethod::EmbeddingNovelty) {
    EmbeddingProviderSpec spec;
    spec.kind = config_.provider;
    spec.dim = config_.embedding_dim;
    spec.seed = mix_seeds(seed, 0x666f6d6fULL);
    spec.endpoint = config_.endpoint;
    embedder_ = make_image_embedder(spec);
  }
}

std::vector<Eigen::VectorXd> IntrinsicStack::embed(const std::vector<const GridState*>& states) {
  std::vector<Eigen::VectorXd> out;
  if (states.empty() || !active()) {
    out.assign(states.size(), Eigen::VectorXd());
    return out;
  }
  std::vector<EncodedTensor> views;
  views.reserve(states.size());
  for (const GridState* s : states) views.push_back(intrinsic_view(*s, config_.input_view));

  if (ride_) {
    const nn::Matrix<float> phi = ride_->embed(nn::encoded_batch<float>(views));
    for (Eigen::Index k = 0; k < phi.cols(); ++k) out.push_back(phi.col(k).cast<double>());
    return out;
  }
  std::vector<RgbImage> images;
  images.reserve(views.size());
  for (const auto& v : views) images.push_back(render_rgb(v, tile_size_));
  std::vector<const RgbImage*> ptrs;
  for (const auto& im : images) ptrs.push_back(&im);
  return embedder_->embed(ptrs);
}

double IntrinsicStack::reward(int env, const Eigen::VectorXd& e_t, const Eigen::VectorXd& e_next,
                              const EncodedTensor& obs_next, bool done) {
  if (!active()) return 0.0;
  const int count = counter(env).observe_and_count(obs_next, done);
  const double divisor = episodic_divisor(count, config_.episodic_enabled);
  return config_.method == IntrinsicMethod::Ride ? ride_reward(e_t, e_next, divisor)
                                                 : embedding_novelty_reward(e_t, e_next, divisor);
}

RideLosses IntrinsicStack::update(const std::vector<EncodedTensor>& inputs_t, const std::vector<int>& actions,
                                  const std::vector<EncodedTensor>& inputs_next, Rng& rng) {
  RideLosses mean;
  if (!ride_) return mean;
  const std::size_t n = actions.size();
  if (n == 0 || inputs_t.size() != n || inputs_next.size() != n) throw UsageError("ride_update: malformed batch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(rng, order);
  const std::size_t parts = static_cast<std::size_t>(std::max(1, ride_options_.minibatch_count));
  int count = 0;
  for (std::size_t m = 0; m < parts; ++m) {
    const std::size_t lo = m * n / parts;
    const std::size_t hi = (m + 1) * n / parts;
    if (hi == lo) continue;
    std::vector<const EncodedTensor*> xt, xn;
    std::vector<int> acts;
    for (std::size_t k = lo; k < hi; ++k) {
      xt.push_back(&inputs_t[order[k]]);
      xn.push_back(&inputs_next[order[k]]);
      acts.push_back(actions[order[k]]);
    }
    const RideLosses l = ride_update(*ride_, *ride_opt_, nn::encoded_batch<float>(xt), acts,
                                     nn::encoded_batch<float>(xn), ride_options_.max_grad_norm);
    mean.forward_loss += l.forward_loss;
    mean.inverse_loss += l.inverse_loss;
    ++count;
  }
  mean.forward_loss /= count;
  mean.inverse_loss /= count;
  return mean;
}

}  // namespace gridcurio
