#pragma once

#include <cstdint>

#include "gridcurio/gridworld/types.hpp"
#include "gridcurio/nn/layers.hpp"
#include "gridcurio/nn/trunk.hpp"

namespace gridcurio {

template <typename Scalar>
struct PolicyOutput {
  nn::Matrix<Scalar> logits;     // 7 x N
  nn::RowVector<Scalar> values;  // 1 x N
};

/// Shared conv trunk, a 256-unit hidden layer, and separate actor and critic
/// heads. Parameter pointers handed out by `parameters()` stay valid only
/// while the object is not moved.
template <typename Scalar>
class ActorCriticNet {
 public:
  static constexpr int kHidden = 256;

  explicit ActorCriticNet(std::uint64_t seed, int in_height = 7, int in_width = 7) {
    Rng rng(seed);
    trunk_ = nn::ConvTrunk<Scalar>("policy", in_height, in_width, rng);
    fc_ = nn::Linear<Scalar>("policy.fc", trunk_.out_features(), kHidden, rng);
    actor_ = nn::Linear<Scalar>("policy.actor", kHidden, kNumActions, rng, 0.01);
    critic_ = nn::Linear<Scalar>("policy.critic", kHidden, 1, rng);
  }

  ActorCriticNet(const ActorCriticNet&) = delete;
  ActorCriticNet& operator=(const ActorCriticNet&) = delete;

  /// `x` from nn::encoded_batch; throws UsageError on a wrong shape.
  PolicyOutput<Scalar> forward(const nn::Matrix<Scalar>& x) {
    const Eigen::Index pixels = static_cast<Eigen::Index>(trunk_.in_height()) * trunk_.in_width();
    if (x.rows() != 3 || x.cols() == 0 || x.cols() % pixels != 0) {
      throw UsageError("policy_forward: expected a 3 x (7*7*N) input");
    }
    const nn::Matrix<Scalar> h = elu_.forward(fc_.forward(trunk_.forward(x)));
    return {actor_.forward(h), critic_.forward(h)};
  }

  /// Accumulates parameter gradients for the most recent forward call.
  void backward(const nn::Matrix<Scalar>& dlogits, const nn::RowVector<Scalar>& dvalues) {
    nn::Matrix<Scalar> dh = actor_.backward(dlogits);
    dh += critic_.backward(dvalues);
    trunk_.backward(fc_.backward(elu_.backward(dh)));
  }

  nn::ParameterList<Scalar> parameters() {
    nn::ParameterList<Scalar> out;
    trunk_.collect(out);
    fc_.collect(out);
    actor_.collect(out);
    critic_.collect(out);
    return out;
  }

 private:
  nn::ConvTrunk<Scalar> trunk_;
  nn::Linear<Scalar> fc_;
  nn::Elu<Scalar> elu_;
  nn::Linear<Scalar> actor_;
  nn::Linear<Scalar> critic_;
};

}  // namespace gridcurio
