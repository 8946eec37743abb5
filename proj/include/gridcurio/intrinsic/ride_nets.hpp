#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gridcurio/gridworld/types.hpp"
#include "gridcurio/nn/adam.hpp"
#include "gridcurio/nn/layers.hpp"
#include "gridcurio/nn/trunk.hpp"

namespace gridcurio {

struct RideLosses {
  double forward_loss = 0.0;
  double inverse_loss = 0.0;
};

/// Embedding network phi plus forward and inverse dynamics models.
/// phi learns only through the inverse loss; the forward model sees phi's
/// outputs as constants.
template <typename Scalar>
class RideNets {
 public:
  static constexpr int kHidden = 256;

  RideNets(std::uint64_t seed, int in_height, int in_width, int dim = 128) : dim_(dim) {
    if (dim < 1) throw ConfigError("intrinsic.embedding_dim: must be positive");
    Rng rng(seed);
    trunk_ = nn::ConvTrunk<Scalar>("ride.phi", in_height, in_width, rng);
    head_ = nn::Linear<Scalar>("ride.phi.head", trunk_.out_features(), dim, rng);
    fwd1_ = nn::Linear<Scalar>("ride.forward.fc1", dim + kNumActions, kHidden, rng);
    fwd2_ = nn::Linear<Scalar>("ride.forward.fc2", kHidden, dim, rng, 0.01);
    inv1_ = nn::Linear<Scalar>("ride.inverse.fc1", 2 * dim, kHidden, rng);
    inv2_ = nn::Linear<Scalar>("ride.inverse.fc2", kHidden, kNumActions, rng, 0.01);
  }

  RideNets(const RideNets&) = delete;
  RideNets& operator=(const RideNets&) = delete;

  int dim() const { return dim_; }
  int in_height() const { return trunk_.in_height(); }
  int in_width() const { return trunk_.in_width(); }

  /// phi(x), dim x N.
  nn::Matrix<Scalar> embed(const nn::Matrix<Scalar>& x) { return head_.forward(trunk_.forward(x)); }

  /// Batch-mean losses; when `accumulate` is set, adds d(forward + inverse)/dtheta
  /// to every parameter's grad.
  RideLosses loss(const nn::Matrix<Scalar>& x_t, const std::vector<int>& actions, const nn::Matrix<Scalar>& x_next,
                  bool accumulate) {
    const auto n = static_cast<Eigen::Index>(actions.size());
    if (n == 0) throw UsageError("ride_update: empty batch");
    if (x_t.cols() != x_next.cols()) throw UsageError("ride_update: obs_t and obs_next batch sizes differ");

    // One pass through phi for both ends of every transition.
    nn::Matrix<Scalar> both(x_t.rows(), x_t.cols() * 2);
    both << x_t, x_next;
    const nn::Matrix<Scalar> phi = embed(both);
    if (phi.cols() != 2 * n) throw UsageError("ride_update: action count does not match the batch");
    const nn::Matrix<Scalar> phi_t = phi.leftCols(n);
    const nn::Matrix<Scalar> phi_next = phi.rightCols(n);

    nn::Matrix<Scalar> fwd_in = nn::Matrix<Scalar>::Zero(dim_ + kNumActions, n);
    fwd_in.topRows(dim_) = phi_t;
    for (Eigen::Index k = 0; k < n; ++k) {
      const int a = actions[static_cast<std::size_t>(k)];
      if (a < 0 || a >= kNumActions) throw UsageError("ride_update: action out of range");
      fwd_in(dim_ + a, k) = Scalar(1);
    }
    const nn::Matrix<Scalar> pred = fwd2_.forward(fwd_elu_.forward(fwd1_.forward(fwd_in)));
    const nn::Matrix<Scalar> diff = pred - phi_next;

    nn::Matrix<Scalar> inv_in(2 * dim_, n);
    inv_in << phi_t, phi_next;
    const nn::Matrix<Scalar> logits = inv2_.forward(inv_elu_.forward(inv1_.forward(inv_in)));
    const nn::Matrix<Scalar> logp = nn::log_softmax(logits);

    RideLosses out;
    double ce = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) ce -= static_cast<double>(logp(actions[static_cast<std::size_t>(k)], k));
    out.forward_loss = static_cast<double>(diff.squaredNorm()) / static_cast<double>(n);
    out.inverse_loss = ce / static_cast<double>(n);
    if (!std::isfinite(out.forward_loss) || !std::isfinite(out.inverse_loss)) {
      throw NumericError("ride_update: loss is not finite");
    }
    if (!accumulate) return out;

    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    fwd1_.backward(fwd_elu_.backward(fwd2_.backward(Scalar(2) * inv_n * diff)));

    nn::Matrix<Scalar> dlogits = logp.array().exp().matrix();
    for (Eigen::Index k = 0; k < n; ++k) dlogits(actions[static_cast<std::size_t>(k)], k) -= Scalar(1);
    dlogits *= inv_n;
    const nn::Matrix<Scalar> dinv_in = inv1_.backward(inv_elu_.backward(inv2_.backward(dlogits)));
    nn::Matrix<Scalar> dphi(dim_, 2 * n);
    dphi << dinv_in.topRows(dim_), dinv_in.bottomRows(dim_);
    trunk_.backward(head_.backward(dphi));
    return out;
  }

  nn::ParameterList<Scalar> parameters() {
    nn::ParameterList<Scalar> out;
    trunk_.collect(out);
    head_.collect(out);
    fwd1_.collect(out);
    fwd2_.collect(out);
    inv1_.collect(out);
    inv2_.collect(out);
    return out;
  }

 private:
  int dim_;
  nn::ConvTrunk<Scalar> trunk_;
  nn::Linear<Scalar> head_;
  nn::Linear<Scalar> fwd1_, fwd2_;
  nn::Elu<Scalar> fwd_elu_;
  nn::Linear<Scalar> inv1_, inv2_;
  nn::Elu<Scalar> inv_elu_;
};

/// One optimizer step on a batch of (obs_t, action, obs_next) transitions.
/// Returns the batch-mean losses measured before the step.
template <typename Scalar>
RideLosses ride_update(RideNets<Scalar>& nets, nn::Adam<Scalar>& optimizer, const nn::Matrix<Scalar>& x_t,
                       const std::vector<int>& actions, const nn::Matrix<Scalar>& x_next, double max_grad_norm) {
  optimizer.zero_grad();
  const RideLosses losses = nets.loss(x_t, actions, x_next, true);
  nn::clip_grad_norm(optimizer.parameters(), max_grad_norm);
  optimizer.step();
  return losses;
}

}  // namespace gridcurio
