#include "gridcurio/intrinsic/reward.hpp"

#include <cmath>

#include "gridcurio/errors.hpp"
#include "gridcurio/hash.hpp"

namespace gridcurio {

namespace {

double embedding_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double divisor) {
  if (a.size() != b.size()) throw UsageError("intrinsic reward: embedding dimensions differ");
  if (!(divisor >= 1.0)) throw UsageError("intrinsic reward: divisor must be >= 1");
  return (b - a).norm() / divisor;
}

}  // namespace

std::uint64_t tensor_hash(const EncodedTensor& t) {
  std::uint64_t h = fnv1a64_u32(static_cast<std::uint32_t>(t.width), kFnvOffset);
  h = fnv1a64_u32(static_cast<std::uint32_t>(t.height), h);
  return fnv1a64(t.data.data(), t.data.size(), h);
}

int EpisodicCounter::observe_and_count(const EncodedTensor& obs, bool done) {
  const int count = ++counts_[tensor_hash(obs)];
  if (done) {
    counts_.clear();
    ++episode_id_;
  }
  return count;
}

double episodic_divisor(int count, bool enabled) {
  if (count < 1) throw UsageError("episodic_divisor: count must be >= 1");
  return enabled ? std::sqrt(static_cast<double>(count)) : 1.0;
}

double ride_reward(const Eigen::VectorXd& emb_t, const Eigen::VectorXd& emb_next, double divisor) {
  return embedding_distance(emb_t, emb_next, divisor);
}

double embedding_novelty_reward(const Eigen::VectorXd& e_t, const Eigen::VectorXd& e_next, double divisor) {
  return embedding_distance(e_t, e_next, divisor);
}

}  // namespace gridcurio
