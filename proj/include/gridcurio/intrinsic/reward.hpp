#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>

#include "gridcurio/gridworld/types.hpp"

namespace gridcurio {

/// FNV-1a over the tensor's width, height and bytes.
std::uint64_t tensor_hash(const EncodedTensor& t);

/// Per-episode visitation counts keyed by tensor_hash.
class EpisodicCounter {
 public:
  /// Increments and returns the count for `obs`; clears the map afterwards
  /// when `done` is set.
  int observe_and_count(const EncodedTensor& obs, bool done);

  int episode_id() const { return episode_id_; }
  std::size_t distinct() const { return counts_.size(); }

 private:
  std::unordered_map<std::uint64_t, int> counts_;
  int episode_id_ = 0;
};

/// sqrt(count) when enabled, otherwise exactly 1. Throws UsageError for count < 1.
double episodic_divisor(int count, bool enabled);

/// ||emb_next - emb_t||_2 / divisor. Throws UsageError on a dimension
/// mismatch or a divisor below 1.
double ride_reward(const Eigen::VectorXd& emb_t, const Eigen::VectorXd& emb_next, double divisor);
double embedding_novelty_reward(const Eigen::VectorXd& e_t, const Eigen::VectorXd& e_next, double divisor);

inline double combine_reward(double r_e, double r_i, double beta) { return r_e + beta * r_i; }

}  // namespace gridcurio
