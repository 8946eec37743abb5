#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridcurio/gridworld/types.hpp"
#include "gridcurio/nn/layers.hpp"

namespace gridcurio::nn {

/// Batch of encoded tensors as a 3 x (H * W * N) matrix, each channel
/// divided by its largest id so inputs lie in [0, 1].
template <typename Scalar>
Matrix<Scalar> encoded_batch(const std::vector<const EncodedTensor*>& batch) {
  if (batch.empty()) throw UsageError("encoded_batch: empty batch");
  const int w = batch.front()->width;
  const int h = batch.front()->height;
  const Eigen::Index pixels = static_cast<Eigen::Index>(w) * h;
  Matrix<Scalar> x(3, pixels * static_cast<Eigen::Index>(batch.size()));
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const EncodedTensor& t = *batch[n];
    if (t.width != w || t.height != h) throw UsageError("encoded_batch: tensors differ in shape");
    for (Eigen::Index p = 0; p < pixels; ++p) {
      for (int c = 0; c < 3; ++c) {
        x(c, static_cast<Eigen::Index>(n) * pixels + p) =
            static_cast<Scalar>(t.data[static_cast<std::size_t>(p) * 3 + c]) / static_cast<Scalar>(kChannelMax[c]);
      }
    }
  }
  return x;
}

template <typename Scalar>
Matrix<Scalar> encoded_batch(const std::vector<EncodedTensor>& batch) {
  std::vector<const EncodedTensor*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& t : batch) ptrs.push_back(&t);
  return encoded_batch<Scalar>(ptrs);
}

/// Three stride-2 convolutions with 32 filters each, ELU after every layer,
/// flattened to (32 * pixels) x N.
template <typename Scalar>
class ConvTrunk {
 public:
  static constexpr int kFilters = 32;

  ConvTrunk() = default;
  ConvTrunk(const std::string& prefix, int in_height, int in_width, Rng& rng) : in_h_(in_height), in_w_(in_width) {
    int h = in_height, w = in_width, c = 3;
    for (std::size_t k = 0; k < convs_.size(); ++k) {
      convs_[k] = Conv2d<Scalar>(prefix + ".conv" + std::to_string(k + 1), c, kFilters, h, w, rng);
      h = convs_[k].out_height();
      w = convs_[k].out_width();
      c = kFilters;
    }
    out_pixels_ = static_cast<Eigen::Index>(h) * w;
  }

  int in_height() const { return in_h_; }
  int in_width() const { return in_w_; }
  int out_features() const { return static_cast<int>(kFilters * out_pixels_); }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) {
    Matrix<Scalar> a = x;
    for (std::size_t k = 0; k < convs_.size(); ++k) a = elus_[k].forward(convs_[k].forward(a));
    return flatten_pixels(a, out_pixels_);
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& grad) {
    Matrix<Scalar> g = unflatten_pixels(grad, kFilters, out_pixels_);
    for (int k = static_cast<int>(convs_.size()) - 1; k >= 0; --k) g = convs_[k].backward(elus_[k].backward(g));
    return g;
  }

  void collect(ParameterList<Scalar>& out) {
    for (auto& c : convs_) c.collect(out);
  }

 private:
  int in_h_ = 0, in_w_ = 0;
  Eigen::Index out_pixels_ = 0;
  std::array<Conv2d<Scalar>, 3> convs_;
  std::array<Elu<Scalar>, 3> elus_;
};

}  // namespace gridcurio::nn
