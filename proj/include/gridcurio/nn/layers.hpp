#pragma once

// Dense layers with explicit reverse-mode passes. Activations are Eigen
// matrices; the convolution stack keeps a (channels) x (pixels * batch)
// layout so consecutive layers need no reshuffling.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "gridcurio/errors.hpp"
#include "gridcurio/rng.hpp"

namespace gridcurio::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename Scalar>
using ParameterList = std::vector<Parameter<Scalar>*>;

/// Uniform(-bound, bound) fill drawn in double so float and double networks
/// built from the same seed hold the same numbers.
template <typename Scalar>
void fill_uniform(Matrix<Scalar>& m, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(uniform_real(rng, -bound, bound));
  }
}

template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  /// `gain` scales the default 1/sqrt(fan_in) init bound; small gains give
  /// near-zero output heads.
  Linear(const std::string& name, int in, int out, Rng& rng, double gain = 1.0) {
    weight_.name = name + ".weight";
    bias_.name = name + ".bias";
    weight_.value.resize(out, in);
    bias_.value.resize(out, 1);
    const double bound = gain / std::sqrt(static_cast<double>(in));
    fill_uniform(weight_.value, bound, rng);
    fill_uniform(bias_.value, bound, rng);
    weight_.zero_grad();
    bias_.zero_grad();
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) {
    if (x.rows() != weight_.value.cols()) throw UsageError("linear: input has wrong feature count");
    input_ = x;
    return (weight_.value * x).colwise() + bias_.value.col(0);
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy) {
    weight_.grad.noalias() += dy * input_.transpose();
    bias_.grad += dy.rowwise().sum();
    return weight_.value.transpose() * dy;
  }

  void collect(ParameterList<Scalar>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  int in_features() const { return static_cast<int>(weight_.value.cols()); }
  int out_features() const { return static_cast<int>(weight_.value.rows()); }

 private:
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
  Matrix<Scalar> input_;
};

/// Exponential linear unit, alpha = 1.
template <typename Scalar>
class Elu {
 public:
  Matrix<Scalar> forward(const Matrix<Scalar>& x) {
    output_ = x.unaryExpr([](Scalar v) { return v > Scalar(0) ? v : std::expm1(v); });
    return output_;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy) const {
    return dy.binaryExpr(output_, [](Scalar g, Scalar y) { return y > Scalar(0) ? g : g * (y + Scalar(1)); });
  }

 private:
  Matrix<Scalar> output_;
};

/// 3x3 convolution, stride 2, padding 1.
/// Input (in_channels) x (height * width * batch), sample-major pixels.
template <typename Scalar>
class Conv2d {
 public:
  static constexpr int kKernel = 3;
  static constexpr int kStride = 2;
  static constexpr int kPad = 1;

  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels, int in_height, int in_width, Rng& rng)
      : in_c_(in_channels), out_c_(out_channels), in_h_(in_height), in_w_(in_width) {
    out_h_ = (in_h_ + 2 * kPad - kKernel) / kStride + 1;
    out_w_ = (in_w_ + 2 * kPad - kKernel) / kStride + 1;
    weight_.name = name + ".weight";
    bias_.name = name + ".bias";
    // Column (ky * 3 + kx) * in_channels + c of the weight holds tap (c, ky, kx).
    weight_.value.resize(out_c_, in_c_ * kKernel * kKernel);
    bias_.value.resize(out_c_, 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_c_ * kKernel * kKernel));
    fill_uniform(weight_.value, bound, rng);
    fill_uniform(bias_.value, bound, rng);
    weight_.zero_grad();
    bias_.zero_grad();
  }

  int out_height() const { return out_h_; }
  int out_width() const { return out_w_; }
  int out_channels() const { return out_c_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) {
    const Eigen::Index in_hw = static_cast<Eigen::Index>(in_h_) * in_w_;
    if (x.rows() != in_c_ || x.cols() % in_hw != 0) throw UsageError("conv2d: input has wrong shape");
    batch_ = static_cast<int>(x.cols() / in_hw);
    const Eigen::Index out_hw = static_cast<Eigen::Index>(out_h_) * out_w_;
    cols_.setZero(in_c_ * kKernel * kKernel, out_hw * batch_);
    for (int n = 0; n < batch_; ++n) {
      for (int oy = 0; oy < out_h_; ++oy) {
        for (int ox = 0; ox < out_w_; ++ox) {
          const Eigen::Index col = n * out_hw + oy * out_w_ + ox;
          for (int ky = 0; ky < kKernel; ++ky) {
            const int iy = oy * kStride - kPad + ky;
            if (iy < 0 || iy >= in_h_) continue;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int ix = ox * kStride - kPad + kx;
              if (ix < 0 || ix >= in_w_) continue;
              cols_.col(col).segment((ky * kKernel + kx) * in_c_, in_c_) = x.col(n * in_hw + iy * in_w_ + ix);
            }
          }
        }
      }
    }
    return (weight_.value * cols_).colwise() + bias_.value.col(0);
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy) {
    weight_.grad.noalias() += dy * cols_.transpose();
    bias_.grad += dy.rowwise().sum();
    const Matrix<Scalar> dcols = weight_.value.transpose() * dy;
    const Eigen::Index in_hw = static_cast<Eigen::Index>(in_h_) * in_w_;
    const Eigen::Index out_hw = static_cast<Eigen::Index>(out_h_) * out_w_;
    Matrix<Scalar> dx = Matrix<Scalar>::Zero(in_c_, in_hw * batch_);
    for (int n = 0; n < batch_; ++n) {
      for (int oy = 0; oy < out_h_; ++oy) {
        for (int ox = 0; ox < out_w_; ++ox) {
          const Eigen::Index col = n * out_hw + oy * out_w_ + ox;
          for (int ky = 0; ky < kKernel; ++ky) {
            const int iy = oy * kStride - kPad + ky;
            if (iy < 0 || iy >= in_h_) continue;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int ix = ox * kStride - kPad + kx;
              if (ix < 0 || ix >= in_w_) continue;
              dx.col(n * in_hw + iy * in_w_ + ix) += dcols.col(col).segment((ky * kKernel + kx) * in_c_, in_c_);
            }
          }
        }
      }
    }
    return dx;
  }

  void collect(ParameterList<Scalar>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  int in_c_ = 0, out_c_ = 0, in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
  int batch_ = 0;
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
  Matrix<Scalar> cols_;
};

/// (C) x (P * N) -> (C * P) x N, feature index c * P + p.
template <typename Scalar>
Matrix<Scalar> flatten_pixels(const Matrix<Scalar>& x, Eigen::Index pixels) {
  const Eigen::Index channels = x.rows();
  const Eigen::Index batch = x.cols() / pixels;
  Matrix<Scalar> out(channels * pixels, batch);
  for (Eigen::Index n = 0; n < batch; ++n) {
    for (Eigen::Index p = 0; p < pixels; ++p) {
      for (Eigen::Index c = 0; c < channels; ++c) out(c * pixels + p, n) = x(c, n * pixels + p);
    }
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> unflatten_pixels(const Matrix<Scalar>& g, Eigen::Index channels, Eigen::Index pixels) {
  const Eigen::Index batch = g.cols();
  Matrix<Scalar> out(channels, pixels * batch);
  for (Eigen::Index n = 0; n < batch; ++n) {
    for (Eigen::Index p = 0; p < pixels; ++p) {
      for (Eigen::Index c = 0; c < channels; ++c) out(c, n * pixels + p) = g(c * pixels + p, n);
    }
  }
  return out;
}

/// Column-wise log-softmax.
template <typename Derived>
Matrix<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Scalar m = logits.col(j).maxCoeff();
    const Scalar lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

template <typename Scalar>
void zero_grad(const ParameterList<Scalar>& params) {
  for (auto* p : params) p->zero_grad();
}

template <typename Scalar>
double grad_norm(const ParameterList<Scalar>& params) {
  double sq = 0.0;
  for (const auto* p : params) sq += static_cast<double>(p->grad.squaredNorm());
  return std::sqrt(sq);
}

/// Rescales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename Scalar>
double clip_grad_norm(const ParameterList<Scalar>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (!std::isfinite(norm)) throw NumericError("gradient norm is not finite");
  if (norm > max_norm) {
    const auto scale = static_cast<Scalar>(max_norm / (norm + 1e-6));
    for (auto* p : params) p->grad *= scale;
  }
  return norm;
}

}  // namespace gridcurio::nn
