#pragma once

#include <cmath>
#include <vector>

#include "gridcurio/nn/layers.hpp"

namespace gridcurio::nn {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over one parameter group.
template <typename Scalar>
class Adam {
 public:
  Adam() = default;
  Adam(ParameterList<Scalar> params, AdamOptions options) : params_(std::move(params)), options_(options) {
    for (const auto* p : params_) {
      m_.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(options_.beta1, t_);
    const double c2 = 1.0 - std::pow(options_.beta2, t_);
    const auto b1 = static_cast<Scalar>(options_.beta1);
    const auto b2 = static_cast<Scalar>(options_.beta2);
    const auto step_size = static_cast<Scalar>(options_.learning_rate / c1);
    const auto root_c2 = static_cast<Scalar>(std::sqrt(c2));
    const auto eps = static_cast<Scalar>(options_.epsilon);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& g = params_[k]->grad;
      m_[k] = b1 * m_[k] + (Scalar(1) - b1) * g;
      v_[k] = b2 * v_[k] + (Scalar(1) - b2) * g.cwiseAbs2();
      params_[k]->value.array() -= step_size * m_[k].array() / (v_[k].array().sqrt() / root_c2 + eps);
    }
  }

  void zero_grad() { nn::zero_grad(params_); }
  const ParameterList<Scalar>& parameters() const { return params_; }
  long steps() const { return t_; }

 private:
  ParameterList<Scalar> params_;
  AdamOptions options_;
  std::vector<Matrix<Scalar>> m_;
  std::vector<Matrix<Scalar>> v_;
  long t_ = 0;
};

}  // namespace gridcurio::nn
