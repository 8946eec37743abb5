#pragma once

// Central finite differences against analytic parameter gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gridcurio/nn/layers.hpp"
#include "gridcurio/rng.hpp"

namespace gridcurio::testing {

struct GradProbe {
  std::string param;
  Eigen::Index row = 0, col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

/// `loss` evaluates the objective with the current parameter values and must
/// not touch gradients; `analytic` must fill every parameter's grad.
/// Probes `count` coordinates drawn uniformly over all parameter entries.
inline std::vector<GradProbe> probe_gradients(const nn::ParameterList<double>& params,
                                              const std::function<double()>& loss,
                                              const std::function<void()>& analytic, int count, Rng& rng,
                                              double h = 1e-6) {
  nn::zero_grad(params);
  analytic();
  Eigen::Index total = 0;
  for (const auto* p : params) total += p->value.size();

  std::vector<GradProbe> out;
  for (int k = 0; k < count; ++k) {
    Eigen::Index flat = static_cast<Eigen::Index>(uniform_int(rng, 0, static_cast<int>(total - 1)));
    nn::Parameter<double>* p = nullptr;
    for (auto* q : params) {
      if (flat < q->value.size()) {
        p = q;
        break;
      }
      flat -= q->value.size();
    }
    GradProbe g;
    g.param = p->name;
    g.row = flat % p->value.rows();
    g.col = flat / p->value.rows();
    double& w = p->value(g.row, g.col);
    const double saved = w;
    w = saved + h;
    const double up = loss();
    w = saved - h;
    const double down = loss();
    w = saved;
    g.numeric = (up - down) / (2 * h);
    g.analytic = p->grad(g.row, g.col);
    const double scale = std::max({std::abs(g.numeric), std::abs(g.analytic), 1e-7});
    g.rel_error = std::abs(g.numeric - g.analytic) / scale;
    out.push_back(g);
  }
  return out;
}

inline double max_rel_error(const std::vector<GradProbe>& probes) {
  double m = 0.0;
  for (const auto& p : probes) m = std::max(m, p.rel_error);
  return m;
}

}  // namespace gridcurio::testing
