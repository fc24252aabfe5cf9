// SPDX-License-Identifier: Apache-2.0
//
// Integrals over the whole frequency axis of integrands built from narrow
// Lorentzian-like features. The axis is mapped onto (-pi/2, pi/2) by
// w = origin + scale * tan(phi); integrands decaying at least as 1/w^2 become
// bounded, so no cut-off or tail estimate is needed.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gammashape/quadrature.hpp"

namespace gammashape {

/// A spectral feature: centre and characteristic half-width (rad/ns).
struct LineFeature {
  double center;
  double width;
};

/// integral over the real line of f(w) dw.
template <class F>
auto integrate_real_line(F f, double origin, double scale, const std::vector<LineFeature>& features,
                         const quad::Options& opt) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  auto mapped = [&](double phi) {
    const double c = std::cos(phi);
    const double w = origin + scale * std::tan(phi);
    return f(w) * (scale / (c * c));
  };
  std::vector<double> cuts;
  static constexpr double offsets[] = {0.0, 1.0, 3.0, 10.0, 30.0, 100.0};
  for (const auto& ft : features)
    for (double k : offsets) {
      cuts.push_back(std::atan((ft.center + k * ft.width - origin) / scale));
      if (k > 0.0) cuts.push_back(std::atan((ft.center - k * ft.width - origin) / scale));
    }
  return quad::integrate(mapped, -half_pi, half_pi, opt, std::move(cuts));
}

}  // namespace gammashape
