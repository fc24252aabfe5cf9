// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gammashape {

/// J_0(x) ... J_nmax(x) for x >= 0 by Miller's downward recurrence, normalised
/// with J_0 + 2 sum_k J_2k = 1. Absolute accuracy ~1e-15 for x <= 20.
inline std::vector<double> bessel_j_sequence(double x, int nmax) {
  if (nmax < 0) throw std::invalid_argument("bessel_j_sequence: nmax < 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("bessel_j_sequence: x must be finite and >= 0");
  std::vector<double> j(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const int top = std::max(nmax, static_cast<int>(std::ceil(x)));
  // Start index: even and comfortably above both nmax and x.
  int start = top + 20 + static_cast<int>(std::sqrt(60.0 * top));
  if (start % 2) ++start;

  constexpr double big = 1e250;
  double above = 0.0;
  double current = 1e-300;
  double norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double below = 2.0 * k / x * current - above;
    above = current;
    current = below;  // J_{k-1} (unnormalised)
    if (std::abs(current) > big) {
      current /= big;
      above /= big;
      norm /= big;
      for (auto& v : j) v /= big;
    }
    const int idx = k - 1;
    if (idx <= nmax) j[static_cast<std::size_t>(idx)] = current;
    if (idx > 0 && idx % 2 == 0) norm += 2.0 * current;
  }
  norm += current;  // J_0
  for (auto& v : j) v /= norm;
  return j;
}

/// J_n(x) for any integer n (J_{-n} = (-1)^n J_n).
inline double bessel_j(int n, double x) {
  const int an = std::abs(n);
  const double v = bessel_j_sequence(std::abs(x), an)[static_cast<std::size_t>(an)];
  double s = (n < 0 && an % 2) ? -v : v;
  if (x < 0.0 && an % 2) s = -s;
  return s;
}

}  // namespace gammashape
