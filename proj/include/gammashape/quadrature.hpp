// SPDX-License-Identifier: Apache-2.0
//
// Globally adaptive 21-point Gauss-Kronrod quadrature (QUADPACK QAG style)
// for real or complex integrands.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <sstream>
#include <type_traits>
#include <vector>

#include "gammashape/errors.hpp"

namespace gammashape::quad {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
  /// Throw NumericalError when the tolerance is not met.
  bool throw_on_failure = true;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae; odd entries are the 10-point Gauss nodes.
inline constexpr std::array<double, 11> xgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> wgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600025452888, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T, class F>
Segment<T> gk21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * wgk[10];
  T gauss{};
  for (int j = 0; j < 10; ++j) {
    const double dx = h * xgk[static_cast<std::size_t>(j)];
    const T s = f(c - dx) + f(c + dx);
    kron += s * wgk[static_cast<std::size_t>(j)];
    if (j % 2 == 1) gauss += s * wg[static_cast<std::size_t>(j / 2)];
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

/// Integrate f over [a, b] with optional interior breakpoints (need not be
/// sorted; values outside (a, b) are ignored).
template <class F>
auto integrate(F f, double a, double b, const Options& opt = {}, std::vector<double> breakpoints = {})
    -> Result<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  std::vector<double> cuts{a};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double x : breakpoints)
    if (x > a && x < b && x > cuts.back()) cuts.push_back(x);
  cuts.push_back(b);

  std::priority_queue<detail::Segment<T>> heap;
  T total{};
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto s = detail::gk21<T>(f, cuts[i], cuts[i + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  int count = static_cast<int>(heap.size());
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (err > tolerance() && count < opt.max_intervals) {
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval can no longer be split
    heap.pop();
    auto left = detail::gk21<T>(f, worst.a, mid);
    auto right = detail::gk21<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed the rounding accumulated by incremental updates.
  T resum{};
  double reerr = 0.0;
  std::vector<detail::Segment<T>> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& s : segs) {
    resum += s.value;
    reerr += s.error;
  }
  Result<T> r{resum, reerr, count, reerr <= std::max(opt.abs_tol, opt.rel_tol * std::abs(resum))};
  if (!r.converged && opt.throw_on_failure) {
    std::ostringstream msg;
    msg << "adaptive quadrature did not converge on [" << a << ", " << b << "]: achieved error " << reerr
        << ", requested " << std::max(opt.abs_tol, opt.rel_tol * std::abs(resum)) << " after " << count
        << " intervals";
    throw NumericalError(msg.str());
  }
  return r;
}

}  // namespace gammashape::quad
