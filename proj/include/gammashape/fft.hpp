// SPDX-License-Identifier: Apache-2.0
//
// Thin RAII wrapper over FFTW's complex 1-D transform. Planning is not
// thread-safe in FFTW, so plan creation and destruction are serialised;
// execution on distinct arrays is safe.
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <vector>

#include "gammashape/errors.hpp"

namespace gammashape::fft {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// Forward transform X_j = sum_k x_k exp(-2 pi i j k / n), unnormalised,
/// in place on `data`.
inline void forward_in_place(std::vector<std::complex<double>>& data) {
  static_assert(sizeof(std::complex<double>) == sizeof(fftw_complex));
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw NumericalError("fftw_plan_dft_1d failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace gammashape::fft
