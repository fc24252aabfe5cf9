// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "gammashape/pulse_metrics.hpp"

using namespace gammashape;

namespace {

// Gaussian pulses of the given FWHM every `period` ns, optionally decaying.
Waveform train(double period, double fwhm, double decay_rate, double t_end = 800.0, std::size_t n = 1601) {
  const TimeGrid grid(0.0, t_end, n);
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  Waveform w{grid, std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid[i];
    double acc = 0.0;
    for (double c = 0.5 * period; c < t_end + 5.0 * sigma; c += period)
      acc += std::exp(-0.5 * std::pow((t - c) / sigma, 2));
    w.values[i] = 2.0 * acc * std::exp(-decay_rate * t);
  }
  return w;
}

}  // namespace

TEST(PulseMetrics, RegularTrain) {
  const auto w = train(98.0, 12.0, 0.0);
  const auto m = pulse_metrics(w);
  ASSERT_EQ(m.pulses.size(), 8u);
  EXPECT_NEAR(m.median_peak_spacing, 98.0, 0.5);
  EXPECT_NEAR(m.repetition_period, 98.0, 0.3);
  for (const auto& p : m.pulses) EXPECT_NEAR(p.fwhm, 12.0, 0.1);
  EXPECT_NEAR(m.peak_to_incident, 2.0, 1e-3);
}

TEST(PulseMetrics, DecayingTrainWithKnownEnvelope) {
  const double rate = 1.0 / 141.0;
  const auto w = train(98.0, 15.0, rate);
  PulseMetricOptions opt;
  opt.envelope_rate = rate;
  const auto m = pulse_metrics(w, opt);
  EXPECT_NEAR(m.repetition_period, 98.0, 0.5);
  ASSERT_NE(m.strongest(), nullptr);
  EXPECT_NEAR(m.strongest()->time, 49.0, 0.6);
}

TEST(PulseMetrics, ThresholdDropsSmallBumps) {
  auto w = train(200.0, 10.0, 0.0);
  // 1% bump between the first two pulses.
  for (std::size_t i = 0; i < w.values.size(); ++i)
    w.values[i] += 0.02 * std::exp(-0.5 * std::pow((w.grid[i] - 200.0) / 3.0, 2));
  const auto m = pulse_metrics(w);
  EXPECT_EQ(m.pulses.size(), 4u);
}

TEST(PulseMetrics, MinimumSeparation) {
  const TimeGrid grid(0.0, 10.0, 11);
  Waveform w{grid, {0, 1, 3, 2, 3.5, 1, 0, 0, 0, 0, 0}};
  const auto m = pulse_metrics(w);
  ASSERT_EQ(m.pulses.size(), 1u);
  EXPECT_EQ(m.pulses[0].time, 4.0);
}

TEST(PulseMetrics, WidthUndefinedWhenHalfLevelNotReached) {
  const TimeGrid grid(0.0, 100.0, 101);
  Waveform w{grid, std::vector<double>(101)};
  for (std::size_t i = 0; i < 101; ++i) w.values[i] = 1.0 + 0.1 * std::sin(0.2 * static_cast<double>(i));
  const auto m = pulse_metrics(w);
  ASSERT_FALSE(m.pulses.empty());
  EXPECT_TRUE(std::isnan(m.pulses[0].fwhm));
}

TEST(PulseMetrics, EmptyAndFlat) {
  const TimeGrid grid(0.0, 1.0, 5);
  EXPECT_TRUE(pulse_metrics(Waveform{grid, {0, 0, 0, 0, 0}}).pulses.empty());
  const auto m = pulse_metrics(Waveform{grid, {1, 1, 1, 1, 1}});
  EXPECT_TRUE(m.pulses.empty());
  EXPECT_TRUE(std::isnan(m.repetition_period));
  EXPECT_TRUE(std::isnan(m.median_peak_spacing));
}
