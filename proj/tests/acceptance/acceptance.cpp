// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gammashape/cli/commands.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace gammashape;
using gammashape::cli::observable_metrics;
using testsupport::load_preset;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

ScenarioParams with_modulation(double p, double t_m, double velocity_mm_s, double theta0, double f_mhz) {
  ScenarioParams s;
  s.vibration.omega_rad_per_ns = units::mhz_to_rad_per_ns(f_mhz);
  s.vibration.amplitude_angstrom = p * photon_wavelength(14.4) / (2.0 * std::numbers::pi);
  s.vibration.theta0_rad = theta0;
  s.absorber.thickness_value = t_m;
  s.emitter.velocity_mm_s = velocity_mm_s;
  return s;
}

Outcome tuning_velocity() {
  Outcome o;
  const double v1 = resonance_tuning_velocity(1, units::mhz_to_rad_per_ns(10.2), 14.4);
  const double v2 = resonance_tuning_velocity(1, units::mhz_to_rad_per_ns(5.16), 14.4);
  o.check(std::abs(v1 / 0.88 - 1.0) < 0.015, "V(+1, 10.2 MHz) = " + fmt(v1) + " mm/s");
  o.check(std::abs(v2 / 0.44 - 1.0) < 0.015, "V(+1, 5.16 MHz) = " + fmt(v2) + " mm/s");
  return o;
}

Outcome modulation_index_range() {
  Outcome o;
  const double lambda = photon_wavelength(14.4);
  const double p1 = gammashape::modulation_index(0.25, lambda);
  const double p2 = gammashape::modulation_index(0.27, lambda);
  o.check(p1 >= 1.78 && p1 <= 1.86, "p(0.25 A) = " + fmt(p1));
  o.check(p2 >= 1.93 && p2 <= 2.01, "p(0.27 A) = " + fmt(p2));
  return o;
}

Outcome synthesis_oracle() {
  Outcome o;
  double worst = 0.0;
  for (const char* name : {"fig3b", "fig3c"}) {
    const auto cfg = load_preset(name);
    const auto grid = cfg.time_grid();
    const double r = oracle::rms_relative(transmitted_waveform(cfg.scenario, grid).values,
                                          time_domain_oracle(cfg.scenario, grid).values);
    o.check(r < 1e-4, std::string(name) + " rms " + fmt(r, 3));
  }
  std::mt19937_64 gen(20260415);
  std::uniform_real_distribution<double> up(0.0, 7.0), ut(0.0, 6.0), uf(1.0, 12.0), uv(-1.5, 1.5),
      uth(0.0, 2.0 * std::numbers::pi);
  const TimeGrid grid(0.0, 600.0, 301);
  int failed = 0;
  for (int k = 0; k < 20; ++k) {
    const double p = up(gen), t_m = ut(gen), f = uf(gen), v = uv(gen), th = uth(gen);
    const auto s = with_modulation(p, t_m, v, th, f);
    const double r = oracle::rms_relative(transmitted_waveform(s, grid).values, time_domain_oracle(s, grid).values);
    worst = std::max(worst, r);
    if (!(r < 1e-4)) {
      ++failed;
      o.detail << "random p=" << fmt(p) << " T_M=" << fmt(t_m) << " f=" << fmt(f) << " rms " << fmt(r, 3) << "; ";
    }
  }
  o.check(failed == 0, "20 random scenarios, worst rms " + fmt(worst, 3));
  return o;
}

Outcome average_oracle() {
  Outcome o;
  double printed = 0.0;
  for (const char* name : {"fig4a", "fig4b", "fig4c", "fig4d"}) {
    const auto s = load_preset(name).scenario;
    const std::size_t n = 64;
    const auto brute = oracle::brute_force_average(s, n);
    const auto w = averaged_intensity(s, TimeGrid::with_spacing(0.0, s.period_ns() / n, n));
    const double r = oracle::rms_relative_scaled(w.values, brute);
    o.check(r < 1e-4, std::string(name) + " rms " + fmt(r, 3));
    const auto wp = averaged_intensity(s, TimeGrid::with_spacing(0.0, s.period_ns() / n, n), AverageForm::printed);
    printed = std::max(printed, oracle::rms_relative_scaled(wp.values, brute));
  }
  o.detail << "(printed exponent form, worst rms " << fmt(printed, 3) << ")";
  return o;
}

std::string describe(const PulseMetrics& m) {
  std::ostringstream s;
  s << m.pulses.size() << " peaks, period " << fmt(m.repetition_period) << " ns";
  if (const auto* p = m.strongest()) s << ", strongest " << fmt(p->height) << " at " << fmt(p->time) << " ns";
  return s.str();
}

Outcome fig3b_structure() {
  Outcome o;
  const auto cfg = load_preset("fig3b");
  const auto m = observable_metrics(cfg).metrics;
  o.detail << cfg.metrics_observable << ": " << describe(m) << "; ";
  o.check(std::abs(m.repetition_period / 98.0 - 1.0) < 0.02, "period " + fmt(m.repetition_period) + " ns");
  int above = 0;
  for (const auto& p : m.pulses) above += p.height > 1.0;
  o.check(above >= 3, std::to_string(above) + " pulses above incident");
  const auto* s = m.strongest();
  const double fwhm = s ? s->fwhm : std::nan("");
  o.check(fwhm < 20.0, "strongest FWHM " + fmt(fwhm) + " ns");
  const auto tr = cli::photon_metrics(cfg.scenario, transmitted_waveform(cfg.scenario, cfg.time_grid()));
  int tr_above = 0;
  for (const auto& p : tr.pulses) tr_above += p.height > 1.0;
  o.detail << "(fixed phase: " << describe(tr) << ", " << tr_above << " above incident, strongest FWHM "
           << fmt(tr.strongest() ? tr.strongest()->fwhm : std::nan("")) << " ns)";
  return o;
}

Outcome fig3c_structure() {
  Outcome o;
  const auto cfg = load_preset("fig3c");
  const auto m = observable_metrics(cfg).metrics;
  o.detail << cfg.metrics_observable << ": " << describe(m) << "; ";
  double top = 0.0;
  for (const auto& p : m.pulses) top = std::max(top, p.height);
  std::vector<double> dominant;
  bool others_small = true;
  double runner_up = 0.0;
  for (const auto& p : m.pulses) {
    if (p.height > 0.7 * top) dominant.push_back(p.height);
    else {
      others_small = others_small && p.height < 0.5 * top;
      runner_up = std::max(runner_up, p.height / top);
    }
  }
  o.check(dominant.size() == 2, std::to_string(dominant.size()) + " dominant peaks");
  o.check(others_small, "largest other peak " + fmt(runner_up, 3) + " of max");
  if (dominant.size() >= 2) {
    const double ratio = *std::min_element(dominant.begin(), dominant.end()) / top;
    o.check(ratio > 0.8, "dominant height ratio " + fmt(ratio, 3));
  }
  const auto tr = cli::photon_metrics(cfg.scenario, transmitted_waveform(cfg.scenario, cfg.time_grid()));
  o.detail << "(fixed phase: " << describe(tr) << ", " << cli::dominant_peaks(tr) << " dominant)";
  return o;
}

Outcome fig4_trends() {
  Outcome o;
  std::map<std::string, PulseMetrics> m;
  for (const char* name : {"fig4a", "fig4b", "fig4c", "fig4d"}) m[name] = observable_metrics(load_preset(name)).metrics;
  auto period = [&](const char* n) { return m[n].repetition_period; };
  auto fwhm = [&](const char* n) { return m[n].strongest() ? m[n].strongest()->fwhm : std::nan(""); };
  for (auto [a, b] : {std::pair{"fig4a", "fig4b"}, std::pair{"fig4c", "fig4d"}}) {
    const double rp = period(b) / period(a), rw = fwhm(b) / fwhm(a);
    o.check(std::abs(rp / 0.5 - 1.0) < 0.02, std::string(a) + "->" + b + " period ratio " + fmt(rp));
    o.check(std::abs(rw / 0.5 - 1.0) < 0.10, std::string(a) + "->" + b + " FWHM ratio " + fmt(rw));
  }
  for (auto [a, b] : {std::pair{"fig4a", "fig4c"}, std::pair{"fig4b", "fig4d"}}) {
    const double rp = period(b) / period(a);
    o.check(std::abs(rp - 1.0) < 0.02, std::string(a) + "->" + b + " period ratio " + fmt(rp));
    o.check(fwhm(b) < fwhm(a), std::string(a) + "->" + b + " FWHM " + fmt(fwhm(a)) + " -> " + fmt(fwhm(b)) + " ns");
  }
  return o;
}

Outcome conservation() {
  Outcome o;
  const TimeGrid grid(0.0, 1000.0, 2001);
  double worst = 0.0;
  for (double p : {0.0, 1.8, 6.58}) {
    const auto s = with_modulation(p, 0.0, 0.88, 0.3, 10.2);
    worst = std::max(worst, oracle::rms_relative(transmitted_waveform(s, grid).values,
                                                 incident_waveform(grid, s.emitter).values));
  }
  o.check(worst < 1e-6, "T_M = 0 identity worst rms " + fmt(worst, 3));
  int points = 0, violations = 0;
  double max_e = 0.0;
  for (double p : {0.0, 1.0, 1.8, 3.0, 6.58})
    for (double t_m : {0.5, 2.0, 5.18})
      for (double v : {-0.88, 0.0, 0.44, 0.88})
        for (double th : {0.0, 2.0}) {
          const double e = energy_throughput(with_modulation(p, t_m, v, th, 10.2));
          ++points;
          violations += !(e <= 1.0);
          max_e = std::max(max_e, e);
        }
  o.check(violations == 0, "passivity on " + std::to_string(points) + " points, max throughput " + fmt(max_e, 6));
  double worst_tail = 0.0;
  for (double p : {0.0, 1.8, 2.0, 6.58, 15.0}) {
    const int n = bessel_truncation_order(p, 1e-12);
    double sum = std::pow(std::cyl_bessel_j(0.0, p), 2);
    for (int k = 1; k <= n; ++k) sum += 2.0 * std::pow(std::cyl_bessel_j(static_cast<double>(k), p), 2);
    worst_tail = std::max(worst_tail, 1.0 - sum);
  }
  o.check(worst_tail < 1e-12, "worst truncated tail " + fmt(worst_tail, 3));
  return o;
}

Outcome monte_carlo() {
  Outcome o;
  {
    auto e = load_preset("fig4b").experiment;
    e.activity_kbq = 300.0;
    e.geometric_efficiency = 0.1;
    e.duration_s = 1e6 / (e.activity_kbq * 1e3 * e.geometric_efficiency * energy_throughput(e.scenario, e.theta0()));
    e.duration_s = std::ceil(e.duration_s * 1.02);
    const auto table = detail::phase_table(e);
    const auto h = simulate_ungated(e, table);
    const auto fit = compare_histogram(h, analytic_ungated(e));
    o.check(h.total() >= 1000000 && fit.p_value > 0.0027,
            "fig4b ungated " + std::to_string(h.total()) + " counts, chi2/dof " + fmt(fit.chi2) + "/" +
                std::to_string(fit.dof) + ", p " + fmt(fit.p_value, 3));
    auto e1 = e, e4 = e;
    e1.threads = 1;
    e4.threads = 4;
    e1.duration_s = e4.duration_s = 5.0;
    const auto a = simulate_ungated(e1, table), b = simulate_ungated(e4, table);
    o.check(a.counts == b.counts && a.total_starts == b.total_starts, "bitwise identical for 1 and 4 threads");
  }
  {
    auto cfg = load_preset("fig3c");
    auto e = cfg.experiment;
    e.mode = McMode::gated;
    e.gate_width_rad = std::numbers::pi / 8.0;
    e.activity_kbq = 300.0;
    e.geometric_efficiency = 0.1;
    e.duration_s = 650.0;
    const auto h = simulate_run(e);
    const auto fit = compare_histogram(h, analytic_gated(e));
    o.check(fit.p_value > 0.0027, "fig3c gated pi/8 " + std::to_string(h.total()) + " counts, chi2/dof " +
                                      fmt(fit.chi2) + "/" + std::to_string(fit.dof) + ", p " + fmt(fit.p_value, 3));
  }
  return o;
}

Outcome early_phase_flip() {
  Outcome o;
  const auto a = load_preset("fig3b"), b = load_preset("fig3b_inset");
  const auto ma = observable_metrics(a).metrics, mb = observable_metrics(b).metrics;
  o.detail << a.metrics_observable << "; ";
  const double rp = mb.repetition_period / ma.repetition_period;
  o.check(std::abs(rp - 1.0) < 0.01, "period " + fmt(ma.repetition_period) + " vs " + fmt(mb.repetition_period) + " ns");
  if (ma.pulses.empty() || mb.pulses.empty()) {
    o.check(false, "no peaks");
    return o;
  }
  const double period = a.scenario.period_ns();
  const double dt = mb.pulses.front().time - ma.pulses.front().time;
  const double frac = std::fmod(std::abs(dt) / period, 1.0);
  o.check(std::abs(frac - 0.5) <= 0.15, "first peak " + fmt(ma.pulses.front().time) + " vs " +
                                            fmt(mb.pulses.front().time) + " ns, shift " + fmt(frac, 3) + " P");
  const auto ta = cli::photon_metrics(a.scenario, transmitted_waveform(a.scenario, a.time_grid()));
  const auto tb = cli::photon_metrics(b.scenario, transmitted_waveform(b.scenario, b.time_grid()));
  if (!ta.pulses.empty() && !tb.pulses.empty())
    o.detail << "(fixed phase shift " << fmt(std::fmod(std::abs(tb.pulses.front().time - ta.pulses.front().time) / period, 1.0), 3)
             << " P)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"tuning velocity of sideband +1", tuning_velocity},
      {"modulation index of the quoted amplitudes", modulation_index_range},
      {"spectral synthesis vs time-domain convolution", synthesis_oracle},
      {"full-flow intensity vs brute-force phase average", average_oracle},
      {"fig3b pulse-train structure", fig3b_structure},
      {"fig3c two-peak structure", fig3c_structure},
      {"fig4 period and width trends", fig4_trends},
      {"conservation and passivity", conservation},
      {"Monte Carlo convergence and reproducibility", monte_carlo},
      {"early-phase flip of the resonant sideband", early_phase_flip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " (" << fmt(secs, 3)
              << " s): " << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed;
}
