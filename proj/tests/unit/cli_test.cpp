// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gammashape/cli/commands.hpp"
#include "support.hpp"

using namespace gammashape;
using namespace gammashape::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gammashape_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Context context(const std::string& command, const std::string& preset, const fs::path& out,
                const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  Context ctx;
  ctx.command = command;
  if (!preset.empty()) ctx.values.load_file(std::string(GAMMASHAPE_PRESET_DIR) + "/" + preset + ".cfg");
  for (const auto& [k, v] : overrides) ctx.values.set(k, v);
  ctx.config = resolve(ctx.values);
  ctx.out_dir = out;
  return ctx;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

}  // namespace

TEST(Numbers, PlainAndPiMultiples) {
  EXPECT_DOUBLE_EQ(parse_number("k", " 1.5 "), 1.5);
  EXPECT_DOUBLE_EQ(parse_number("k", "+2e-3"), 2e-3);
  EXPECT_DOUBLE_EQ(parse_number("k", "pi"), std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_number("k", "pi/8"), std::numbers::pi / 8);
  EXPECT_DOUBLE_EQ(parse_number("k", "2*pi"), 2 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_number("k", "3pi/4"), 0.75 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_number("k", "-pi/2"), -0.5 * std::numbers::pi);
  EXPECT_THROW(parse_number("k", "abc"), ConfigError);
  EXPECT_THROW(parse_number("k", "1.5mm"), ConfigError);
  EXPECT_THROW(parse_number("k", "pi/0"), ConfigError);
}

TEST(Numbers, Axes) {
  EXPECT_EQ(parse_axis("k", "[1, 2, 3]"), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(parse_axis("k", "0.5,pi"), (std::vector<double>{0.5, std::numbers::pi}));
  EXPECT_EQ(parse_axis("k", "linspace(0, 1, 5)"), (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
  EXPECT_THROW(parse_axis("k", "linspace(0, 1)"), ConfigError);
  EXPECT_THROW(parse_axis("k", "[1, 2"), ConfigError);
}

TEST(Config, UnknownAndDuplicateKeys) {
  ConfigValues v;
  EXPECT_THROW(v.set("vibration.frequncy_mhz", "1"), ConfigError);
  EXPECT_THROW(v.set("sweep.average.form", "1"), ConfigError);
  EXPECT_THROW(v.set("sweep.nope", "1"), ConfigError);
  const auto dir = scratch("dup");
  {
    std::ofstream f(dir / "a.cfg");
    f << "absorber.t_m = 1\nabsorber.t_m = 2\n";
  }
  EXPECT_THROW(v.load_file((dir / "a.cfg").string()), ConfigError);
  {
    std::ofstream f(dir / "b.cfg");
    f << "no equals sign\n";
  }
  EXPECT_THROW(ConfigValues().load_file((dir / "b.cfg").string()), ConfigError);
  EXPECT_THROW(ConfigValues().load_file((dir / "missing.cfg").string()), ConfigError);
}

TEST(Config, LaterSourcesOverride) {
  ConfigValues v;
  v.load_file(std::string(GAMMASHAPE_PRESET_DIR) + "/fig3b.cfg");
  EXPECT_EQ(v.get("emitter.velocity_mm_s"), "0.88");
  v.set("emitter.velocity_mm_s", "-0.88");
  EXPECT_DOUBLE_EQ(resolve(v).scenario.emitter.velocity_mm_s, -0.88);
  EXPECT_TRUE(v.is_set("emitter.velocity_mm_s"));
  EXPECT_FALSE(v.is_set("mc.seed"));
}

TEST(Config, ResolveValidatesPhysics) {
  ConfigValues v;
  v.set("absorber.t_m", "-1");
  EXPECT_THROW(resolve(v), ConfigError);
  ConfigValues w;
  w.set("mc.activity_kbq", "1000");
  EXPECT_THROW(resolve(w), ConfigError);
  ConfigValues x;
  x.set("average.form", "sideways");
  EXPECT_THROW(resolve(x), ConfigError);
  ConfigValues y;
  y.set("grid.n_samples", "1.5");
  EXPECT_THROW(resolve(y), ConfigError);
}

TEST(Config, ModulationIndexOverridesAmplitude) {
  ConfigValues v;
  v.set("vibration.modulation_index", "2");
  EXPECT_NEAR(resolve(v).scenario.modulation_index(), 2.0, 1e-12);
}

TEST(Config, ThinAbsorberWarning) {
  ConfigValues v;
  v.set("absorber.thickness_um", "500");
  const auto cfg = resolve(v);
  ASSERT_EQ(cfg.warnings.size(), 1u);
}

TEST(Csv, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(98.0), "98");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Commands, SpectrumIsDeterministicWithProvenance) {
  const auto a = scratch("spec_a"), b = scratch("spec_b");
  ASSERT_EQ(cmd_spectrum(context("spectrum", "fig3b", a)), exit_ok);
  ASSERT_EQ(cmd_spectrum(context("spectrum", "fig3b", b)), exit_ok);
  const auto text = slurp(a / "sidebands.csv");
  EXPECT_EQ(text, slurp(b / "sidebands.csv"));
  EXPECT_EQ(slurp(a / "spectrum.csv"), slurp(b / "spectrum.csv"));
  EXPECT_NE(text.find("# tool=gammashape\n"), std::string::npos);
  EXPECT_NE(text.find("# config.emitter.velocity_mm_s=0.88\n"), std::string::npos);
  EXPECT_NE(text.find("# derived.modulation_index="), std::string::npos);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Commands, WaveformOutputs) {
  const auto dir = scratch("wave");
  auto ctx = context("waveform", "fig3b", dir, {{"grid.n_samples", "401"}});
  ctx.plot_script = true;
  ASSERT_EQ(cmd_waveform(ctx), exit_ok);
  const auto rows = data_lines(slurp(dir / "waveform.csv"));
  ASSERT_EQ(rows.size(), 402u);
  EXPECT_EQ(rows[0], "tau_ns,incident_norm,transmitted_norm,gate_averaged_norm");
  EXPECT_EQ(rows[1].substr(0, 4), "0,1,");
  EXPECT_TRUE(fs::exists(dir / "waveform_metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "waveform_pulses.csv"));
  EXPECT_TRUE(fs::exists(dir / "waveform.gp"));
}

TEST(Commands, EmptySweepMatchesWaveformMetrics) {
  const auto dw = scratch("sw_wave"), ds = scratch("sw_sweep");
  const std::vector<std::pair<std::string, std::string>> o = {{"grid.n_samples", "801"},
                                                              {"metrics.observable", "transmitted"}};
  ASSERT_EQ(cmd_waveform(context("waveform", "fig3b", dw, o)), exit_ok);
  ASSERT_EQ(cmd_sweep(context("sweep", "fig3b", ds, o)), exit_ok);
  const auto m = data_lines(slurp(dw / "waveform_metrics.csv"));
  const auto s = data_lines(slurp(ds / "sweep.csv"));
  ASSERT_EQ(s.size(), 2u);
  ASSERT_GE(m.size(), 2u);
  EXPECT_EQ("transmitted," + s[1], m[1]);
}

TEST(Commands, SweepRowOrderAndTrend) {
  const auto dir = scratch("sweep");
  auto ctx = context("sweep", "fig4a", dir,
                     {{"sweep.vibration.frequency_mhz", "[5.16, 10.32]"}, {"sweep.absorber.t_m", "[5.18, 2]"}});
  ASSERT_EQ(cmd_sweep(ctx), exit_ok);
  const auto rows = data_lines(slurp(dir / "sweep.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].substr(0, 39), "absorber.t_m,vibration.frequency_mhz,n_");
  EXPECT_EQ(rows[1].substr(0, 10), "5.18,5.16,");
  EXPECT_EQ(rows[2].substr(0, 11), "5.18,10.32,");
  EXPECT_EQ(rows[3].substr(0, 7), "2,5.16,");
  EXPECT_EQ(rows[4].substr(0, 8), "2,10.32,");
  auto period = [&](const std::string& row) {
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return std::stod(cells[5]);
  };
  EXPECT_NEAR(period(rows[2]) / period(rows[1]), 0.5, 0.01);
}

TEST(Commands, SweepRefusesHugeGrids) {
  const auto dir = scratch("huge");
  auto ctx = context("sweep", "", dir,
                     {{"sweep.absorber.t_m", "linspace(0, 5, 1001)"}, {"sweep.vibration.phase_rad", "linspace(0, 1, 1001)"}});
  try {
    cmd_sweep(ctx);
    FAIL() << "expected refusal";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("1002001"), std::string::npos);
  }
}

TEST(Commands, MonteCarloFiles) {
  const auto dir = scratch("mc");
  auto ctx = context("mc", "fig4b", dir, {{"mc.duration_s", "1"}});
  ASSERT_EQ(cmd_mc(ctx, 5), exit_ok);
  for (const char* f : {"histogram.csv", "analytic.csv", "fit.csv", "residuals.csv"}) EXPECT_TRUE(fs::exists(dir / f));
  const auto first = slurp(dir / "histogram.csv");
  ASSERT_EQ(cmd_mc(ctx, 5), exit_ok);
  EXPECT_EQ(first, slurp(dir / "histogram.csv"));
}
