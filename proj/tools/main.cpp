// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "gammashape/cli/commands.hpp"

#ifndef GAMMASHAPE_PRESET_DIR
#define GAMMASHAPE_PRESET_DIR "presets"
#endif

namespace {

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("GAMMASHAPE_PRESET_DIR")) return env;
  return GAMMASHAPE_PRESET_DIR;
}

struct Options {
  std::string config;
  std::string preset;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 1;
  bool assert_fit = false;
  bool plot_script = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "configuration file (key = value)");
  sub->add_option("--preset", o.preset, "preset name, loaded before --config");
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")->capture_default_str();
  sub->add_option("--set", o.overrides, "override a config value, key=value (repeatable)");
  sub->add_flag("--plot-script", o.plot_script, "also write a gnuplot script");
}

}  // namespace

int main(int argc, char** argv) {
  namespace gc = gammashape::cli;
  CLI::App app{"Single-photon waveform shaping by a vibrating resonant absorber"};
  app.set_version_flag("--version", std::string(GAMMASHAPE_VERSION));
  app.require_subcommand(1);
  Options o;
  for (const char* name : {"spectrum", "waveform", "average", "mc", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub, o);
    if (std::string(name) == "mc") {
      sub->add_option("--seed", o.seed, "random seed (overrides mc.seed)")->each([&](const std::string&) {
        o.seed_given = true;
      });
      sub->add_flag("--assert-fit", o.assert_fit, "exit with 3 when the fit p-value is below mc.p_value_floor");
    }
  }
  app.get_subcommand("spectrum")->description("comb spectrum and sideband table");
  app.get_subcommand("waveform")->description("transmitted waveform, gate average and pulse metrics");
  app.get_subcommand("average")->description("full-flow (ungated) intensity over one period");
  app.get_subcommand("mc")->description("Monte Carlo coincidence experiment and goodness of fit");
  app.get_subcommand("sweep")->description("pulse metrics over sweep.<key> axes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gc::exit_ok : gc::exit_config;
  }

  try {
    gc::Context ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    if (!o.preset.empty()) {
      const auto path = preset_dir() / (o.preset + ".cfg");
      if (!std::filesystem::exists(path)) throw gammashape::ConfigError("unknown preset '" + o.preset + "'");
      ctx.values.load_file(path.string());
    }
    if (!o.config.empty()) ctx.values.load_file(o.config);
    for (const auto& kv : o.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw gammashape::ConfigError("--set expects key=value, got '" + kv + "'");
      ctx.values.set(gc::trim(std::string_view(kv).substr(0, eq)), gc::trim(std::string_view(kv).substr(eq + 1)));
    }
    if (ctx.command != "sweep" && !ctx.values.sweep_text().empty())
      throw gammashape::ConfigError("sweep.* keys are only valid for the sweep command");
    if (ctx.command == "mc" && o.seed_given) ctx.values.set("mc.seed", std::to_string(o.seed));
    ctx.config = gc::resolve(ctx.values);
    for (const auto& w : ctx.config.warnings) std::cerr << "warning: " << w << '\n';
    ctx.out_dir = o.out;
    std::filesystem::create_directories(ctx.out_dir);
    ctx.threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;
    ctx.assert_fit = o.assert_fit;
    ctx.plot_script = o.plot_script;

    if (ctx.command == "spectrum") return gc::cmd_spectrum(ctx);
    if (ctx.command == "waveform") return gc::cmd_waveform(ctx);
    if (ctx.command == "average") return gc::cmd_average(ctx);
    if (ctx.command == "mc") return gc::cmd_mc(ctx, ctx.config.experiment.seed);
    return gc::cmd_sweep(ctx);
  } catch (const gammashape::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gc::exit_config;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gc::exit_config;
  } catch (const gammashape::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return gc::exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gc::exit_numerical;
  }
}
