// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "gammashape/cli/config.hpp"

#ifndef GAMMASHAPE_PRESET_DIR
#define GAMMASHAPE_PRESET_DIR "presets"
#endif

namespace testsupport {

inline gammashape::cli::RunConfig load_preset(const std::string& name) {
  gammashape::cli::ConfigValues v;
  v.load_file(std::string(GAMMASHAPE_PRESET_DIR) + "/" + name + ".cfg");
  return gammashape::cli::resolve(v);
}

inline gammashape::ScenarioParams preset_scenario(const std::string& name) { return load_preset(name).scenario; }

}  // namespace testsupport
