// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gammashape/absorber.hpp"
#include "gammashape/averaging.hpp"
#include "gammashape/coincidence.hpp"
#include "gammashape/pulse_metrics.hpp"
#include "gammashape/scenario.hpp"
#include "gammashape/spectrum.hpp"
#include "gammashape/synthesis.hpp"
#include "gammashape/units.hpp"
