#pragma once

// Convenience umbrella: pulls in the whole steady-state toolkit.

#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "io.hpp"
#include "model.hpp"
#include "presets.hpp"
#include "roots.hpp"
#include "stability.hpp"
#include "sweep.hpp"
#include "units.hpp"
#include "version.hpp"
