#pragma once
// Umbrella header for the mechanical-resonator quantum computing simulator.

#include "mrqc/analysis.hpp"
#include "mrqc/benchmarking.hpp"
#include "mrqc/calibration.hpp"
#include "mrqc/compiler.hpp"
#include "mrqc/device.hpp"
#include "mrqc/dynamics.hpp"
#include "mrqc/errors.hpp"
#include "mrqc/execution.hpp"
#include "mrqc/experiments.hpp"
#include "mrqc/gates.hpp"
#include "mrqc/qstate.hpp"
#include "mrqc/simulator.hpp"
#include "mrqc/tomography.hpp"
