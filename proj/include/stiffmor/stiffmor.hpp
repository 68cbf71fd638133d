// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STIFFMOR_STIFFMOR_HPP
#define STIFFMOR_STIFFMOR_HPP

#include "stiffmor/common.hpp"
#include "stiffmor/dae/linearize.hpp"
#include "stiffmor/dae/newton.hpp"
#include "stiffmor/dae/system.hpp"
#include "stiffmor/modal/balanced.hpp"
#include "stiffmor/modal/eigen.hpp"
#include "stiffmor/modal/jordan.hpp"
#include "stiffmor/modal/lyapunov.hpp"
#include "stiffmor/modal/participation.hpp"
#include "stiffmor/mor/reduced.hpp"
#include "stiffmor/mor/split.hpp"
#include "stiffmor/powersys/config.hpp"
#include "stiffmor/powersys/devices.hpp"
#include "stiffmor/powersys/network.hpp"
#include "stiffmor/powersys/scenario.hpp"
#include "stiffmor/sim/integrate.hpp"
#include "stiffmor/sim/reference.hpp"
#include "stiffmor/sim/trajectory.hpp"

#endif
