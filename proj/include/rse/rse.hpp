//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "rse/cayley.hpp"
#include "rse/core.hpp"
#include "rse/global_search.hpp"
#include "rse/inertial_geometry.hpp"
#include "rse/io.hpp"
#include "rse/metric_gram.hpp"
#include "rse/newton_solvers.hpp"
#include "rse/problem_gen.hpp"
#include "rse/quadrature.hpp"
#include "rse/spectral_bounds.hpp"
#include "rse/strain_core.hpp"
