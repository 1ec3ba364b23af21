// Umbrella header.
#pragma once

#include "fmc/errors.hpp"
#include "fmc/grid_curves.hpp"
#include "fmc/kernels.hpp"
#include "fmc/pseudo_density.hpp"
#include "fmc/flow.hpp"
#include "fmc/significance.hpp"
#include "fmc/reconstruction.hpp"
#include "fmc/simgen.hpp"
#include "fmc/io.hpp"
#include "fmc/rng.hpp"
