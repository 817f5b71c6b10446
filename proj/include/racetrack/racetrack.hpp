#pragma once

// Umbrella header for the racetrack library: a one-dimensional periodic
// economy with an iceberg transport kernel, explicit market-equilibrium
// maps, linear-stability analysis of four model variants, and explicit time
// integrators for the population density.

#include "dynamics.hpp"
#include "equilibrium.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "params.hpp"
#include "postproc.hpp"
#include "rng.hpp"
#include "spectral.hpp"
