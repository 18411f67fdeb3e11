#pragma once

/// Umbrella header for the quartic gKdV laboratory.

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/soliton.hpp"
#include "gkdv/linearized.hpp"
#include "gkdv/virial.hpp"
#include "gkdv/etdrk4.hpp"
#include "gkdv/flows.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/norms.hpp"
#include "gkdv/scattering.hpp"
#include "gkdv/random.hpp"
#include "gkdv/io.hpp"
#include "gkdv/config.hpp"
#include "gkdv/lab.hpp"
