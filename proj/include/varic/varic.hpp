#pragma once

// Umbrella header for the whole library.

#include "varic/bruteforce.hpp"
#include "varic/certify.hpp"
#include "varic/common.hpp"
#include "varic/constraint.hpp"
#include "varic/dual.hpp"
#include "varic/fixtures.hpp"
#include "varic/hamiltonian.hpp"
#include "varic/lyapunov.hpp"
#include "varic/measure.hpp"
#include "varic/scenario.hpp"
#include "varic/valuefn.hpp"
