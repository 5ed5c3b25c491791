#pragma once

// Arnoldi-Tikhonov regularization toolkit: umbrella header.

#include "atreg/arnoldi.hpp"
#include "atreg/diagnostics.hpp"
#include "atreg/errors.hpp"
#include "atreg/experiment.hpp"
#include "atreg/linalg.hpp"
#include "atreg/operators.hpp"
#include "atreg/pgm.hpp"
#include "atreg/problems.hpp"
#include "atreg/rng.hpp"
#include "atreg/tikhonov.hpp"
