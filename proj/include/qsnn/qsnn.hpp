#pragma once

// Umbrella header: a continuous-time quantum-walk sentence classifier with
// staged open-system dynamics, gradient-descent training, a classical softmax
// baseline, and batch experiment runners.

#include "qsnn/errors.hpp"
#include "qsnn/linalg.hpp"
#include "qsnn/lindblad.hpp"
#include "qsnn/ode_oracle.hpp"
#include "qsnn/topology.hpp"
#include "qsnn/network.hpp"
#include "qsnn/rng.hpp"
#include "qsnn/classical.hpp"
#include "qsnn/training.hpp"
#include "qsnn/dataset.hpp"
#include "qsnn/summary.hpp"
#include "qsnn/experiments.hpp"
