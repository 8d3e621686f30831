#pragma once

// Everything except the CLI harness (fraclab/harness/*), which pulls in JSON I/O.

#include "fraclab/core/errors.hpp"
#include "fraclab/core/field.hpp"
#include "fraclab/core/problem.hpp"
#include "fraclab/core/quadrature.hpp"
#include "fraclab/extension/diagnostics.hpp"
#include "fraclab/extension/frequency.hpp"
#include "fraclab/extension/half_space.hpp"
#include "fraclab/extension/height.hpp"
#include "fraclab/extension/poisson.hpp"
#include "fraclab/extension/symbol.hpp"
#include "fraclab/linear/solver.hpp"
#include "fraclab/obstacle/operator.hpp"
#include "fraclab/obstacle/penalization.hpp"
#include "fraclab/obstacle/solve.hpp"
#include "fraclab/op/kernel.hpp"
#include "fraclab/op/normalization.hpp"
#include "fraclab/op/spectral.hpp"
#include "fraclab/stochastic/monte_carlo.hpp"
#include "fraclab/stochastic/sampler.hpp"
