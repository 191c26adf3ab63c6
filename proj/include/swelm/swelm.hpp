#pragma once

// Umbrella header: sparse-weight ELM surrogates with closed-form Sobol'
// indices, plus the benchmark models and Monte Carlo cross-checks.

#include "swelm/dataset.hpp"
#include "swelm/elm.hpp"
#include "swelm/errors.hpp"
#include "swelm/genetic_oscillator.hpp"
#include "swelm/mc_sobol.hpp"
#include "swelm/models.hpp"
#include "swelm/ridge_selection.hpp"
#include "swelm/rng.hpp"
#include "swelm/runner.hpp"
#include "swelm/serialize.hpp"
#include "swelm/sobol_analytic.hpp"
#include "swelm/stiff_ode.hpp"
#include "swelm/sweep.hpp"
#include "swelm/version.hpp"
