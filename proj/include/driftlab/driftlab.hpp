#pragma once

#include "driftlab/drift_model.hpp"
#include "driftlab/ensembles.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/estimator.hpp"
#include "driftlab/harness.hpp"
#include "driftlab/io.hpp"
#include "driftlab/kzz.hpp"
#include "driftlab/lyapunov.hpp"
#include "driftlab/parallel.hpp"
#include "driftlab/phase.hpp"
#include "driftlab/quadrature.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/serialize.hpp"
#include "driftlab/simulate.hpp"
#include "driftlab/spectral_bounds.hpp"
#include "driftlab/spring_recovery.hpp"
