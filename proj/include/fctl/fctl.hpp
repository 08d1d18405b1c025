#pragma once

// Umbrella header for the feedback-control toolkit.

#include "fctl/adjoint.hpp"
#include "fctl/ansatz.hpp"
#include "fctl/common.hpp"
#include "fctl/config.hpp"
#include "fctl/fem.hpp"
#include "fctl/field.hpp"
#include "fctl/forward.hpp"
#include "fctl/io.hpp"
#include "fctl/optimize.hpp"
#include "fctl/problem.hpp"
#include "fctl/registry.hpp"
#include "fctl/riccati.hpp"
#include "fctl/riccati_gains.hpp"
#include "fctl/rng.hpp"
#include "fctl/spectral.hpp"
#include "fctl/tridiag.hpp"
#include "fctl/trajectory.hpp"
