#pragma once

// Everything in one include.

#include "perturba/analytic.hpp"
#include "perturba/constructions.hpp"
#include "perturba/contraction.hpp"
#include "perturba/hochschild.hpp"
#include "perturba/lie.hpp"
#include "perturba/metric.hpp"
#include "perturba/perturbation.hpp"
#include "perturba/random.hpp"
#include "perturba/trivialize.hpp"
