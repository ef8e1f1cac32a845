#pragma once

#include "sscca/errors.hpp"
#include "sscca/rng.hpp"
#include "sscca/cov_models.hpp"
#include "sscca/sampling.hpp"
#include "sscca/cov_blocks.hpp"
#include "sscca/sign_estimator.hpp"
#include "sscca/baseline_estimators.hpp"
#include "sscca/estimators.hpp"
#include "sscca/scca_solver.hpp"
#include "sscca/metrics.hpp"
