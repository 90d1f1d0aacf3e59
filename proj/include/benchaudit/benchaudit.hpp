#pragma once

// Umbrella header for the full toolkit.

#include "benchaudit/aggregate.hpp"
#include "benchaudit/core.hpp"
#include "benchaudit/efficiency.hpp"
#include "benchaudit/errors.hpp"
#include "benchaudit/manifest.hpp"
#include "benchaudit/report.hpp"
#include "benchaudit/rng.hpp"
#include "benchaudit/robustness.hpp"
#include "benchaudit/seriesfeat.hpp"
#include "benchaudit/stattests.hpp"
#include "benchaudit/version.hpp"
