#pragma once

// Umbrella header.

#include "aucm/ablation.hpp"
#include "aucm/batching.hpp"
#include "aucm/config.hpp"
#include "aucm/dataset.hpp"
#include "aucm/error.hpp"
#include "aucm/gradcheck.hpp"
#include "aucm/losses.hpp"
#include "aucm/matrix.hpp"
#include "aucm/metrics.hpp"
#include "aucm/report.hpp"
#include "aucm/rng.hpp"
#include "aucm/scorer.hpp"
#include "aucm/training.hpp"
#include "aucm/trust.hpp"
