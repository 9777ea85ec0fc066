#pragma once

#include "veracity/corpus.hpp"
#include "veracity/credit.hpp"
#include "veracity/engine/adam.hpp"
#include "veracity/engine/checkpoint.hpp"
#include "veracity/engine/early_stopping.hpp"
#include "veracity/engine/gradcheck.hpp"
#include "veracity/engine/layers.hpp"
#include "veracity/engine/loss.hpp"
#include "veracity/engine/tensor.hpp"
#include "veracity/harness/compare.hpp"
#include "veracity/harness/cv.hpp"
#include "veracity/harness/metrics.hpp"
#include "veracity/harness/reports.hpp"
#include "veracity/harness/train.hpp"
#include "veracity/models/config.hpp"
#include "veracity/models/metadata.hpp"
#include "veracity/models/network.hpp"
#include "veracity/models/regression.hpp"
#include "veracity/rng.hpp"
#include "veracity/text.hpp"
#include "veracity/version.hpp"
