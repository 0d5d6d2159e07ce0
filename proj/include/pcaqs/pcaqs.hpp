#pragma once

#include "pcaqs/bench.hpp"
#include "pcaqs/config.hpp"
#include "pcaqs/csv.hpp"
#include "pcaqs/data.hpp"
#include "pcaqs/logistic.hpp"
#include "pcaqs/metrics.hpp"
#include "pcaqs/pca.hpp"
#include "pcaqs/quantile.hpp"
#include "pcaqs/rng.hpp"
#include "pcaqs/sampler.hpp"
#include "pcaqs/stats.hpp"
#include "pcaqs/synth.hpp"
