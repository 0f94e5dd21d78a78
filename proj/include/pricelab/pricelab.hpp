#pragma once

#include "pricelab/analysis.hpp"
#include "pricelab/distribution.hpp"
#include "pricelab/distribution_json.hpp"
#include "pricelab/errors.hpp"
#include "pricelab/hard_instances.hpp"
#include "pricelab/learners.hpp"
#include "pricelab/market.hpp"
#include "pricelab/rng.hpp"
#include "pricelab/segment_forms.hpp"
#include "pricelab/validation.hpp"
