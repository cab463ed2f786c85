#pragma once

#include "blindcd/covariance.hpp"
#include "blindcd/errors.hpp"
#include "blindcd/evaluation.hpp"
#include "blindcd/filter.hpp"
#include "blindcd/graph_model.hpp"
#include "blindcd/io.hpp"
#include "blindcd/linalg.hpp"
#include "blindcd/rng.hpp"
#include "blindcd/rollcall.hpp"
#include "blindcd/signal_sim.hpp"
#include "blindcd/spectral.hpp"
