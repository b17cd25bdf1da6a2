#pragma once

#include "l1sgd/bench.hpp"
#include "l1sgd/cli.hpp"
#include "l1sgd/data.hpp"
#include "l1sgd/engine.hpp"
#include "l1sgd/model.hpp"
#include "l1sgd/model_io.hpp"
#include "l1sgd/objective.hpp"
#include "l1sgd/reference.hpp"
#include "l1sgd/report.hpp"
#include "l1sgd/rng.hpp"
#include "l1sgd/sparse.hpp"
