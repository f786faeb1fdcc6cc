#pragma once

// Umbrella header: the whole engine.

#include "familia/alias.hpp"
#include "familia/continuous.hpp"
#include "familia/corpus.hpp"
#include "familia/distributions.hpp"
#include "familia/errors.hpp"
#include "familia/gibbs.hpp"
#include "familia/inference.hpp"
#include "familia/likelihood.hpp"
#include "familia/metropolis.hpp"
#include "familia/model.hpp"
#include "familia/model_io.hpp"
#include "familia/rng.hpp"
#include "familia/schedule.hpp"
#include "familia/semantics.hpp"
#include "familia/trainer.hpp"
