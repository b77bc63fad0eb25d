#pragma once

#include "commands.hpp"
#include "config.hpp"
#include "cost.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "exit_game.hpp"
#include "layer0.hpp"
#include "layer1.hpp"
#include "montecarlo.hpp"
#include "operator_algebra.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "stochastic_kernel.hpp"
#include "summary.hpp"
