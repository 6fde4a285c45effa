#pragma once

#include "fxfolio/error.hpp"
#include "fxfolio/grid.hpp"
#include "fxfolio/market_model.hpp"
#include "fxfolio/portfolio_algebra.hpp"
#include "fxfolio/cost_model.hpp"
#include "fxfolio/update_rules.hpp"
#include "fxfolio/cross_rate_predictor.hpp"
#include "fxfolio/backtest_engine.hpp"
#include "fxfolio/synthetic.hpp"
#include "fxfolio/data_io.hpp"
#include "fxfolio/verification.hpp"
