// Copyright 2026 The bidlearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bidlearn/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bidlearn/error.h"

namespace bidlearn {

std::string_view ToString(Regime regime) {
  switch (regime) {
    case Regime::kConstrained:
      return "constrained";
    case Regime::kUnconstrained:
      return "unconstrained";
    case Regime::kUncompetitive:
      return "uncompetitive";
  }
  return "unknown";
}

EquilibriumSpec NeThreshold(const AuctionConfig& config) {
  config.Validate();
  const double q = config.capacity_per_player;
  const double c = config.marginal_cost;
  EquilibriumSpec spec;
  if (config.demand <= q) {
    spec.regime = Regime::kUnconstrained;
    spec.low_threshold = c;
    spec.high_price = c;
  } else if (config.demand >= 2.0 * q) {
    spec.regime = Regime::kUncompetitive;
    spec.low_threshold = config.price_cap;
    spec.high_price = config.price_cap;
  } else {
    spec.regime = Regime::kConstrained;
    spec.low_threshold = (config.price_cap - c) * (config.demand - q) / q + c;
    spec.high_price = config.price_cap;
  }
  return spec;
}

int LowBidder(const OfferVector& offers) {
  if (offers[0] < offers[1]) return 0;
  if (offers[1] < offers[0]) return 1;
  return -1;
}

NEClassification ClassifyFinal(const OfferVector& offers,
                               const EquilibriumSpec& spec, double tol_cap,
                               double tol_cost) {
  if (!(tol_cap >= 0.0) || !(tol_cost >= 0.0)) {
    throw ValidationError("classification tolerances must be >= 0");
  }
  NEClassification out;
  out.final_offers = offers;
  out.low_bidder_index = LowBidder(offers);
  const double lo = std::min(offers[0], offers[1]);
  const double hi = std::max(offers[0], offers[1]);
  switch (spec.regime) {
    case Regime::kConstrained:
      out.classified = true;
      out.tolerance_used = tol_cap;
      out.is_equilibrium =
          hi >= spec.high_price - tol_cap && lo <= spec.low_threshold;
      break;
    case Regime::kUnconstrained:
      out.classified = true;
      out.tolerance_used = tol_cost;
      out.is_equilibrium = std::abs(lo - spec.low_threshold) <= tol_cost &&
                           std::abs(hi - spec.low_threshold) <= tol_cost;
      break;
    case Regime::kUncompetitive:
      break;
  }
  return out;
}

BimatrixOracleResult BimatrixNashOracle(const AuctionConfig& config,
                                        double grid_step,
                                        double tie_tolerance) {
  config.Validate();
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw ValidationError("grid step must be > 0");
  }
  const double range = config.price_cap - config.price_floor;
  const double intervals = range / grid_step;
  const double rounded = std::round(intervals);
  if (rounded + 1.0 > kMaxOracleGridPoints) {
    std::ostringstream msg;
    msg << "grid step " << grid_step << " gives " << rounded + 1.0
        << " points per axis, limit is " << kMaxOracleGridPoints;
    throw ResourceError(msg.str());
  }
  if (std::abs(intervals - rounded) > 1e-9 * std::max(1.0, intervals)) {
    std::ostringstream msg;
    msg << "grid step " << grid_step << " does not divide the offer range "
        << range;
    throw ValidationError(msg.str());
  }

  const int n = static_cast<int>(rounded) + 1;
  BimatrixOracleResult result;
  result.grid.resize(n);
  for (int k = 0; k < n; ++k) {
    result.grid[k] = k + 1 == n ? config.price_cap
                                : config.price_floor + k * grid_step;
  }

  // payoff[p][i * n + j]: profit of player p when 0 offers grid[i], 1 grid[j].
  std::vector<double> payoff0(static_cast<std::size_t>(n) * n);
  std::vector<double> payoff1(payoff0.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const ClearingResult r =
          ClearAuction(config, {result.grid[i], result.grid[j]});
      payoff0[static_cast<std::size_t>(i) * n + j] = r.profits[0];
      payoff1[static_cast<std::size_t>(i) * n + j] = r.profits[1];
    }
  }

  // Best reply value of player 0 against each column, of player 1 per row.
  std::vector<double> best0(n, -HUGE_VAL);
  std::vector<double> best1(n, -HUGE_VAL);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t cell = static_cast<std::size_t>(i) * n + j;
      best0[j] = std::max(best0[j], payoff0[cell]);
      best1[i] = std::max(best1[i], payoff1[cell]);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t cell = static_cast<std::size_t>(i) * n + j;
      if (payoff0[cell] >= best0[j] - tie_tolerance &&
          payoff1[cell] >= best1[i] - tie_tolerance) {
        result.equilibria.push_back({result.grid[i], result.grid[j]});
      }
    }
  }
  return result;
}

}  // namespace bidlearn
