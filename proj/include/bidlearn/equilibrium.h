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

#ifndef BIDLEARN_EQUILIBRIUM_H_
#define BIDLEARN_EQUILIBRIUM_H_

// Analytic pure-strategy equilibria of the two-seller auction, classification
// of learned offers against them, and a brute-force bimatrix cross-check.

#include <string_view>
#include <vector>

#include "bidlearn/env.h"

namespace bidlearn {

enum class Regime {
  kConstrained,    // capacity < demand < 2 * capacity
  kUnconstrained,  // demand <= capacity
  kUncompetitive,  // demand >= 2 * capacity
};

std::string_view ToString(Regime regime);

struct EquilibriumSpec {
  // Constrained: highest admissible low offer. Unconstrained: marginal cost.
  double low_threshold = 0.0;
  // Constrained: the price cap. Unconstrained: marginal cost.
  double high_price = 0.0;
  Regime regime = Regime::kConstrained;
};

EquilibriumSpec NeThreshold(const AuctionConfig& config);

struct NEClassification {
  bool is_equilibrium = false;
  // False for the uncompetitive regime, where every run is trivially an
  // equilibrium once one offer sits at the cap.
  bool classified = false;
  int low_bidder_index = -1;  // -1 on an exact tie
  OfferVector final_offers{};
  double tolerance_used = 0.0;
};

// Strict low bidder, or -1 if the offers are equal.
int LowBidder(const OfferVector& offers);

// Constrained: max offer >= high_price - tol_cap and min offer <=
// low_threshold. Unconstrained: both offers within tol_cost of the cost.
NEClassification ClassifyFinal(const OfferVector& offers,
                               const EquilibriumSpec& spec, double tol_cap,
                               double tol_cost);

inline constexpr int kMaxOracleGridPoints = 2001;

struct BimatrixOracleResult {
  std::vector<double> grid;
  // Pure equilibria as offer pairs, row-major over (player 0, player 1).
  std::vector<OfferVector> equilibria;
};

// Fills the payoff bimatrix on an evenly spaced grid from price_floor to
// price_cap and returns every cell that is a mutual best response. Payoffs
// within `tie_tolerance` of the best count as best responses. Throws
// ValidationError if the step does not divide the range and ResourceError
// beyond kMaxOracleGridPoints points per axis.
BimatrixOracleResult BimatrixNashOracle(const AuctionConfig& config,
                                        double grid_step,
                                        double tie_tolerance = 1e-9);

}  // namespace bidlearn

#endif  // BIDLEARN_EQUILIBRIUM_H_
