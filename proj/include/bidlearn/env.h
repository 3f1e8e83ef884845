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

#ifndef BIDLEARN_ENV_H_
#define BIDLEARN_ENV_H_

// Uniform-price auction for two symmetric sellers with fixed capacity and
// inelastic demand.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace bidlearn {

inline constexpr int kNumPlayers = 2;

using OfferVector = std::array<double, kNumPlayers>;

struct AuctionConfig {
  double capacity_per_player = 50.0;
  double marginal_cost = 20.0;
  double price_cap = 100.0;
  double price_floor = -100.0;
  double demand = 70.0;
  int num_players = kNumPlayers;

  // Throws ConfigError naming the offending field.
  void Validate() const;

  bool operator==(const AuctionConfig&) const = default;
};

struct ClearingResult {
  double clearing_price = 0.0;
  std::array<double, kNumPlayers> quantities{};
  std::array<double, kNumPlayers> profits{};
};

// Dispatches offers in ascending price order until demand is met. The price
// is the offer of the marginal (last dispatched) seller; sellers with an
// identical offer split the remaining demand evenly. Offers outside
// [price_floor, price_cap] throw ValidationError.
ClearingResult ClearAuction(const AuctionConfig& config,
                            const OfferVector& offers);

enum class MemoryMode { kMemoryless, kLastActions };

std::string_view ToString(MemoryMode mode);

// Number of state features for a memory mode.
int StateDim(MemoryMode mode);

// Affine map of [price_floor, price_cap] onto [-1, 1].
double NormalizePrice(double price, const AuctionConfig& config);

// Memoryless: the constant state (0). LastActions: both previous offers in
// normalized units, player order; without previous offers the initial state
// is all zeros.
std::vector<double> MakeState(MemoryMode mode,
                              const std::optional<OfferVector>& previous,
                              const AuctionConfig& config);

}  // namespace bidlearn

#endif  // BIDLEARN_ENV_H_
