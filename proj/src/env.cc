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

#include "bidlearn/env.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bidlearn/error.h"

namespace bidlearn {

void AuctionConfig::Validate() const {
  auto fail = [](const char* key, const std::string& why) {
    throw ConfigError(std::string("auction.") + key + ": " + why);
  };
  if (!std::isfinite(capacity_per_player) || capacity_per_player <= 0.0) {
    fail("capacity", "must be > 0");
  }
  if (!std::isfinite(marginal_cost) || marginal_cost < 0.0) {
    fail("marginal_cost", "must be >= 0");
  }
  if (!std::isfinite(price_cap) || !std::isfinite(price_floor)) {
    fail("price_cap", "price bounds must be finite");
  }
  if (!(price_floor < price_cap)) {
    fail("price_floor", "must be below price_cap");
  }
  if (!(marginal_cost < price_cap)) {
    fail("marginal_cost", "must be below price_cap");
  }
  if (!std::isfinite(demand) || demand <= 0.0) fail("demand", "must be > 0");
  if (num_players != kNumPlayers) {
    fail("num_players", "only 2 players are supported");
  }
}

ClearingResult ClearAuction(const AuctionConfig& config,
                            const OfferVector& offers) {
  for (int i = 0; i < kNumPlayers; ++i) {
    if (!(offers[i] >= config.price_floor && offers[i] <= config.price_cap)) {
      std::ostringstream msg;
      msg << "offer of player " << i << " (" << offers[i]
          << ") outside [" << config.price_floor << ", " << config.price_cap
          << "]";
      throw ValidationError(msg.str());
    }
  }

  std::array<int, kNumPlayers> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return offers[a] < offers[b]; });

  ClearingResult result;
  double remaining = config.demand;
  // Walk price levels in merit order; equal offers form one level.
  for (std::size_t begin = 0; begin < order.size() && remaining > 0.0;) {
    std::size_t end = begin + 1;
    while (end < order.size() && offers[order[end]] == offers[order[begin]]) {
      ++end;
    }
    const double level_capacity =
        config.capacity_per_player * static_cast<double>(end - begin);
    const double dispatched = std::min(remaining, level_capacity);
    const double share = dispatched / static_cast<double>(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
      result.quantities[order[k]] = share;
    }
    remaining -= dispatched;
    result.clearing_price = offers[order[begin]];
    begin = end;
  }
  for (int i = 0; i < kNumPlayers; ++i) {
    result.profits[i] =
        (result.clearing_price - config.marginal_cost) * result.quantities[i];
  }
  return result;
}

std::string_view ToString(MemoryMode mode) {
  return mode == MemoryMode::kMemoryless ? "memoryless" : "last_actions";
}

int StateDim(MemoryMode mode) {
  return mode == MemoryMode::kMemoryless ? 1 : kNumPlayers;
}

double NormalizePrice(double price, const AuctionConfig& config) {
  const double half_range = 0.5 * (config.price_cap - config.price_floor);
  const double mid = 0.5 * (config.price_cap + config.price_floor);
  return (price - mid) / half_range;
}

std::vector<double> MakeState(MemoryMode mode,
                              const std::optional<OfferVector>& previous,
                              const AuctionConfig& config) {
  if (mode == MemoryMode::kMemoryless) return {0.0};
  std::vector<double> state(kNumPlayers, 0.0);
  if (previous.has_value()) {
    for (int i = 0; i < kNumPlayers; ++i) {
      state[i] = NormalizePrice((*previous)[i], config);
    }
  }
  return state;
}

}  // namespace bidlearn
