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

#include "bidlearn/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "bidlearn/error.h"

namespace bidlearn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

NEClassification NonEquilibrium(const OfferVector& offers,
                                const EquilibriumSpec& eq) {
  NEClassification out;
  out.final_offers = offers;
  out.low_bidder_index = LowBidder(offers);
  out.classified = eq.regime != Regime::kUncompetitive;
  return out;
}

std::vector<OfferVector> SubmittedOffers(const RunRecord& record) {
  std::vector<OfferVector> offers;
  offers.reserve(record.episodes.size());
  for (const EpisodeRecord& ep : record.episodes) offers.push_back(ep.offers);
  return offers;
}

template <typename Cell>
void CheckStudy(const StudyBase& base, const std::vector<Cell>& axis,
                const char* name) {
  base.auction.Validate();
  base.hyper.Validate();
  base.classify.Validate();
  if (base.runs_per_cell < 1) {
    throw ConfigError("sweep.runs_per_cell: must be >= 1");
  }
  if (axis.empty()) {
    throw ConfigError(std::string("sweep.") + name + ": value list is empty");
  }
}

// Runs `specs` and keeps a summary of each, in spec order.
std::vector<RunSummary> RunAndSummarize(
    const StudyBase& base, const std::vector<RunSpec>& specs, int late_window,
    const std::function<void(std::size_t, const RunRecord&)>& extra = {}) {
  std::vector<RunSummary> summaries(specs.size());
  ExecuteRuns(specs, base.workers, [&](std::size_t idx, RunRecord&& record) {
    summaries[idx] = Summarize(record, late_window);
    if (extra) extra(idx, record);
    if (base.on_run) base.on_run(record);
  });
  return summaries;
}

}  // namespace

void ClassifyOptions::Validate() const {
  auto fail = [](const char* key, const std::string& why) {
    throw ConfigError(std::string("classify.") + key + ": " + why);
  };
  if (!(tol_cap >= 0.0) || !std::isfinite(tol_cap)) fail("tol_cap", "must be >= 0");
  if (!(tol_cost >= 0.0) || !std::isfinite(tol_cost)) {
    fail("tol_cost", "must be >= 0");
  }
  if (final_window < 1) fail("final_window", "must be >= 1");
  if (sustain_episodes < 1) fail("sustain_episodes", "must be >= 1");
  if (!(cdf_step > 0.0) || !std::isfinite(cdf_step)) {
    fail("cdf_step", "must be > 0");
  }
  if (switch_window < 1) fail("switch_window", "must be >= 1");
  if (late_window < 1) fail("late_window", "must be >= 1");
}

RunRecord RunEpisodeLoop(const RunSpec& spec) {
  const AuctionConfig& auction = spec.auction;
  const Hyperparams& hyper = spec.hyper;
  auction.Validate();
  hyper.Validate();
  spec.classify.Validate();

  RunRecord record;
  record.run_id = spec.run_id;
  record.seed = spec.seed;
  record.auction = auction;
  record.hyper = hyper;

  const EquilibriumSpec eq = NeThreshold(auction);
  const double reward_scale =
      (auction.price_cap - auction.marginal_cost) * auction.capacity_per_player;
  const int state_dim = StateDim(hyper.memory_mode);

  std::vector<Agent> agents;
  agents.reserve(kNumPlayers);
  for (int i = 0; i < kNumPlayers; ++i) {
    agents.emplace_back(state_dim, hyper, spec.seed * kNumPlayers + i);
  }

  record.episodes.reserve(static_cast<std::size_t>(hyper.episodes));
  std::optional<OfferVector> previous;
  int previous_low = -1;
  try {
    for (int t = 0; t < hyper.episodes; ++t) {
      const std::vector<double> state =
          MakeState(hyper.memory_mode, previous, auction);
      EpisodeRecord ep;
      ep.noise_scale = agents[0].noise().scale();
      std::array<double, kNumPlayers> actions{};
      for (int i = 0; i < kNumPlayers; ++i) {
        const double greedy = agents[i].Greedy(state);
        actions[i] = agents[i].Explore(greedy);
        ep.greedy[i] = ActionToPrice(greedy, auction);
        ep.offers[i] = ActionToPrice(actions[i], auction);
      }
      const ClearingResult cleared = ClearAuction(auction, ep.offers);
      ep.clearing_price = cleared.clearing_price;
      ep.profits = cleared.profits;
      const std::vector<double> next_state =
          MakeState(hyper.memory_mode, ep.offers, auction);
      for (int i = 0; i < kNumPlayers; ++i) {
        agents[i].Remember(
            {state, actions[i], cleared.profits[i] / reward_scale, next_state});
      }
      for (int i = 0; i < kNumPlayers; ++i) {
        const std::optional<LearnDiagnostics> diag = agents[i].LearnStep();
        ep.critic_loss[i] = diag ? diag->critic_loss : kNaN;
        agents[i].DecayNoise();
      }
      const int low = LowBidder(ep.offers);
      ep.switch_flag =
          t > 0 && low >= 0 && previous_low >= 0 && low != previous_low;
      previous_low = low;
      previous = ep.offers;
      record.episodes.push_back(ep);
    }
  } catch (const NumericError& e) {
    record.aborted = true;
    record.abort_reason = "episode " + std::to_string(record.episodes.size()) +
                          ": " + e.what();
  }

  const std::size_t n = record.episodes.size();
  const std::size_t window =
      std::min(n, static_cast<std::size_t>(spec.classify.final_window));
  OfferVector mean{};
  for (std::size_t t = n - window; t < n; ++t) {
    for (int i = 0; i < kNumPlayers; ++i) {
      mean[i] += record.episodes[t].greedy[i];
    }
  }
  if (window > 0) {
    for (double& m : mean) m /= static_cast<double>(window);
  }
  record.final_offers = mean;
  record.classification =
      record.aborted || n == 0
          ? NonEquilibrium(mean, eq)
          : ClassifyFinal(mean, eq, spec.classify.tol_cap,
                          spec.classify.tol_cost);
  return record;
}

std::vector<int> SwitchFlags(const std::vector<OfferVector>& offers) {
  std::vector<int> flags(offers.size(), 0);
  for (std::size_t t = 1; t < offers.size(); ++t) {
    const int now = LowBidder(offers[t]);
    const int before = LowBidder(offers[t - 1]);
    flags[t] = now >= 0 && before >= 0 && now != before;
  }
  return flags;
}

std::optional<int> ConvergenceEpisode(const RunRecord& record, double target,
                                      double tolerance, int sustain) {
  int streak = 0;
  for (std::size_t t = 0; t < record.episodes.size(); ++t) {
    const OfferVector& o = record.episodes[t].offers;
    const bool inside = std::abs(o[0] - target) <= tolerance &&
                        std::abs(o[1] - target) <= tolerance;
    streak = inside ? streak + 1 : 0;
    if (streak >= sustain) return static_cast<int>(t) - sustain + 1;
  }
  return std::nullopt;
}

RunSummary Summarize(const RunRecord& record, int late_window) {
  RunSummary s;
  s.run_id = record.run_id;
  s.seed = record.seed;
  s.hyper = record.hyper;
  s.final_offers = record.final_offers;
  s.classification = record.classification;
  s.aborted = record.aborted;
  s.abort_reason = record.abort_reason;
  s.episodes_completed = static_cast<int>(record.episodes.size());
  const int n = s.episodes_completed;
  const int window = std::min(n, std::max(late_window, 0));
  if (window > 0) {
    long total = 0;
    for (int t = n - window; t < n; ++t) total += record.episodes[t].switch_flag;
    s.late_switch_rate = static_cast<double>(total) / window;
  }
  return s;
}

void ExecuteRuns(const std::vector<RunSpec>& specs, int workers,
                 const RunSink& sink) {
  if (specs.empty()) return;
  if (workers <= 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = std::min<int>(workers, static_cast<int>(specs.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::exception_ptr error;
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= specs.size()) return;
      try {
        RunRecord record = RunEpisodeLoop(specs[idx]);
        std::lock_guard<std::mutex> lock(mu);
        sink(idx, std::move(record));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::uint64_t CellSeed(std::uint64_t base_seed, int cell_index,
                       int run_index) {
  return base_seed + static_cast<std::uint64_t>(cell_index) * 1000u +
         static_cast<std::uint64_t>(run_index);
}

std::vector<double> LearningRateGrid(int lo_exp, int hi_exp) {
  if (lo_exp > hi_exp) throw ValidationError("empty learning-rate decade range");
  std::vector<double> grid;
  for (int k = lo_exp; k < hi_exp; ++k) {
    for (double m : {1.0, 2.5, 5.0, 7.5}) grid.push_back(m * std::pow(10.0, k));
  }
  grid.push_back(std::pow(10.0, hi_exp));
  return grid;
}

LrSweepResult LearningRateSweep(const LrSweepSpec& spec) {
  CheckStudy(spec.base, spec.actor_lrs, "lr_actor");
  CheckStudy(spec.base, spec.critic_lrs, "lr_critic");
  const StudyBase& base = spec.base;

  LrSweepResult result;
  std::vector<RunSpec> specs;
  int cell_index = 0;
  for (std::size_t a = 0; a < spec.actor_lrs.size(); ++a) {
    for (std::size_t c = 0; c < spec.critic_lrs.size(); ++c, ++cell_index) {
      LrCell cell;
      cell.actor_lr = spec.actor_lrs[a];
      cell.critic_lr = spec.critic_lrs[c];
      cell.runs = base.runs_per_cell;
      result.cells.push_back(cell);
      for (int r = 0; r < base.runs_per_cell; ++r) {
        RunSpec run;
        run.run_id = "lr_a" + std::to_string(a) + "_c" + std::to_string(c) +
                     "_r" + std::to_string(r);
        run.seed = CellSeed(base.base_seed, cell_index, r);
        run.auction = base.auction;
        run.hyper = base.hyper;
        run.hyper.lr_actor = cell.actor_lr;
        run.hyper.lr_critic = cell.critic_lr;
        run.hyper.Validate();
        run.classify = base.classify;
        specs.push_back(std::move(run));
      }
    }
  }

  result.runs = RunAndSummarize(base, specs, base.classify.late_window);
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    LrCell& cell = result.cells[i / base.runs_per_cell];
    cell.equilibria += result.runs[i].classification.is_equilibrium;
    cell.aborted += result.runs[i].aborted;
  }
  for (LrCell& cell : result.cells) {
    cell.convergence_rate = static_cast<double>(cell.equilibria) / cell.runs;
  }
  return result;
}

std::vector<double> PriceGrid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) throw ValidationError("invalid price grid");
  std::vector<double> grid;
  const double slack = 1e-9 * std::max(1.0, hi - lo);
  for (long k = 0;; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    if (x >= hi - slack) break;
    grid.push_back(x);
  }
  grid.push_back(hi);
  return grid;
}

std::vector<double> EmpiricalCdf(std::vector<double> values,
                                 const std::vector<double>& grid) {
  std::sort(values.begin(), values.end());
  std::vector<double> cdf(grid.size(), 0.0);
  if (values.empty()) return cdf;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto at_or_below =
        std::upper_bound(values.begin(), values.end(), grid[g]) - values.begin();
    cdf[g] = static_cast<double>(at_or_below) / values.size();
  }
  return cdf;
}

std::vector<double> CompetitivenessSeries(
    const std::vector<std::vector<int>>& switch_flags, int window) {
  if (switch_flags.empty()) throw ValidationError("no runs to aggregate");
  if (window < 1) throw ValidationError("switch window must be >= 1");
  const std::size_t n = switch_flags.front().size();
  for (const std::vector<int>& flags : switch_flags) {
    if (flags.size() != n) {
      throw ValidationError("runs differ in episode count");
    }
  }
  if (n < static_cast<std::size_t>(window)) {
    throw ValidationError("fewer episodes than the switch window");
  }
  std::vector<double> mean(n, 0.0);
  for (const std::vector<int>& flags : switch_flags) {
    for (std::size_t t = 0; t < n; ++t) mean[t] += flags[t];
  }
  for (double& m : mean) m /= static_cast<double>(switch_flags.size());

  std::vector<double> rolling;
  rolling.reserve(n - window + 1);
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sum += mean[t];
    if (t >= static_cast<std::size_t>(window)) sum -= mean[t - window];
    if (t + 1 >= static_cast<std::size_t>(window)) {
      rolling.push_back(std::clamp(sum / window, 0.0, 1.0));
    }
  }
  return rolling;
}

NormStudyResult NormalizationStudy(const NormStudySpec& spec) {
  CheckStudy(spec.base, spec.schemes, "normalization");
  CheckStudy(spec.base, spec.memory_modes, "memory_mode");
  const StudyBase& base = spec.base;

  NormStudyResult result;
  result.threshold = NeThreshold(base.auction).low_threshold;
  std::vector<RunSpec> specs;
  int cell_index = 0;
  for (nn::Norm scheme : spec.schemes) {
    for (MemoryMode memory : spec.memory_modes) {
      NormCell cell;
      cell.scheme = scheme;
      cell.memory = memory;
      cell.runs = base.runs_per_cell;
      result.cells.push_back(cell);
      for (int r = 0; r < base.runs_per_cell; ++r) {
        RunSpec run;
        run.run_id = "norm_" + std::string(nn::ToString(scheme)) + "_" +
                     std::string(ToString(memory)) + "_r" + std::to_string(r);
        run.seed = CellSeed(base.base_seed, cell_index, r);
        run.auction = base.auction;
        run.hyper = base.hyper;
        run.hyper.normalization = scheme;
        run.hyper.memory_mode = memory;
        run.hyper.Validate();
        run.classify = base.classify;
        specs.push_back(std::move(run));
      }
      ++cell_index;
    }
  }

  std::vector<std::vector<int>> flags(specs.size());
  result.runs = RunAndSummarize(
      base, specs, base.classify.late_window,
      [&](std::size_t idx, const RunRecord& record) {
        if (!record.aborted) flags[idx] = SwitchFlags(SubmittedOffers(record));
      });

  const std::vector<double> grid = PriceGrid(
      base.auction.price_floor, base.auction.price_cap, base.classify.cdf_step);
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    NormCell& cell = result.cells[c];
    std::vector<double> lows;
    std::vector<std::vector<int>> cell_flags;
    double switch_sum = 0.0;
    int below = 0;
    for (int r = 0; r < base.runs_per_cell; ++r) {
      const std::size_t idx = c * base.runs_per_cell + r;
      const RunSummary& run = result.runs[idx];
      cell.equilibria += run.classification.is_equilibrium;
      if (run.aborted) {
        ++cell.aborted;
        continue;
      }
      const double low = std::min(run.final_offers[0], run.final_offers[1]);
      lows.push_back(low);
      below += low <= result.threshold;
      switch_sum += run.late_switch_rate;
      cell_flags.push_back(std::move(flags[idx]));
    }
    cell.equilibrium_rate = static_cast<double>(cell.equilibria) / cell.runs;
    cell.cdf_grid = grid;
    cell.cdf = EmpiricalCdf(lows, grid);
    cell.cdf_convergence = static_cast<double>(below) / cell.runs;
    if (!lows.empty()) {
      cell.late_switch_rate = switch_sum / static_cast<double>(lows.size());
      if (base.hyper.episodes >= base.classify.switch_window) {
        cell.switch_series =
            CompetitivenessSeries(cell_flags, base.classify.switch_window);
      }
    }
  }
  return result;
}

double Median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

BufferSweepResult BufferAndDecaySweep(const BufferSweepSpec& spec) {
  CheckStudy(spec.base, spec.buffer_capacities, "buffer_capacity");
  CheckStudy(spec.base, spec.decay_factors, "noise_decay");
  const StudyBase& base = spec.base;
  const EquilibriumSpec eq = NeThreshold(base.auction);
  if (eq.regime != Regime::kUnconstrained) {
    throw ConfigError(
        "auction.demand: the buffer sweep needs demand <= capacity");
  }

  BufferSweepResult result;
  std::vector<RunSpec> specs;
  int cell_index = 0;
  for (int buffer : spec.buffer_capacities) {
    for (double decay : spec.decay_factors) {
      BufferCell cell;
      cell.buffer_capacity = buffer;
      cell.decay_factor = decay;
      cell.runs = base.runs_per_cell;
      result.cells.push_back(cell);
      for (int r = 0; r < base.runs_per_cell; ++r) {
        RunSpec run;
        run.run_id = "buffer_" + std::to_string(buffer) + "_d" +
                     std::to_string(cell_index % spec.decay_factors.size()) +
                     "_r" + std::to_string(r);
        run.seed = CellSeed(base.base_seed, cell_index, r);
        run.auction = base.auction;
        run.hyper = base.hyper;
        run.hyper.buffer_capacity = buffer;
        run.hyper.noise_decay = decay;
        run.hyper.Validate();
        run.classify = base.classify;
        specs.push_back(std::move(run));
      }
      ++cell_index;
    }
  }

  std::vector<std::optional<int>> converged(specs.size());
  result.runs = RunAndSummarize(
      base, specs, base.classify.late_window,
      [&](std::size_t idx, const RunRecord& record) {
        converged[idx] =
            ConvergenceEpisode(record, eq.low_threshold,
                               base.classify.tol_cost,
                               base.classify.sustain_episodes);
      });

  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    BufferCell& cell = result.cells[c];
    std::vector<double> times;
    for (int r = 0; r < base.runs_per_cell; ++r) {
      const std::size_t idx = c * base.runs_per_cell + r;
      RunSummary& run = result.runs[idx];
      run.convergence_episode = converged[idx];
      cell.aborted += run.aborted;
      if (converged[idx]) {
        ++cell.converged;
        times.push_back(*converged[idx]);
      } else {
        times.push_back(kInf);
      }
    }
    cell.median_episode = Median(times);
    cell.min_episode = *std::min_element(times.begin(), times.end());
  }
  return result;
}

}  // namespace bidlearn
