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

#ifndef BIDLEARN_EXPERIMENTS_H_
#define BIDLEARN_EXPERIMENTS_H_

// Two-agent learning runs and the studies built from them: learning-rate
// grids, normalization comparisons, competitiveness series and the
// replay-buffer / noise-decay sweep.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bidlearn/agent.h"
#include "bidlearn/env.h"
#include "bidlearn/equilibrium.h"
#include "bidlearn/nn.h"

namespace bidlearn {

struct ClassifyOptions {
  double tol_cap = 1.0;
  double tol_cost = 1.0;
  int final_window = 100;       // episodes averaged for the final offers
  int sustain_episodes = 500;   // convergence-time window
  double cdf_step = 1.0;        // CDF price grid spacing
  int switch_window = 100;      // rolling window of the switch series
  int late_window = 2000;       // tail used for the late switch rate

  // Throws ConfigError naming the offending field.
  void Validate() const;

  bool operator==(const ClassifyOptions&) const = default;
};

struct RunSpec {
  std::string run_id;
  std::uint64_t seed = 0;
  AuctionConfig auction;
  Hyperparams hyper;
  ClassifyOptions classify;
};

struct EpisodeRecord {
  OfferVector offers{};  // submitted (noisy) prices
  OfferVector greedy{};  // noise-free prices at the same state
  OfferVector profits{};
  double clearing_price = 0.0;
  double noise_scale = 0.0;  // before this episode's decay
  std::array<double, kNumPlayers> critic_loss{};  // NaN when no update ran
  int switch_flag = 0;
};

struct RunRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  AuctionConfig auction;
  Hyperparams hyper;
  std::vector<EpisodeRecord> episodes;
  // Mean greedy offers over the final window (or all episodes if fewer).
  OfferVector final_offers{};
  NEClassification classification;
  bool aborted = false;
  std::string abort_reason;
};

// Plays hyper.episodes rounds: both agents act with exploration, the auction
// clears, each agent stores its transition, learns once and decays its
// noise. A NumericError ends the run early with aborted = true; the record
// then counts as non-equilibrium. Deterministic in (auction, hyper, seed).
RunRecord RunEpisodeLoop(const RunSpec& spec);

// switch[t] = 1 iff the strict low bidder at t differs from the one at t - 1
// and neither episode is a tie. switch[0] = 0.
std::vector<int> SwitchFlags(const std::vector<OfferVector>& offers);

// First episode that starts `sustain` consecutive episodes with both
// submitted offers within `tolerance` of `target`.
std::optional<int> ConvergenceEpisode(const RunRecord& record, double target,
                                      double tolerance, int sustain);

// Compact per-run result kept by sweeps.
struct RunSummary {
  std::string run_id;
  std::uint64_t seed = 0;
  Hyperparams hyper;
  OfferVector final_offers{};
  NEClassification classification;
  bool aborted = false;
  std::string abort_reason;
  int episodes_completed = 0;
  std::optional<int> convergence_episode;  // set by the buffer sweep
  // Mean raw switch flag over the last `late_window` completed episodes.
  double late_switch_rate = 0.0;
};

RunSummary Summarize(const RunRecord& record, int late_window);

// Runs every spec on a pool of `workers` threads (0 = hardware concurrency).
// `sink` is called once per finished run, serialized, with the index into
// `specs`. Output order does not depend on scheduling.
using RunSink = std::function<void(std::size_t, RunRecord&&)>;
void ExecuteRuns(const std::vector<RunSpec>& specs, int workers,
                 const RunSink& sink);

// base_seed + cell_index * 1000 + run_index.
std::uint64_t CellSeed(std::uint64_t base_seed, int cell_index, int run_index);

// {1, 2.5, 5, 7.5} x 10^k from 10^lo_exp up to and including 10^hi_exp.
std::vector<double> LearningRateGrid(int lo_exp = -5, int hi_exp = -2);

struct StudyBase {
  AuctionConfig auction;
  Hyperparams hyper;
  ClassifyOptions classify;
  std::uint64_t base_seed = 0;
  int runs_per_cell = 1;
  int workers = 0;
  // Optional per-run observer (trajectory writers, progress).
  std::function<void(const RunRecord&)> on_run;
};

struct LrSweepSpec {
  StudyBase base;
  std::vector<double> actor_lrs;
  std::vector<double> critic_lrs;
};

struct LrCell {
  double actor_lr = 0.0;
  double critic_lr = 0.0;
  int runs = 0;
  int equilibria = 0;
  int aborted = 0;
  double convergence_rate = 0.0;  // equilibria / runs
};

struct LrSweepResult {
  std::vector<LrCell> cells;  // actor-major order
  std::vector<RunSummary> runs;
};

LrSweepResult LearningRateSweep(const LrSweepSpec& spec);

struct NormStudySpec {
  StudyBase base;
  std::vector<nn::Norm> schemes{nn::Norm::kNone, nn::Norm::kLayer,
                                nn::Norm::kBatch};
  std::vector<MemoryMode> memory_modes{MemoryMode::kMemoryless,
                                       MemoryMode::kLastActions};
};

struct NormCell {
  nn::Norm scheme = nn::Norm::kLayer;
  MemoryMode memory = MemoryMode::kMemoryless;
  int runs = 0;
  int aborted = 0;
  int equilibria = 0;
  double equilibrium_rate = 0.0;  // equilibria / runs
  // Empirical CDF of the low bidder's final offer over completed runs.
  std::vector<double> cdf_grid;
  std::vector<double> cdf;
  // Runs whose low final offer is at or below the threshold, over all runs.
  double cdf_convergence = 0.0;
  double late_switch_rate = 0.0;  // mean over completed runs
  std::vector<double> switch_series;  // rolling, averaged over completed runs
};

struct NormStudyResult {
  double threshold = 0.0;
  std::vector<NormCell> cells;  // scheme-major order
  std::vector<RunSummary> runs;
};

NormStudyResult NormalizationStudy(const NormStudySpec& spec);

// Empirical CDF of `values` evaluated at each grid point (right-continuous).
std::vector<double> EmpiricalCdf(std::vector<double> values,
                                 const std::vector<double>& grid);
std::vector<double> PriceGrid(double lo, double hi, double step);

// Mean switch flag per episode across records, then a trailing rolling mean
// of `window` episodes: episodes - window + 1 values. Records must share a
// length of at least `window`.
std::vector<double> CompetitivenessSeries(
    const std::vector<std::vector<int>>& switch_flags, int window);

struct BufferSweepSpec {
  StudyBase base;
  std::vector<int> buffer_capacities{50000, 5000, 500, 256, 129};
  std::vector<double> decay_factors{0.9999, 0.999, 0.99};
};

struct BufferCell {
  int buffer_capacity = 0;
  double decay_factor = 0.0;
  int runs = 0;
  int converged = 0;
  int aborted = 0;
  // Over all runs; non-converged runs count as +infinity.
  double median_episode = std::numeric_limits<double>::infinity();
  double min_episode = std::numeric_limits<double>::infinity();
};

struct BufferSweepResult {
  std::vector<BufferCell> cells;  // buffer-major order
  std::vector<RunSummary> runs;
};

// Requires the unconstrained regime (demand <= capacity); ConfigError
// otherwise.
BufferSweepResult BufferAndDecaySweep(const BufferSweepSpec& spec);

// Median with +infinity entries ordered last.
double Median(std::vector<double> values);

}  // namespace bidlearn

#endif  // BIDLEARN_EXPERIMENTS_H_
