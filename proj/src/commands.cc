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

#include "bidlearn/commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "bidlearn/equilibrium.h"
#include "bidlearn/error.h"
#include "bidlearn/experiments.h"
#include "bidlearn/report.h"
#include "text_util.h"

namespace bidlearn {
namespace {

using internal::FormatDouble;

class Session {
 public:
  Session(Command command, const RunConfig& config, const ExecOptions& options)
      : config_(config),
        options_(options),
        manifest_(config.output_dir, std::string(ToString(command)),
                  SerializeConfig(config)),
        start_(std::chrono::steady_clock::now()) {}

  StudyBase Base(int total_runs) {
    StudyBase base;
    base.auction = config_.auction;
    base.hyper = config_.hyper;
    base.classify = config_.classify;
    base.base_seed = config_.base_seed;
    base.runs_per_cell = config_.sweep.runs_per_cell;
    base.workers = options_.workers;
    base.on_run = [this, total_runs](const RunRecord& r) {
      ++done_;
      if (options_.progress == nullptr) return;
      *options_.progress << "[" << done_ << "/" << total_runs << "] "
                         << r.run_id << " final (" << r.final_offers[0]
                         << ", " << r.final_offers[1] << ")"
                         << (r.classification.is_equilibrium ? " equilibrium"
                                                             : "")
                         << (r.aborted ? " ABORTED" : "") << "\n";
      options_.progress->flush();
    };
    return base;
  }

  std::string Write(const std::string& name, const std::string& kind,
                    const std::function<void(std::ostream&)>& write) {
    const std::string path = manifest_.Register(name, kind);
    WriteFile(path, write);
    report_.files.push_back(path);
    return path;
  }

  void Svg(const std::string& name,
           const std::function<void(const std::string&)>& render) {
    if (!config_.emit_svg) return;
    const std::string path = manifest_.Register(name, "svg");
    render(path);
    report_.files.push_back(path);
  }

  void Seeds(const std::vector<RunSummary>& runs) {
    std::vector<std::uint64_t> seeds;
    for (const RunSummary& r : runs) seeds.push_back(r.seed);
    manifest_.AddSeeds(seeds);
  }

  CommandReport Finish(const std::vector<RunSummary>& runs,
                       std::string summary) {
    report_.runs = static_cast<int>(runs.size());
    for (const RunSummary& r : runs) report_.aborted += r.aborted;
    report_.threshold_exceeded =
        report_.runs > 0 && static_cast<double>(report_.aborted) >
                                options_.max_aborted_fraction * report_.runs;
    report_.wall_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start_)
                               .count();
    report_.summary = std::move(summary);
    if (report_.aborted > 0) {
      report_.summary += std::to_string(report_.aborted) + " of " +
                         std::to_string(report_.runs) + " runs aborted\n";
    }
    manifest_.Finish(report_.wall_seconds, report_.runs, report_.aborted);
    return report_;
  }

  void WriteRunSummary(const std::vector<RunSummary>& runs) {
    Write("run_summary.csv", "run_summary",
          [&](std::ostream& out) { WriteRunSummaryCsv(out, runs); });
  }

 private:
  const RunConfig& config_;
  const ExecOptions& options_;
  Manifest manifest_;
  std::chrono::steady_clock::time_point start_;
  CommandReport report_;
  int done_ = 0;
};

std::string Offers(const OfferVector& o) {
  std::ostringstream s;
  s.precision(6);
  s << "(" << o[0] << ", " << o[1] << ")";
  return s.str();
}

CommandReport DoRun(const RunConfig& config, const ExecOptions& options) {
  Session session(Command::kRun, config, options);
  std::vector<RunSpec> specs;
  for (int r = 0; r < config.run_count; ++r) {
    RunSpec spec;
    spec.run_id = "run_" + std::to_string(r);
    spec.seed = CellSeed(config.base_seed, 0, r);
    spec.auction = config.auction;
    spec.hyper = config.hyper;
    spec.classify = config.classify;
    specs.push_back(std::move(spec));
  }
  StudyBase base = session.Base(config.run_count);
  std::vector<RunSummary> runs(specs.size());
  ExecuteRuns(specs, options.workers, [&](std::size_t idx, RunRecord&& record) {
    runs[idx] = Summarize(record, config.classify.late_window);
    const std::string name = "trajectory_" + record.run_id;
    const std::string csv = session.Write(
        name + ".csv", "trajectory",
        [&](std::ostream& out) { WriteTrajectoryCsv(out, record); });
    session.Svg(name + ".svg", [&](const std::string& svg) {
      RenderLineSvg(csv, svg, "Offers of " + record.run_id, 0, {1, 2, 3, 4});
    });
    base.on_run(record);
  });
  session.Seeds(runs);
  session.WriteRunSummary(runs);

  const EquilibriumSpec eq = NeThreshold(config.auction);
  std::ostringstream text;
  text << "regime " << ToString(eq.regime) << ", threshold "
       << FormatDouble(eq.low_threshold) << "\n";
  for (const RunSummary& r : runs) {
    text << r.run_id << " seed " << r.seed << ": final offers "
         << Offers(r.final_offers) << ", "
         << (!r.classification.classified       ? "not classified"
             : r.classification.is_equilibrium ? "equilibrium"
                                               : "not an equilibrium")
         << "\n";
  }
  return session.Finish(runs, text.str());
}

CommandReport DoSweepLr(const RunConfig& config, const ExecOptions& options) {
  Session session(Command::kSweepLr, config, options);
  LrSweepSpec spec;
  spec.actor_lrs = config.sweep.lr_actor.value_or(LearningRateGrid());
  spec.critic_lrs = config.sweep.lr_critic.value_or(LearningRateGrid());
  spec.base = session.Base(static_cast<int>(
      spec.actor_lrs.size() * spec.critic_lrs.size() *
      config.sweep.runs_per_cell));
  const LrSweepResult result = LearningRateSweep(spec);
  session.Seeds(result.runs);
  const std::string csv = session.Write(
      "heatmap.csv", "heatmap",
      [&](std::ostream& out) { WriteHeatmapCsv(out, result); });
  session.Svg("heatmap.svg", [&](const std::string& svg) {
    RenderHeatmapSvg(csv, svg, "Equilibrium rate by learning rates");
  });
  session.WriteRunSummary(result.runs);

  const LrCell& best = *std::max_element(
      result.cells.begin(), result.cells.end(),
      [](const LrCell& a, const LrCell& b) {
        return a.convergence_rate < b.convergence_rate;
      });
  std::ostringstream text;
  text << result.cells.size() << " cells x " << config.sweep.runs_per_cell
       << " runs; best cell actor " << FormatDouble(best.actor_lr)
       << " critic " << FormatDouble(best.critic_lr) << " at "
       << FormatDouble(best.convergence_rate) << "\n";
  return session.Finish(result.runs, text.str());
}

CommandReport DoStudyNorm(const RunConfig& config, const ExecOptions& options) {
  Session session(Command::kStudyNorm, config, options);
  NormStudySpec spec;
  if (config.sweep.normalization) spec.schemes = *config.sweep.normalization;
  if (config.sweep.memory_mode) spec.memory_modes = *config.sweep.memory_mode;
  spec.base = session.Base(static_cast<int>(
      spec.schemes.size() * spec.memory_modes.size() *
      config.sweep.runs_per_cell));
  const NormStudyResult result = NormalizationStudy(spec);
  session.Seeds(result.runs);
  std::ostringstream text;
  text << "threshold " << FormatDouble(result.threshold) << "\n";
  for (const NormCell& cell : result.cells) {
    const std::string name = "cdf_" + CellName(cell);
    const std::string csv = session.Write(
        name + ".csv", "cdf", [&](std::ostream& out) { WriteCdfCsv(out, cell); });
    session.Svg(name + ".svg", [&](const std::string& svg) {
      RenderLineSvg(csv, svg, "Low final offer CDF, " + CellName(cell), 0);
    });
    text << CellName(cell) << ": equilibrium rate "
         << FormatDouble(cell.equilibrium_rate) << ", CDF at threshold "
         << FormatDouble(cell.cdf_convergence) << ", late switch rate "
         << FormatDouble(cell.late_switch_rate) << "\n";
  }
  const std::string switches = session.Write(
      "switches.csv", "switches", [&](std::ostream& out) {
        WriteSwitchesCsv(out, result, config.classify.switch_window);
      });
  session.Svg("switches.svg", [&](const std::string& svg) {
    RenderLineSvg(switches, svg, "Switch rate (rolling mean)", 0);
  });
  session.Write("norm_summary.csv", "norm_summary", [&](std::ostream& out) {
    WriteNormSummaryCsv(out, result);
  });
  session.WriteRunSummary(result.runs);
  return session.Finish(result.runs, text.str());
}

CommandReport DoSweepBuffer(const RunConfig& config,
                            const ExecOptions& options) {
  Session session(Command::kSweepBuffer, config, options);
  BufferSweepSpec spec;
  if (config.sweep.buffer_capacity) {
    spec.buffer_capacities = *config.sweep.buffer_capacity;
  }
  if (config.sweep.noise_decay) spec.decay_factors = *config.sweep.noise_decay;
  spec.base = session.Base(static_cast<int>(
      spec.buffer_capacities.size() * spec.decay_factors.size() *
      config.sweep.runs_per_cell));
  const BufferSweepResult result = BufferAndDecaySweep(spec);
  session.Seeds(result.runs);
  session.Write("buffer_decay.csv", "buffer_decay", [&](std::ostream& out) {
    WriteBufferDecayCsv(out, result);
  });
  session.WriteRunSummary(result.runs);
  std::ostringstream text;
  for (const BufferCell& c : result.cells) {
    text << "buffer " << c.buffer_capacity << " decay "
         << FormatDouble(c.decay_factor) << ": " << c.converged << "/"
         << c.runs << " converged, median episode "
         << FormatDouble(c.median_episode) << "\n";
  }
  return session.Finish(result.runs, text.str());
}

CommandReport DoOracle(const RunConfig& config, const ExecOptions& options) {
  Session session(Command::kOracle, config, options);
  const EquilibriumSpec eq = NeThreshold(config.auction);
  const BimatrixOracleResult oracle =
      BimatrixNashOracle(config.auction, config.oracle_grid_step);
  session.Write("oracle.csv", "oracle",
                [&](std::ostream& out) { WriteOracleCsv(out, oracle); });

  std::ostringstream text;
  text << "regime " << ToString(eq.regime) << "\n";
  switch (eq.regime) {
    case Regime::kConstrained:
      text << "threshold " << FormatDouble(eq.low_threshold) << "\n"
           << "high price " << FormatDouble(eq.high_price) << "\n"
           << "equilibria: one offer at " << FormatDouble(eq.high_price)
           << ", the other at or below " << FormatDouble(eq.low_threshold)
           << "\n";
      break;
    case Regime::kUnconstrained:
      text << "equilibrium: both offers at marginal cost "
           << FormatDouble(eq.low_threshold) << "\n";
      break;
    case Regime::kUncompetitive:
      text << "equilibria: every pair with at least one offer at "
           << FormatDouble(eq.high_price) << "\n";
      break;
  }
  text << "grid oracle (step " << FormatDouble(config.oracle_grid_step)
       << "): " << oracle.equilibria.size() << " pure equilibria\n";
  return session.Finish({}, text.str());
}

}  // namespace

std::string_view ToString(Command command) {
  switch (command) {
    case Command::kRun:
      return "run";
    case Command::kSweepLr:
      return "sweep-lr";
    case Command::kStudyNorm:
      return "study-norm";
    case Command::kSweepBuffer:
      return "sweep-buffer";
    case Command::kOracle:
      return "oracle";
  }
  return "unknown";
}

std::optional<Command> ParseCommand(std::string_view name) {
  for (Command c : {Command::kRun, Command::kSweepLr, Command::kStudyNorm,
                    Command::kSweepBuffer, Command::kOracle}) {
    if (ToString(c) == name) return c;
  }
  return std::nullopt;
}

CommandReport ExecuteCommand(Command command, const RunConfig& config,
                             const ExecOptions& options) {
  config.Validate();
  if (!(options.max_aborted_fraction >= 0.0 &&
        options.max_aborted_fraction <= 1.0)) {
    throw ValidationError("max aborted fraction must be in [0, 1]");
  }
  switch (command) {
    case Command::kRun:
      return DoRun(config, options);
    case Command::kSweepLr:
      return DoSweepLr(config, options);
    case Command::kStudyNorm:
      return DoStudyNorm(config, options);
    case Command::kSweepBuffer:
      return DoSweepBuffer(config, options);
    case Command::kOracle:
      return DoOracle(config, options);
  }
  throw ValidationError("unknown command");
}

}  // namespace bidlearn
