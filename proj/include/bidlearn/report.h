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

#ifndef BIDLEARN_REPORT_H_
#define BIDLEARN_REPORT_H_

// CSV and SVG artifacts plus the manifest that indexes them. All writers
// throw IoError on filesystem failures. Floats are written in shortest
// round-trip form.

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "bidlearn/equilibrium.h"
#include "bidlearn/experiments.h"

namespace bidlearn {

inline constexpr int kCsvSchemaVersion = 1;

// manifest.json in the output directory. Every Register call rewrites the
// manifest before the caller writes the file, so no output exists without an
// entry.
class Manifest {
 public:
  Manifest(std::string output_dir, std::string command,
           std::string config_text);

  // Returns the full path for `file_name`.
  std::string Register(const std::string& file_name, const std::string& kind);
  void AddSeeds(const std::vector<std::uint64_t>& seeds);
  void Finish(double wall_seconds, int runs, int aborted);

  const std::string& output_dir() const { return output_dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  void Write() const;

  std::string output_dir_;
  std::string command_;
  std::string config_text_;
  std::vector<std::string> files_;
  std::vector<std::string> kinds_;
  std::vector<std::uint64_t> seeds_;
  double wall_seconds_ = 0.0;
  int runs_ = 0;
  int aborted_ = 0;
  bool finished_ = false;
};

void WriteTrajectoryCsv(std::ostream& out, const RunRecord& record);
void WriteRunSummaryCsv(std::ostream& out, const std::vector<RunSummary>& runs);
void WriteHeatmapCsv(std::ostream& out, const LrSweepResult& result);
void WriteCdfCsv(std::ostream& out, const NormCell& cell);
void WriteNormSummaryCsv(std::ostream& out, const NormStudyResult& result);
// One column per cell; the episode column is the last episode of each
// rolling window.
void WriteSwitchesCsv(std::ostream& out, const NormStudyResult& result,
                      int window);
void WriteBufferDecayCsv(std::ostream& out, const BufferSweepResult& result);
void WriteOracleCsv(std::ostream& out, const BimatrixOracleResult& result);

// Opens `path` for writing, runs `write`, and checks the stream.
void WriteFile(const std::string& path,
               const std::function<void(std::ostream&)>& write);

// SVG renderings read back from a written CSV: one polyline per y column
// against column `x_column` (all other columns if `y_columns` is empty), or a
// heatmap of the third column over the first two.
void RenderLineSvg(const std::string& csv_path, const std::string& svg_path,
                   const std::string& title, int x_column,
                   const std::vector<int>& y_columns = {});
void RenderHeatmapSvg(const std::string& csv_path, const std::string& svg_path,
                      const std::string& title);

// File-name fragment for a normalization cell, e.g. "layer_memoryless".
std::string CellName(const NormCell& cell);

}  // namespace bidlearn

#endif  // BIDLEARN_REPORT_H_
