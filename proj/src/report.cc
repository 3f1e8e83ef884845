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

#include "bidlearn/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "bidlearn/error.h"
#include "bidlearn/version.h"
#include "json.hpp"
#include "text_util.h"

namespace bidlearn {
namespace {

using internal::FormatDouble;
using internal::Split;

namespace fs = std::filesystem;

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'" +
                  (ec ? ": " + ec.message() : ""));
  }
}

std::string OptionalEpisode(const std::optional<int>& e) {
  return e ? std::to_string(*e) : "";
}

std::string CsvQuote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable ReadNumericCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  for (std::string_view h : Split(line, ',')) table.header.emplace_back(h);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (std::string_view cell : Split(line, ',')) {
      double v = std::numeric_limits<double>::quiet_NaN();
      std::from_chars(cell.data(), cell.data() + cell.size(), v);
      row.push_back(v);
    }
    row.resize(table.header.size(), std::numeric_limits<double>::quiet_NaN());
    table.rows.push_back(std::move(row));
  }
  return table;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b"};

std::string Escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string Short(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

Manifest::Manifest(std::string output_dir, std::string command,
                   std::string config_text)
    : output_dir_(std::move(output_dir)),
      command_(std::move(command)),
      config_text_(std::move(config_text)) {
  EnsureDirectory(output_dir_);
  Write();
}

std::string Manifest::Register(const std::string& file_name,
                               const std::string& kind) {
  if (std::find(files_.begin(), files_.end(), file_name) == files_.end()) {
    files_.push_back(file_name);
    kinds_.push_back(kind);
    Write();
  }
  return (fs::path(output_dir_) / file_name).string();
}

void Manifest::AddSeeds(const std::vector<std::uint64_t>& seeds) {
  seeds_.insert(seeds_.end(), seeds.begin(), seeds.end());
  Write();
}

void Manifest::Finish(double wall_seconds, int runs, int aborted) {
  wall_seconds_ = wall_seconds;
  runs_ = runs;
  aborted_ = aborted;
  finished_ = true;
  Write();
}

void Manifest::Write() const {
  nlohmann::ordered_json doc;
  doc["tool"] = "bidlearn";
  doc["version"] = kVersionString;
  doc["csv_schema_version"] = kCsvSchemaVersion;
  doc["command"] = command_;
  doc["config"] = config_text_;
  doc["seeds"] = seeds_;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < files_.size(); ++i) {
    files.push_back({{"path", files_[i]}, {"kind", kinds_[i]}});
  }
  doc["files"] = files;
  doc["finished"] = finished_;
  doc["runs"] = runs_;
  doc["aborted_runs"] = aborted_;
  doc["wall_seconds"] = wall_seconds_;
  WriteFile((fs::path(output_dir_) / "manifest.json").string(),
            [&](std::ostream& out) { out << doc.dump(2) << "\n"; });
}

void WriteFile(const std::string& path,
               const std::function<void(std::ostream&)>& write) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

void WriteTrajectoryCsv(std::ostream& out, const RunRecord& record) {
  out << "episode,offer_0,offer_1,greedy_0,greedy_1,profit_0,profit_1,"
         "clearing_price,noise_scale,critic_loss_0,critic_loss_1,switch_flag\n";
  for (std::size_t t = 0; t < record.episodes.size(); ++t) {
    const EpisodeRecord& e = record.episodes[t];
    out << t << ',' << FormatDouble(e.offers[0]) << ','
        << FormatDouble(e.offers[1]) << ',' << FormatDouble(e.greedy[0]) << ','
        << FormatDouble(e.greedy[1]) << ',' << FormatDouble(e.profits[0])
        << ',' << FormatDouble(e.profits[1]) << ','
        << FormatDouble(e.clearing_price) << ',' << FormatDouble(e.noise_scale)
        << ',' << FormatDouble(e.critic_loss[0]) << ','
        << FormatDouble(e.critic_loss[1]) << ',' << e.switch_flag << '\n';
  }
}

void WriteRunSummaryCsv(std::ostream& out,
                        const std::vector<RunSummary>& runs) {
  out << "run_id,seed,lr_actor,lr_critic,normalization,memory_mode,"
         "buffer_capacity,noise_decay,final_offer_0,final_offer_1,"
         "low_bidder,classified,is_equilibrium,aborted,episodes_completed,"
         "convergence_episode,late_switch_rate,abort_reason\n";
  for (const RunSummary& r : runs) {
    const NEClassification& c = r.classification;
    out << CsvQuote(r.run_id) << ',' << r.seed << ','
        << FormatDouble(r.hyper.lr_actor) << ','
        << FormatDouble(r.hyper.lr_critic) << ','
        << nn::ToString(r.hyper.normalization) << ','
        << ToString(r.hyper.memory_mode) << ',' << r.hyper.buffer_capacity
        << ',' << FormatDouble(r.hyper.noise_decay) << ','
        << FormatDouble(r.final_offers[0]) << ','
        << FormatDouble(r.final_offers[1]) << ',' << c.low_bidder_index << ','
        << c.classified << ',' << c.is_equilibrium << ',' << r.aborted << ','
        << r.episodes_completed << ',' << OptionalEpisode(r.convergence_episode)
        << ',' << FormatDouble(r.late_switch_rate) << ','
        << CsvQuote(r.abort_reason) << '\n';
  }
}

void WriteHeatmapCsv(std::ostream& out, const LrSweepResult& result) {
  out << "actor_lr,critic_lr,convergence_rate,runs,equilibria,aborted\n";
  for (const LrCell& c : result.cells) {
    out << FormatDouble(c.actor_lr) << ',' << FormatDouble(c.critic_lr) << ','
        << FormatDouble(c.convergence_rate) << ',' << c.runs << ','
        << c.equilibria << ',' << c.aborted << '\n';
  }
}

void WriteCdfCsv(std::ostream& out, const NormCell& cell) {
  out << "price,cdf\n";
  for (std::size_t i = 0; i < cell.cdf_grid.size(); ++i) {
    out << FormatDouble(cell.cdf_grid[i]) << ',' << FormatDouble(cell.cdf[i])
        << '\n';
  }
}

void WriteNormSummaryCsv(std::ostream& out, const NormStudyResult& result) {
  out << "normalization,memory_mode,runs,aborted,equilibria,"
         "equilibrium_rate,cdf_convergence,late_switch_rate,threshold\n";
  for (const NormCell& c : result.cells) {
    out << nn::ToString(c.scheme) << ',' << ToString(c.memory) << ','
        << c.runs << ',' << c.aborted << ',' << c.equilibria << ','
        << FormatDouble(c.equilibrium_rate) << ','
        << FormatDouble(c.cdf_convergence) << ','
        << FormatDouble(c.late_switch_rate) << ','
        << FormatDouble(result.threshold) << '\n';
  }
}

void WriteSwitchesCsv(std::ostream& out, const NormStudyResult& result,
                      int window) {
  std::size_t length = 0;
  out << "episode";
  for (const NormCell& c : result.cells) {
    out << ',' << CellName(c);
    length = std::max(length, c.switch_series.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < length; ++i) {
    out << i + window - 1;
    for (const NormCell& c : result.cells) {
      out << ',';
      if (i < c.switch_series.size()) out << FormatDouble(c.switch_series[i]);
    }
    out << '\n';
  }
}

void WriteBufferDecayCsv(std::ostream& out, const BufferSweepResult& result) {
  out << "buffer_capacity,decay_factor,runs,converged,aborted,median_episode,"
         "min_episode\n";
  for (const BufferCell& c : result.cells) {
    out << c.buffer_capacity << ',' << FormatDouble(c.decay_factor) << ','
        << c.runs << ',' << c.converged << ',' << c.aborted << ','
        << FormatDouble(c.median_episode) << ','
        << FormatDouble(c.min_episode) << '\n';
  }
}

void WriteOracleCsv(std::ostream& out, const BimatrixOracleResult& result) {
  out << "offer_0,offer_1\n";
  for (const OfferVector& e : result.equilibria) {
    out << FormatDouble(e[0]) << ',' << FormatDouble(e[1]) << '\n';
  }
}

std::string CellName(const NormCell& cell) {
  return std::string(nn::ToString(cell.scheme)) + "_" +
         std::string(ToString(cell.memory));
}

void RenderLineSvg(const std::string& csv_path, const std::string& svg_path,
                   const std::string& title, int x_column,
                   const std::vector<int>& y_columns) {
  const CsvTable table = ReadNumericCsv(csv_path);
  const int cols = static_cast<int>(table.header.size());
  if (x_column < 0 || x_column >= cols) {
    throw ValidationError("x column out of range for '" + csv_path + "'");
  }
  std::vector<int> ys = y_columns;
  if (ys.empty()) {
    for (int c = 0; c < cols; ++c) {
      if (c != x_column) ys.push_back(c);
    }
  }
  double x_lo = HUGE_VAL, x_hi = -HUGE_VAL, y_lo = HUGE_VAL, y_hi = -HUGE_VAL;
  for (const auto& row : table.rows) {
    if (!std::isfinite(row[x_column])) continue;
    x_lo = std::min(x_lo, row[x_column]);
    x_hi = std::max(x_hi, row[x_column]);
    for (int c : ys) {
      if (c < 0 || c >= cols || !std::isfinite(row[c])) continue;
      y_lo = std::min(y_lo, row[c]);
      y_hi = std::max(y_hi, row[c]);
    }
  }
  if (!(x_lo < x_hi)) x_hi = x_lo + 1.0;
  if (!(y_lo < y_hi)) y_hi = y_lo + 1.0;
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;

  const double width = 720, height = 420, left = 60, right = 160, top = 40,
               bottom = 40;
  auto px = [&](double x) {
    return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right);
  };
  auto py = [&](double y) {
    return height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom);
  };

  WriteFile(svg_path, [&](std::ostream& out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
        << "font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">"
        << Escape(title) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\""
        << width - left - right << "\" height=\"" << height - top - bottom
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<text x=\"" << left << "\" y=\"" << height - 22 << "\">"
        << Short(x_lo) << "</text>\n";
    out << "<text x=\"" << width - right << "\" y=\"" << height - 22
        << "\" text-anchor=\"end\">" << Short(x_hi) << "</text>\n";
    out << "<text x=\"" << (left + width - right) / 2 << "\" y=\""
        << height - 8 << "\" text-anchor=\"middle\">"
        << Escape(table.header[x_column]) << "</text>\n";
    out << "<text x=\"" << left - 4 << "\" y=\"" << height - bottom
        << "\" text-anchor=\"end\">" << Short(y_lo) << "</text>\n";
    out << "<text x=\"" << left - 4 << "\" y=\"" << top + 10
        << "\" text-anchor=\"end\">" << Short(y_hi) << "</text>\n";
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const int c = ys[k];
      if (c < 0 || c >= cols) continue;
      const char* color = kPalette[k % std::size(kPalette)];
      out << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1\" points=\"";
      for (const auto& row : table.rows) {
        if (!std::isfinite(row[x_column]) || !std::isfinite(row[c])) continue;
        out << Short(px(row[x_column])) << ',' << Short(py(row[c])) << ' ';
      }
      out << "\"/>\n";
      out << "<text x=\"" << width - right + 10 << "\" y=\""
          << top + 14 * (k + 1) << "\" fill=\"" << color << "\">"
          << Escape(table.header[c]) << "</text>\n";
    }
    out << "</svg>\n";
  });
}

void RenderHeatmapSvg(const std::string& csv_path, const std::string& svg_path,
                      const std::string& title) {
  const CsvTable table = ReadNumericCsv(csv_path);
  if (table.header.size() < 3) {
    throw ValidationError("heatmap CSV needs three columns: '" + csv_path + "'");
  }
  std::map<double, int> xs, ys;
  for (const auto& row : table.rows) {
    xs.emplace(row[0], 0);
    ys.emplace(row[1], 0);
  }
  int i = 0;
  for (auto& [v, idx] : xs) idx = i++;
  i = 0;
  for (auto& [v, idx] : ys) idx = i++;
  const double cell = 36, left = 90, top = 50;
  const double width = left + cell * ys.size() + 40;
  const double height = top + cell * xs.size() + 60;

  WriteFile(svg_path, [&](std::ostream& out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
        << "font-size=\"9\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << Escape(title)
        << "</text>\n";
    for (const auto& row : table.rows) {
      const double v = std::isfinite(row[2]) ? std::clamp(row[2], 0.0, 1.0) : 0.0;
      const int red = static_cast<int>(std::lround(255 * v));
      const int blue = 255 - red;
      const double x = left + cell * ys.at(row[1]);
      const double y = top + cell * xs.at(row[0]);
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << red << ",64,"
          << blue << ")\"/>\n";
      out << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 3
          << "\" text-anchor=\"middle\" fill=\"white\">" << Short(row[2])
          << "</text>\n";
    }
    for (const auto& [v, idx] : xs) {
      out << "<text x=\"" << left - 4 << "\" y=\"" << top + cell * idx + cell / 2
          << "\" text-anchor=\"end\">" << Short(v) << "</text>\n";
    }
    for (const auto& [v, idx] : ys) {
      out << "<text x=\"" << left + cell * idx + cell / 2 << "\" y=\""
          << top + cell * xs.size() + 12 << "\" text-anchor=\"middle\">"
          << Short(v) << "</text>\n";
    }
    out << "<text x=\"10\" y=\"" << top - 6 << "\">" << Escape(table.header[0])
        << " (rows) vs " << Escape(table.header[1]) << " (columns)</text>\n";
    out << "</svg>\n";
  });
}

}  // namespace bidlearn
