// Copyright 2026 The Neurotalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "neurotalk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace neurotalk::metrics {

EditCounts edit_distance(const std::vector<std::string>& ref,
                         const std::vector<std::string>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  // cell: cost plus the op counts of one optimal path
  struct Cell {
    size_t cost, s, i, d;
  };
  std::vector<Cell> dp((n + 1) * (m + 1));
  auto at = [&](size_t r, size_t c) -> Cell& { return dp[r * (m + 1) + c]; };
  at(0, 0) = {0, 0, 0, 0};
  for (size_t c = 1; c <= m; ++c) at(0, c) = {c, 0, c, 0};
  for (size_t r = 1; r <= n; ++r) at(r, 0) = {r, 0, 0, r};
  for (size_t r = 1; r <= n; ++r) {
    for (size_t c = 1; c <= m; ++c) {
      const bool match = ref[r - 1] == hyp[c - 1];
      Cell diag = at(r - 1, c - 1);
      diag.cost += match ? 0 : 1;
      if (!match) ++diag.s;
      Cell del = at(r - 1, c);
      ++del.cost;
      ++del.d;
      Cell ins = at(r, c - 1);
      ++ins.cost;
      ++ins.i;
      Cell best = diag;
      if (del.cost < best.cost) best = del;
      if (ins.cost < best.cost) best = ins;
      at(r, c) = best;
    }
  }
  const Cell& out = at(n, m);
  return {out.cost, out.s, out.i, out.d};
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::vector<std::string> split_chars(const std::string& s) {
  std::vector<std::string> out;
  out.reserve(s.size());
  for (char c : s) out.emplace_back(1, c);
  return out;
}

static double rate_of(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  if (ref.empty()) throw ConfigError("error rate: empty reference");
  return static_cast<double>(edit_distance(ref, hyp).distance) / static_cast<double>(ref.size());
}

double wer(const std::string& ref, const std::string& hyp) {
  return rate_of(split_words(ref), split_words(hyp));
}

double cer(const std::string& ref, const std::string& hyp) {
  return rate_of(split_chars(ref), split_chars(hyp));
}

double rmse(const dsp::FeatureSequence& a, const dsp::FeatureSequence& b) {
  if (a.dim != b.dim || a.num_frames() != b.num_frames())
    throw ShapeError("rmse: feature shapes differ");
  if (a.frames.empty()) throw ConfigError("rmse: empty sequences");
  double acc = 0.0;
  for (size_t i = 0; i < a.frames.size(); ++i) {
    const double d = a.frames[i] - b.frames[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.frames.size()));
}

double normalized_rmse(const dsp::FeatureSequence& pred, const dsp::FeatureSequence& ref) {
  const auto [mn, mx] = std::minmax_element(ref.frames.begin(), ref.frames.end());
  const double range = *mx - *mn;
  if (range <= 0.0) throw NumericError("normalized_rmse: constant reference");
  return rmse(pred, ref) / range;
}

double mcd(const dsp::FeatureSequence& a, const dsp::FeatureSequence& b) {
  if (a.dim != 13 || b.dim != 13) throw ShapeError("mcd: expects 13-dim MFCC frames");
  if (a.num_frames() != b.num_frames()) throw ShapeError("mcd: frame counts differ");
  if (a.num_frames() == 0) throw ConfigError("mcd: empty sequences");
  constexpr double kScale = 10.0 / 2.302585092994046;  // 10 / ln 10
  double acc = 0.0;
  for (size_t t = 0; t < a.num_frames(); ++t) {
    double sq = 0.0;
    for (size_t d = 1; d < 13; ++d) {
      const double diff = a.frame(t)[d] - b.frame(t)[d];
      sq += diff * diff;
    }
    acc += kScale * std::sqrt(2.0 * sq);
  }
  return acc / static_cast<double>(a.num_frames());
}

AsrReport evaluate_asr(const std::vector<AsrEvalInput>& pairs, bool word_level) {
  AsrReport report;
  for (const auto& p : pairs) {
    const auto ref = word_level ? split_words(p.reference) : split_chars(p.reference);
    const auto hyp = word_level ? split_words(p.hypothesis) : split_chars(p.hypothesis);
    if (ref.empty()) throw ConfigError("evaluate_asr: empty reference for " + p.utt_id);
    AsrEvalRow row;
    row.utt_id = p.utt_id;
    row.counts = edit_distance(ref, hyp);
    row.ref_len = ref.size();
    row.rate = static_cast<double>(row.counts.distance) / static_cast<double>(ref.size());
    report.total.distance += row.counts.distance;
    report.total.substitutions += row.counts.substitutions;
    report.total.insertions += row.counts.insertions;
    report.total.deletions += row.counts.deletions;
    report.total_ref_len += row.ref_len;
    report.rows.push_back(std::move(row));
  }
  report.aggregate_rate = report.total_ref_len == 0
                              ? 0.0
                              : static_cast<double>(report.total.distance) /
                                    static_cast<double>(report.total_ref_len);
  return report;
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void write_asr_report_csv(const AsrReport& report, const std::string& metric_name,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write report: " + path);
  os << "utt_id," << metric_name << ",distance,substitutions,insertions,deletions,ref_len\n";
  for (const auto& r : report.rows)
    os << r.utt_id << ',' << fmt(r.rate) << ',' << r.counts.distance << ','
       << r.counts.substitutions << ',' << r.counts.insertions << ',' << r.counts.deletions << ','
       << r.ref_len << '\n';
  os << "aggregate," << fmt(report.aggregate_rate) << ',' << report.total.distance << ','
     << report.total.substitutions << ',' << report.total.insertions << ','
     << report.total.deletions << ',' << report.total_ref_len << '\n';
}

SynthReport summarize_synth(std::vector<SynthEvalRow> rows) {
  SynthReport report;
  report.rows = std::move(rows);
  if (report.rows.empty()) return report;
  for (const auto& r : report.rows) {
    report.avg_rmse += r.rmse;
    report.avg_nrmse += r.nrmse;
    report.avg_mcd += r.mcd;
  }
  const double n = static_cast<double>(report.rows.size());
  report.avg_rmse /= n;
  report.avg_nrmse /= n;
  report.avg_mcd /= n;
  return report;
}

void write_synth_report_csv(const SynthReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write report: " + path);
  os << "utt_id,rmse,normalized_rmse,mcd\n";
  for (const auto& r : report.rows)
    os << r.utt_id << ',' << fmt(r.rmse) << ',' << fmt(r.nrmse) << ',' << fmt(r.mcd) << '\n';
  os << "aggregate," << fmt(report.avg_rmse) << ',' << fmt(report.avg_nrmse) << ','
     << fmt(report.avg_mcd) << '\n';
}

}  // namespace neurotalk::metrics
