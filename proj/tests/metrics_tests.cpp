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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "neurotalk/metrics.hpp"
#include "test_support.hpp"

using namespace neurotalk;
using namespace neurotalk::metrics;

namespace {

// independent DP oracle: plain cost matrix, no op counts
size_t lev_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<size_t>> d(a.size() + 1, std::vector<size_t>(b.size() + 1, 0));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (size_t i = 1; i <= a.size(); ++i)
    for (size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

dsp::FeatureSequence seq(size_t dim, std::vector<double> frames) {
  dsp::FeatureSequence f;
  f.dim = dim;
  f.frames = std::move(frames);
  return f;
}

std::vector<std::string> rand_tokens(Rng& rng, size_t max_len) {
  std::vector<std::string> out;
  const size_t n = rng.below(max_len + 1);
  for (size_t i = 0; i < n; ++i) out.emplace_back(1, static_cast<char>('a' + rng.below(3)));
  return out;
}

}  // namespace

TEST_CASE("edit distance basics and operation counts") {
  CHECK(edit_distance({"a", "b"}, {"a", "b"}).distance == 0);

  auto r = edit_distance({"a", "b", "c"}, {"a", "x", "c"});
  CHECK(r.distance == 1);
  CHECK(r.substitutions == 1);
  CHECK(r.insertions == 0);
  CHECK(r.deletions == 0);

  auto del = edit_distance({"a", "b", "c"}, {});
  CHECK(del.distance == 3);
  CHECK(del.deletions == 3);
}

TEST_CASE("edit distance equals the independent DP oracle on seeded pairs") {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    auto a = rand_tokens(rng, 6);
    auto b = rand_tokens(rng, 6);
    auto r = edit_distance(a, b);
    CHECK(r.distance == lev_oracle(a, b));
    CHECK(r.substitutions + r.insertions + r.deletions == r.distance);
  }
}

TEST_CASE("edit distance triangle inequality on seeded triples") {
  Rng rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    auto a = rand_tokens(rng, 5);
    auto b = rand_tokens(rng, 5);
    auto c = rand_tokens(rng, 5);
    CHECK(edit_distance(a, c).distance <=
          edit_distance(a, b).distance + edit_distance(b, c).distance);
  }
}

TEST_CASE("wer and cer rates") {
  CHECK(wer("the dog ran", "the dog ran") == 0.0);
  // 4 ref words, 2 substitutions + 1 insertion
  CHECK(wer("a b c d", "a x y d e") == doctest::Approx(0.75));
  CHECK(wer("a b c", "") == doctest::Approx(1.0));
  CHECK_THROWS_AS(wer("", "something"), ConfigError);

  CHECK(cer("ab", "ab") == 0.0);
  CHECK(cer("abc", "axc") == doctest::Approx(1.0 / 3.0));
  // wer can exceed 1
  CHECK(wer("a", "x y z") > 1.0);
}

TEST_CASE("rmse basics and scalar oracle") {
  auto a = seq(2, {1, 2, 3, 4});
  CHECK(rmse(a, a) == 0.0);

  auto b = seq(2, {1.5, 2.5, 3.5, 4.5});
  CHECK(rmse(a, b) == doctest::Approx(0.5));

  Rng rng(3);
  std::vector<double> xs(12), ys(12);
  for (auto& v : xs) v = rng.uniform(-2, 2);
  for (auto& v : ys) v = rng.uniform(-2, 2);
  double acc = 0.0;
  for (size_t i = 0; i < 12; ++i) acc += (xs[i] - ys[i]) * (xs[i] - ys[i]);
  CHECK(rmse(seq(3, xs), seq(3, ys)) == doctest::Approx(std::sqrt(acc / 12.0)).epsilon(1e-12));

  CHECK_THROWS_AS(rmse(seq(2, {1, 2}), seq(3, {1, 2, 3})), ShapeError);
}

TEST_CASE("normalized rmse: zero, scale invariance, degenerate reference") {
  auto a = seq(1, {1, 2, 3});
  CHECK(normalized_rmse(a, a) == 0.0);

  auto pred = seq(1, {1.2, 2.1, 2.7});
  auto ref = seq(1, {1, 2, 3});
  const double base = normalized_rmse(pred, ref);
  auto pred_s = seq(1, {1.2 * 7, 2.1 * 7, 2.7 * 7});
  auto ref_s = seq(1, {7, 14, 21});
  CHECK(normalized_rmse(pred_s, ref_s) == doctest::Approx(base).epsilon(1e-12));

  CHECK_THROWS_AS(normalized_rmse(a, seq(1, {2, 2, 2})), NumericError);
}

TEST_CASE("mcd: identity, closed form, c0 exclusion, symmetry") {
  dsp::FeatureSequence a = seq(13, std::vector<double>(13, 0.0));
  CHECK(mcd(a, a) == 0.0);

  dsp::FeatureSequence b = a;
  b.frames[1] = 1.0;  // only d=1 differs by 1
  const double v = mcd(a, b);
  CHECK(v == doctest::Approx(6.1421).epsilon(1e-3 / 6.1421));
  CHECK(v == doctest::Approx((10.0 / std::log(10.0)) * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(mcd(b, a) == doctest::Approx(v));

  dsp::FeatureSequence c = a;
  c.frames[0] = 42.0;  // c0-only difference is ignored
  CHECK(mcd(a, c) == 0.0);

  dsp::FeatureSequence twoframes = seq(13, std::vector<double>(26, 0.0));
  CHECK_THROWS_AS(mcd(a, twoframes), ShapeError);
}

TEST_CASE("aggregate rate pools edit counts rather than averaging rates") {
  std::vector<AsrEvalInput> pairs = {
      {"u1", "a b c d e f g h i j", "a b c d e f g h i j"},  // 0/10
      {"u2", "x y", "p q"},                                  // 2/2
  };
  AsrReport r = evaluate_asr(pairs, true);
  // mean of rates would be 0.5; pooled is 2/12
  CHECK(r.aggregate_rate == doctest::Approx(2.0 / 12.0));
  CHECK(r.rows.size() == 2);
  CHECK(r.rows[0].rate == 0.0);
  CHECK(r.rows[1].rate == doctest::Approx(1.0));
}

TEST_CASE("asr report csv puts the aggregate row last") {
  std::vector<AsrEvalInput> pairs = {{"u1", "ab", "ab"}, {"u2", "cd", "ce"}};
  AsrReport r = evaluate_asr(pairs, false);
  write_asr_report_csv(r, "cer", "report_test.csv");
  std::ifstream is("report_test.csv");
  std::string line, last;
  std::getline(is, line);
  CHECK(line == "utt_id,cer,distance,substitutions,insertions,deletions,ref_len");
  while (std::getline(is, line))
    if (!line.empty()) last = line;
  is.close();
  std::remove("report_test.csv");
  CHECK(last.rfind("aggregate,", 0) == 0);
}

TEST_CASE("synth report averages") {
  SynthReport r = summarize_synth({{"a", 1.0, 0.1, 2.0}, {"b", 3.0, 0.3, 4.0}});
  CHECK(r.avg_rmse == doctest::Approx(2.0));
  CHECK(r.avg_nrmse == doctest::Approx(0.2));
  CHECK(r.avg_mcd == doctest::Approx(3.0));
}
