/**
 * @file evaluation_test.cpp
 * @brief Tests for beat F-measure, chord reduction and scoring, Frechet
 * distance, and the end-to-end evaluation driver.
 */

#include "tempcondlm/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "tempcondlm/common.hpp"
#include "tempcondlm/datagen.hpp"

namespace tempcondlm {
namespace {

// -- beat_f1 ----------------------------------------------------------------

TEST(BeatF1, PerfectMatchScoresOne) {
  const std::vector<double> beats = {0.0, 0.5, 1.0, 1.5};
  EXPECT_DOUBLE_EQ(beat_f1(beats, beats), 1.0);
}

TEST(BeatF1, ShiftInsideToleranceStillPerfect) {
  const std::vector<double> ref = {0.0, 0.5, 1.0, 1.5};
  std::vector<double> est = ref;
  for (double& t : est) t += 0.06;  // inside the 70 ms window
  EXPECT_DOUBLE_EQ(beat_f1(ref, est), 1.0);
}

TEST(BeatF1, ShiftOutsideToleranceScoresZero) {
  const std::vector<double> ref = {0.0, 1.0, 2.0};
  const std::vector<double> est = {0.3, 1.3, 2.3};
  EXPECT_DOUBLE_EQ(beat_f1(ref, est), 0.0);
}

TEST(BeatF1, WorkedExampleFourSevenths) {
  // ref {0, 1, 2}; est {0.05, 1.2, 2.0, 2.5}: two matches.
  // precision 2/4, recall 2/3 -> F1 = 4/7.
  const double f1 = beat_f1({0.0, 1.0, 2.0}, {0.05, 1.2, 2.0, 2.5});
  EXPECT_NEAR(f1, 4.0 / 7.0, 1e-12);
}

TEST(BeatF1, EmptyCases) {
  EXPECT_DOUBLE_EQ(beat_f1({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(beat_f1({1.0}, {}), 0.0);
  EXPECT_DOUBLE_EQ(beat_f1({}, {1.0}), 0.0);
}

TEST(BeatF1, UnsortedInputThrows) {
  EXPECT_THROW(beat_f1({1.0, 0.5}, {0.0}), UnsortedInput);
  EXPECT_THROW(beat_f1({0.0}, {1.0, 0.5}), UnsortedInput);
}

TEST(BeatF1, OneToOneMatchingNoDoubleCounting) {
  // Two references near one estimate: only one can match.
  const double f1 = beat_f1({1.0, 1.05}, {1.02});
  // matches = 1, precision 1, recall 1/2 -> 2/3.
  EXPECT_NEAR(f1, 2.0 / 3.0, 1e-12);
}

TEST(BeatF1, MatchesQuadraticGreedyOracle) {
  // Oracle: same greedy rule (references in time order take the nearest
  // unmatched estimate inside the window) written as a plain quadratic scan.
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> ref, est;
    double t = 0;
    const int nr = 1 + static_cast<int>(rng.next_below(20));
    for (int i = 0; i < nr; ++i) {
      t += 0.05 + rng.next_double() * 0.4;
      ref.push_back(t);
    }
    t = 0;
    const int ne = 1 + static_cast<int>(rng.next_below(20));
    for (int i = 0; i < ne; ++i) {
      t += 0.05 + rng.next_double() * 0.4;
      est.push_back(t);
    }
    std::vector<bool> used(est.size(), false);
    int matches = 0;
    for (double r : ref) {
      int best = -1;
      double best_dist = kBeatToleranceSec + 1.0;
      for (std::size_t j = 0; j < est.size(); ++j) {
        if (used[j]) continue;
        const double d = std::abs(est[j] - r);
        if (d <= kBeatToleranceSec && d < best_dist) {
          best_dist = d;
          best = static_cast<int>(j);
        }
      }
      if (best >= 0) {
        used[best] = true;
        ++matches;
      }
    }
    const double p = static_cast<double>(matches) / est.size();
    const double rr = static_cast<double>(matches) / ref.size();
    const double expected = (p + rr) == 0 ? 0.0 : 2 * p * rr / (p + rr);
    ASSERT_NEAR(beat_f1(ref, est), expected, 1e-12) << "trial " << trial;
  }
}

// -- reduce_chord / chord_score ---------------------------------------------

TEST(ReduceChord, MajminFoldsSeventhsSkipsOthers) {
  const auto red = [](const char* s) {
    return reduce_chord(parse_chord_symbol(s), ChordLevel::kMajmin);
  };
  EXPECT_EQ(red("C:maj7")->quality, ChordQuality::kMaj);
  EXPECT_EQ(red("C:dom7")->quality, ChordQuality::kMaj);
  EXPECT_EQ(red("C:min7")->quality, ChordQuality::kMin);
  EXPECT_EQ(red("C:minmaj7")->quality, ChordQuality::kMin);
  EXPECT_FALSE(red("C:dim").has_value());
  EXPECT_FALSE(red("C:sus4").has_value());
  EXPECT_TRUE(red("N")->no_chord);
}

TEST(ReduceChord, TriadsStripSeventhsKeepTriadTypes) {
  const auto red = [](const char* s) {
    return reduce_chord(parse_chord_symbol(s), ChordLevel::kTriads);
  };
  EXPECT_EQ(red("D:maj7")->quality, ChordQuality::kMaj);
  EXPECT_EQ(red("D:dim7")->quality, ChordQuality::kDim);
  EXPECT_EQ(red("D:hdim7")->quality, ChordQuality::kDim);
  EXPECT_EQ(red("D:sus4")->quality, ChordQuality::kSus4);
  EXPECT_EQ(red("D:aug")->quality, ChordQuality::kAug);
  EXPECT_EQ(red("D:maj7")->root, 2);
}

TEST(ReduceChord, TetradsAreIdentity) {
  for (const char* s : {"C:maj7", "F#:hdim7", "A:sus2", "B:minmaj7"}) {
    const auto r = reduce_chord(parse_chord_symbol(s), ChordLevel::kTetrads);
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->quality, parse_chord_symbol(s).quality);
    EXPECT_EQ(r->root, parse_chord_symbol(s).root);
  }
}

TEST(ChordScore, MatchesNaiveOracle) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ChordSymbol> ref, est;
    const int n = 1 + static_cast<int>(rng.next_below(40));
    for (int i = 0; i < n; ++i) {
      const auto mk = [&] {
        if (rng.next_below(8) == 0) return ChordSymbol::no_chord();
        return ChordSymbol::make(static_cast<int>(rng.next_below(12)),
                                 static_cast<ChordQuality>(rng.next_below(12)));
      };
      ref.push_back(mk());
      est.push_back(mk());
    }
    for (ChordLevel level : {ChordLevel::kMajmin, ChordLevel::kTriads,
                             ChordLevel::kTetrads}) {
      long scored = 0, correct = 0;
      for (int i = 0; i < n; ++i) {
        const auto r = reduce_chord(ref[i], level);
        if (!r) continue;
        ++scored;
        const auto e = reduce_chord(est[i], level);
        if (e && *e == *r) ++correct;
      }
      const double expected =
          scored == 0 ? kScoreUndefined
                      : static_cast<double>(correct) / scored;
      ASSERT_NEAR(chord_score(ref, est, level), expected, 1e-12);
    }
  }
}

TEST(ChordScore, IdenticalSequencesScoreOne) {
  std::vector<ChordSymbol> seq = {parse_chord_symbol("C:maj"),
                                  parse_chord_symbol("A:min7"),
                                  ChordSymbol::no_chord()};
  EXPECT_DOUBLE_EQ(chord_score(seq, seq, ChordLevel::kMajmin), 1.0);
  EXPECT_DOUBLE_EQ(chord_score(seq, seq, ChordLevel::kTetrads), 1.0);
}

TEST(ChordScore, AllSkipFramesGiveUndefinedSentinel) {
  std::vector<ChordSymbol> ref = {parse_chord_symbol("C:dim"),
                                  parse_chord_symbol("D:sus2")};
  std::vector<ChordSymbol> est = ref;
  EXPECT_DOUBLE_EQ(chord_score(ref, est, ChordLevel::kMajmin),
                   kScoreUndefined);
  EXPECT_DOUBLE_EQ(chord_score(ref, est, ChordLevel::kTriads), 1.0);
}

TEST(ChordScore, ValidityMaskForcesMismatches) {
  std::vector<ChordSymbol> seq = {parse_chord_symbol("C:maj"),
                                  parse_chord_symbol("A:min")};
  EXPECT_DOUBLE_EQ(chord_score(seq, seq, ChordLevel::kMajmin, {1, 0}), 0.5);
  EXPECT_DOUBLE_EQ(chord_score(seq, seq, ChordLevel::kMajmin, {0, 0}), 0.0);
  EXPECT_THROW(chord_score(seq, seq, ChordLevel::kMajmin, {1}),
               LengthMismatch);
}

TEST(ChordScore, LengthMismatchThrows) {
  std::vector<ChordSymbol> a(3), b(2);
  EXPECT_THROW(chord_score(a, b, ChordLevel::kMajmin), LengthMismatch);
}

// -- frechet_distance -------------------------------------------------------

std::vector<std::vector<double>> gaussian_cloud(int n, int d, double mean,
                                                double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  for (auto& row : out)
    for (auto& v : row) v = mean + sd * rng.next_gaussian();
  return out;
}

TEST(FrechetDistance, IdenticalSetIsNearZero) {
  const auto a = gaussian_cloud(500, 4, 0.0, 1.0, 1);
  EXPECT_LE(frechet_distance(a, a), 1e-6);
}

TEST(FrechetDistance, UnitMeanShiftOneDimensional) {
  // N(0,1) vs N(1,1): analytic distance is exactly 1.
  const auto a = gaussian_cloud(100000, 1, 0.0, 1.0, 2);
  const auto b = gaussian_cloud(100000, 1, 1.0, 1.0, 3);
  EXPECT_NEAR(frechet_distance(a, b), 1.0, 0.05);
}

TEST(FrechetDistance, VarianceGapOneDimensional) {
  // N(0,1) vs N(0,4): distance = (1-2)^2 = 1.
  const auto a = gaussian_cloud(100000, 1, 0.0, 1.0, 4);
  const auto b = gaussian_cloud(100000, 1, 0.0, 2.0, 5);
  EXPECT_NEAR(frechet_distance(a, b), 1.0, 0.07);
}

TEST(FrechetDistance, SymmetricAndNonNegative) {
  const auto a = gaussian_cloud(400, 3, 0.0, 1.0, 6);
  const auto b = gaussian_cloud(300, 3, 0.5, 1.5, 7);
  const double ab = frechet_distance(a, b);
  const double ba = frechet_distance(b, a);
  EXPECT_NEAR(ab, ba, 1e-8);
  EXPECT_GT(ab, 0.0);
}

TEST(FrechetDistance, InvariantUnderCommonRotation) {
  const auto a = gaussian_cloud(600, 2, 0.0, 1.0, 8);
  const auto b = gaussian_cloud(600, 2, 1.0, 0.5, 9);
  const double base = frechet_distance(a, b);
  const double th = 0.7;
  auto rotate = [&](std::vector<std::vector<double>> s) {
    for (auto& v : s) {
      const double x = v[0] * std::cos(th) - v[1] * std::sin(th);
      const double y = v[0] * std::sin(th) + v[1] * std::cos(th);
      v = {x, y};
    }
    return s;
  };
  EXPECT_NEAR(frechet_distance(rotate(a), rotate(b)), base, 1e-8);
}

TEST(FrechetDistance, EmptySetThrows) {
  const auto a = gaussian_cloud(5, 2, 0.0, 1.0, 10);
  EXPECT_THROW(frechet_distance({}, a), DegenerateSet);
  EXPECT_THROW(frechet_distance(a, {}), DegenerateSet);
}

// -- grid_embedding / evaluate_run ------------------------------------------

TEST(GridEmbedding, MatchesNaiveMean) {
  ModelConfig cfg;
  cfg.L = 4;
  cfg.D = 8;
  cfg.heads = 2;
  cfg.K = 2;
  cfg.N = 6;
  Model<double> model(cfg);
  model.init_weights(11);
  TokenGrid grid(5, 2, 6);
  Rng rng(12);
  for (auto& v : grid.tokens) v = static_cast<int>(rng.next_below(7));
  const auto emb = grid_embedding(model, grid);
  ASSERT_EQ(static_cast<int>(emb.size()), cfg.D);
  for (int c = 0; c < cfg.D; ++c) {
    double expected = 0;
    for (int t = 0; t < 5; ++t)
      for (int k = 0; k < 2; ++k)
        expected += model.tok_emb[k].value.at(grid.at(t, k), c);
    EXPECT_NEAR(emb[c], expected / 5.0, 1e-12);
  }
}

TEST(EvaluateRun, DeterministicAndWellFormed) {
  ToyCodecSpec codec;
  codec.N = 64;
  codec.K = 2;
  codec.f_s = 50.0;
  codec.chord_code_width = 3;
  codec.beat_code_width = 2;
  codec.genre_code_width = 1;
  codec.chord_vocab = {parse_chord_symbol("C:maj"),
                       parse_chord_symbol("A:min"),
                       parse_chord_symbol("F:maj"),
                       parse_chord_symbol("G:dom7")};
  DataGenConfig dg;
  dg.n_clips = 3;
  dg.clip_seconds = 1.0;
  dg.n_genres = 2;
  dg.seed = 13;
  dg.codec = codec;
  const ClipDataset ds = generate_dataset(dg);

  ModelConfig mc;
  mc.L = 4;
  mc.D = 16;
  mc.heads = 2;
  mc.K = 2;
  mc.N = 64;
  mc.n_genres = 2;
  mc.max_frames = 64;
  Model<double> model(mc);
  model.init_weights(14);

  const MetricsReport r1 = evaluate_run(model, ds, 3.0, 21);
  const MetricsReport r2 = evaluate_run(model, ds, 3.0, 21);
  EXPECT_EQ(r1.beat_f1, r2.beat_f1);
  EXPECT_EQ(r1.majmin, r2.majmin);
  EXPECT_EQ(r1.frechet, r2.frechet);
  ASSERT_EQ(r1.clips.size(), 3u);
  EXPECT_GE(r1.beat_f1, 0.0);
  EXPECT_LE(r1.beat_f1, 1.0);
  EXPECT_GE(r1.frechet, -1e-9);
  const auto j = metrics_report_to_json(r1);
  EXPECT_TRUE(j.contains("beat_f1"));
  EXPECT_EQ(j.at("clips").size(), 3u);
}

}  // namespace
}  // namespace tempcondlm
