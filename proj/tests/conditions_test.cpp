/**
 * @file conditions_test.cpp
 * @brief Tests for chord parsing, chromagram rendering, beat grids, and the
 * soft rhythm kernel.
 */

#include "tempcondlm/conditions.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "tempcondlm/chords.hpp"
#include "tempcondlm/common.hpp"

namespace tempcondlm {
namespace {

std::set<int> active_pcs(const double* row) {
  std::set<int> out;
  for (int i = 0; i < 12; ++i)
    if (row[i] > 0.5) out.insert(i);
  return out;
}

// -- parse_chord_symbol -----------------------------------------------------

TEST(ParseChordSymbol, BasicMajor) {
  const ChordSymbol s = parse_chord_symbol("C:maj");
  EXPECT_EQ(s.root, 0);
  EXPECT_EQ(s.quality, ChordQuality::kMaj);
}

TEST(ParseChordSymbol, EnharmonicFlat) {
  const ChordSymbol s = parse_chord_symbol("Db:min7");
  EXPECT_EQ(s.root, 1);
  EXPECT_EQ(s.quality, ChordQuality::kMin7);
  EXPECT_EQ(parse_chord_symbol("C#:min7"), s);
}

TEST(ParseChordSymbol, NoChordSentinel) {
  EXPECT_TRUE(parse_chord_symbol("N").is_no_chord());
}

TEST(ParseChordSymbol, QualityDefaultsToMaj) {
  EXPECT_EQ(parse_chord_symbol("G"), parse_chord_symbol("G:maj"));
}

TEST(ParseChordSymbol, RejectsUnknownRootAndQuality) {
  EXPECT_THROW(parse_chord_symbol("H:maj"), MalformedChord);
  EXPECT_THROW(parse_chord_symbol("C:maj9"), MalformedChord);
  EXPECT_THROW(parse_chord_symbol("C-maj"), MalformedChord);
  EXPECT_THROW(parse_chord_symbol(""), MalformedChord);
}

TEST(ParseChordSymbol, FormatRoundTripIsIdentityOnCanonicalSpelling) {
  for (int root = 0; root < 12; ++root) {
    for (int q = 0; q < kNumChordQualities; ++q) {
      const ChordSymbol s = ChordSymbol::make(root, static_cast<ChordQuality>(q));
      const std::string text = format_chord_symbol(s);
      EXPECT_EQ(parse_chord_symbol(text), s) << text;
      EXPECT_EQ(format_chord_symbol(parse_chord_symbol(text)), text);
    }
  }
  EXPECT_EQ(format_chord_symbol(parse_chord_symbol("N")), "N");
}

// -- chord_to_pitch_classes -------------------------------------------------

TEST(ChordToPitchClasses, CMajTriad) {
  const auto v = chord_to_pitch_classes(parse_chord_symbol("C:maj"));
  EXPECT_EQ(active_pcs(v.data()), (std::set<int>{0, 4, 7}));
}

TEST(ChordToPitchClasses, AMin7Tetrad) {
  const auto v = chord_to_pitch_classes(parse_chord_symbol("A:min7"));
  EXPECT_EQ(active_pcs(v.data()), (std::set<int>{9, 0, 4, 7}));
}

TEST(ChordToPitchClasses, NoChordAllZero) {
  const auto v = chord_to_pitch_classes(ChordSymbol::no_chord());
  EXPECT_TRUE(std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
}

TEST(ChordToPitchClasses, CardinalityThreeOrFour) {
  for (int root = 0; root < 12; ++root) {
    for (int q = 0; q < kNumChordQualities; ++q) {
      const auto v = chord_to_pitch_classes(
          ChordSymbol::make(root, static_cast<ChordQuality>(q)));
      const auto n = std::count(v.begin(), v.end(), 1.0);
      EXPECT_TRUE(n == 3 || n == 4);
    }
  }
}

// -- render_chromagram ------------------------------------------------------

TEST(RenderChromagram, ConstantSpan) {
  ChordTrack track;
  track.duration_sec = 2.0;
  track.spans.push_back({0.0, 2.0, parse_chord_symbol("C:maj")});
  const auto m = render_chromagram(track, 50.0, 100);
  ASSERT_EQ(m.rows, 100);
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(active_pcs(m.row(i)), (std::set<int>{0, 4, 7})) << i;
}

TEST(RenderChromagram, BoundaryAtFrameCenterRule) {
  ChordTrack track;
  track.duration_sec = 2.0;
  track.spans.push_back({0.0, 1.0, parse_chord_symbol("C:maj")});
  track.spans.push_back({1.0, 2.0, parse_chord_symbol("G:maj")});
  const auto m = render_chromagram(track, 50.0, 100);
  EXPECT_EQ(active_pcs(m.row(49)), (std::set<int>{0, 4, 7}));
  EXPECT_EQ(active_pcs(m.row(50)), (std::set<int>{7, 11, 2}));
}

TEST(RenderChromagram, GapsRenderAsNoChord) {
  ChordTrack track;
  track.duration_sec = 3.0;
  track.spans.push_back({0.0, 1.0, parse_chord_symbol("C:maj")});
  track.spans.push_back({2.0, 3.0, parse_chord_symbol("D:min")});
  const auto m = render_chromagram(track, 10.0, 30);
  EXPECT_TRUE(active_pcs(m.row(15)).empty());
}

TEST(RenderChromagram, EmptyTrackThrows) {
  ChordTrack track;
  EXPECT_THROW(render_chromagram(track, 50.0, 0), EmptyTrack);
}

TEST(RenderChromagram, MatchesBruteForceSpanLookup) {
  // Oracle: for every frame center, linear scan over all spans.
  Rng rng(42);
  ChordTrack track;
  track.duration_sec = 12.0;
  double cur = 0.0;
  while (cur < 12.0) {
    const double len = 0.3 + rng.next_double() * 1.5;
    ChordSpan span;
    span.start_sec = cur;
    span.end_sec = std::min(cur + len, 12.0);
    span.symbol = ChordSymbol::make(static_cast<int>(rng.next_below(12)),
                                    static_cast<ChordQuality>(rng.next_below(12)));
    track.spans.push_back(span);
    cur = span.end_sec + (rng.next_double() < 0.2 ? 0.25 : 0.0);
  }
  const int n = 600;
  const auto m = render_chromagram(track, 50.0, n);
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / 50.0;
    std::array<double, 12> expected{};
    for (const auto& span : track.spans) {
      if (span.start_sec <= t && t < span.end_sec) {
        expected = chord_to_pitch_classes(span.symbol);
        break;
      }
    }
    for (int c = 0; c < 12; ++c) EXPECT_EQ(m.at(i, c), expected[c]);
  }
}

TEST(RenderChromagram, RowSumsAreZeroThreeOrFour) {
  ChordTrack track;
  track.duration_sec = 4.0;
  track.spans.push_back({0.0, 1.0, parse_chord_symbol("C:maj")});
  track.spans.push_back({1.0, 2.0, parse_chord_symbol("A:min7")});
  track.spans.push_back({3.0, 4.0, ChordSymbol::no_chord()});
  const auto m = render_chromagram(track, 50.0, 200);
  for (int i = 0; i < m.rows; ++i) {
    double sum = 0;
    for (int c = 0; c < 12; ++c) sum += m.at(i, c);
    EXPECT_TRUE(sum == 0 || sum == 3 || sum == 4) << "row " << i;
  }
}

// -- beats_from_bpm ---------------------------------------------------------

TEST(BeatsFromBpm, Basic44) {
  const BeatGrid g = beats_from_bpm(120.0, 4, 2.0);
  EXPECT_EQ(g.beat_times, (std::vector<double>{0.0, 0.5, 1.0, 1.5}));
  EXPECT_EQ(g.downbeat_times, (std::vector<double>{0.0}));
}

TEST(BeatsFromBpm, ThreeFour) {
  const BeatGrid g = beats_from_bpm(60.0, 3, 3.1);
  EXPECT_EQ(g.beat_times, (std::vector<double>{0.0, 1.0, 2.0, 3.0}));
  EXPECT_EQ(g.downbeat_times, (std::vector<double>{0.0, 3.0}));
}

TEST(BeatsFromBpm, CountsMatchEnumerationOracle) {
  const BeatGrid g = beats_from_bpm(90.0, 4, 30.0, 0.2);
  // Oracle: count k with 0.2 + k * (60/90) < 30.
  int beats = 0, downs = 0;
  for (int k = 0;; ++k) {
    if (0.2 + k * (60.0 / 90.0) >= 30.0) break;
    ++beats;
    if (k % 4 == 0) ++downs;
  }
  EXPECT_EQ(static_cast<int>(g.beat_times.size()), beats);
  EXPECT_EQ(static_cast<int>(g.downbeat_times.size()), downs);
  EXPECT_EQ(beats, 45);
  EXPECT_EQ(downs, 12);
}

TEST(BeatsFromBpm, InvalidTempoThrows) {
  EXPECT_THROW(beats_from_bpm(0.0, 4, 10.0), InvalidTempo);
  EXPECT_THROW(beats_from_bpm(-5.0, 4, 10.0), InvalidTempo);
}

TEST(BeatsFromBpm, DownbeatsAreSubsetOfBeats) {
  const BeatGrid g = beats_from_bpm(137.3, 4, 25.0, 0.11);
  for (double d : g.downbeat_times) {
    EXPECT_TRUE(std::any_of(g.beat_times.begin(), g.beat_times.end(),
                            [d](double b) { return std::abs(b - d) < 1e-6; }));
  }
}

// -- soften_beats -----------------------------------------------------------

TEST(SoftenBeats, KernelShapeAroundSingleBeat) {
  const auto v = soften_beats({1.0}, 50.0, 100);
  EXPECT_DOUBLE_EQ(v[50], 1.0);
  EXPECT_DOUBLE_EQ(v[49], 0.75);
  EXPECT_DOUBLE_EQ(v[51], 0.75);
  EXPECT_DOUBLE_EQ(v[48], 0.5);
  EXPECT_DOUBLE_EQ(v[47], 0.25);
  EXPECT_DOUBLE_EQ(v[53], 0.25);
  EXPECT_DOUBLE_EQ(v[46], 0.0);
  EXPECT_DOUBLE_EQ(v[54], 0.0);
}

TEST(SoftenBeats, EmptyListIsAllZero) {
  const auto v = soften_beats({}, 50.0, 64);
  EXPECT_TRUE(std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
}

TEST(SoftenBeats, OverlapCombinesByMaxAndStaysBounded) {
  // Two beats 40 ms apart; oracle stamps kernels independently and maxes.
  const std::vector<double> beats = {1.0, 1.04};
  const auto v = soften_beats(beats, 50.0, 100);
  std::vector<double> oracle(100, 0.0);
  for (double b : beats) {
    const int center = static_cast<int>(std::lround(b * 50.0));
    for (int d = -3; d <= 3; ++d) {
      const int f = center + d;
      if (f < 0 || f >= 100) continue;
      oracle[f] = std::max(oracle[f], kBeatKernel[d + 3]);
    }
  }
  for (int i = 0; i < 100; ++i) {
    EXPECT_DOUBLE_EQ(v[i], oracle[i]) << i;
    EXPECT_LE(v[i], 1.0);
  }
}

TEST(SoftenBeats, PermutationInvariant) {
  const std::vector<double> a = {0.2, 0.6, 1.0, 1.35};
  std::vector<double> b = {1.35, 0.6, 0.2, 1.0};
  EXPECT_EQ(soften_beats(a, 50.0, 100), soften_beats(b, 50.0, 100));
}

TEST(SoftenBeats, OutOfRangeThrows) {
  EXPECT_THROW(soften_beats({2.5}, 50.0, 100), BeatOutOfRange);
  EXPECT_THROW(soften_beats({-0.1}, 50.0, 100), BeatOutOfRange);
}

// -- build_condition_bundle -------------------------------------------------

TEST(BuildConditionBundle, ShapesFromClipDuration) {
  ChordTrack track;
  track.duration_sec = 10.0;
  track.spans.push_back({0.0, 10.0, parse_chord_symbol("C:maj")});
  const BeatGrid grid = beats_from_bpm(120.0, 4, 10.0);
  const ConditionBundle b = build_condition_bundle(track, grid, 0, 5.0, 50.0);
  EXPECT_EQ(b.c_pre.frames.rows, 50);
  EXPECT_EQ(b.c_sum.frames.rows, 500);
  EXPECT_EQ(b.r.frames.size(), 500u);
}

TEST(BuildConditionBundle, DownbeatFrameSumsToTwo) {
  ChordTrack track;
  track.duration_sec = 4.0;
  track.spans.push_back({0.0, 4.0, parse_chord_symbol("C:maj")});
  const BeatGrid grid = beats_from_bpm(120.0, 4, 4.0, 0.0);
  const ConditionBundle b = build_condition_bundle(track, grid, 0, 5.0, 50.0);
  EXPECT_DOUBLE_EQ(b.r.frames[0], 2.0);    // downbeat at t=0
  EXPECT_DOUBLE_EQ(b.r.frames[25], 1.0);   // plain beat at t=0.5
  EXPECT_DOUBLE_EQ(b.r.frames[100], 2.0);  // next downbeat at t=2
  for (double v : b.r.frames) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 2.0);
  }
}

TEST(BuildConditionBundle, RhythmEqualsTwoExactlyOnDownbeatFrames) {
  ChordTrack track;
  track.duration_sec = 6.0;
  track.spans.push_back({0.0, 6.0, parse_chord_symbol("F:maj7")});
  const BeatGrid grid = beats_from_bpm(97.0, 3, 6.0, 0.13);
  const ConditionBundle b = build_condition_bundle(track, grid, 0, 5.0, 50.0);
  std::set<int> expected;
  for (double t : grid.downbeat_times)
    expected.insert(static_cast<int>(std::lround(t * 50.0)));
  std::set<int> got;
  for (std::size_t i = 0; i < b.r.frames.size(); ++i)
    if (b.r.frames[i] >= 2.0) got.insert(static_cast<int>(i));
  EXPECT_EQ(got, expected);
}

TEST(BuildConditionBundle, DurationMismatchThrows) {
  ChordTrack track;
  track.duration_sec = 10.0;
  track.spans.push_back({0.0, 10.0, parse_chord_symbol("C:maj")});
  const BeatGrid grid = beats_from_bpm(120.0, 4, 9.0);
  EXPECT_THROW(build_condition_bundle(track, grid, 0, 5.0, 50.0),
               DurationMismatch);
}

TEST(BuildConditionBundle, MatchesPerFrameOracle) {
  // Full annotation round trip against independent per-frame recomputation.
  ChordTrack track;
  track.duration_sec = 8.0;
  track.spans.push_back({0.0, 2.0, parse_chord_symbol("C:maj")});
  track.spans.push_back({2.0, 3.5, parse_chord_symbol("A:min7")});
  track.spans.push_back({3.5, 6.0, parse_chord_symbol("F:maj")});
  track.spans.push_back({6.0, 8.0, parse_chord_symbol("G:dom7")});
  const BeatGrid grid = beats_from_bpm(110.0, 4, 8.0);
  const ConditionBundle b = build_condition_bundle(track, grid, 2, 5.0, 50.0);

  for (int i = 0; i < b.c_sum.frames.rows; ++i) {
    const double t = (i + 0.5) / 50.0;
    std::array<double, 12> expected{};
    for (const auto& span : track.spans)
      if (span.start_sec <= t && t < span.end_sec)
        expected = chord_to_pitch_classes(span.symbol);
    for (int c = 0; c < 12; ++c) EXPECT_EQ(b.c_sum.frames.at(i, c), expected[c]);
  }
  for (int j = 0; j < b.c_pre.frames.rows; ++j) {
    const double t = (j + 0.5) / 5.0;
    std::array<double, 12> expected{};
    for (const auto& span : track.spans)
      if (span.start_sec <= t && t < span.end_sec)
        expected = chord_to_pitch_classes(span.symbol);
    for (int c = 0; c < 12; ++c) EXPECT_EQ(b.c_pre.frames.at(j, c), expected[c]);
  }
}

TEST(BuildConditionBundle, DownsamplingConsistencyAwayFromBoundaries) {
  ChordTrack track;
  track.duration_sec = 8.0;
  track.spans.push_back({0.0, 3.0, parse_chord_symbol("C:maj")});
  track.spans.push_back({3.0, 8.0, parse_chord_symbol("E:min")});
  const BeatGrid grid = beats_from_bpm(120.0, 4, 8.0);
  const ConditionBundle b = build_condition_bundle(track, grid, 0, 5.0, 50.0);
  const double f_s = 50.0, f_m = 5.0;
  for (int j = 0; j < b.c_pre.frames.rows; ++j) {
    const double instant = (j + 0.5) / f_m;
    bool near_boundary = false;
    for (const auto& span : track.spans)
      if (std::abs(instant - span.start_sec) < 0.035 ||
          std::abs(instant - span.end_sec) < 0.035)
        near_boundary = true;
    if (near_boundary) continue;
    const int i =
        static_cast<int>(std::lround(j * f_s / f_m + f_s / (2.0 * f_m)));
    ASSERT_LT(i, b.c_sum.frames.rows);
    for (int c = 0; c < 12; ++c)
      EXPECT_EQ(b.c_pre.frames.at(j, c), b.c_sum.frames.at(i, c))
          << "j=" << j << " c=" << c;
  }
}

// -- file formats -----------------------------------------------------------

TEST(ChordFile, RoundTrip) {
  ChordTrack track;
  track.duration_sec = 3.0;
  track.spans.push_back({0.0, 1.5, parse_chord_symbol("C:maj")});
  track.spans.push_back({1.5, 3.0, parse_chord_symbol("A:min7")});
  const ChordTrack back = parse_chord_file(format_chord_file(track));
  ASSERT_EQ(back.spans.size(), 2u);
  EXPECT_EQ(back.spans[1].symbol, parse_chord_symbol("A:min7"));
  EXPECT_DOUBLE_EQ(back.duration_sec, 3.0);
}

TEST(ChordFile, MalformedLineNamesLineNumber) {
  try {
    parse_chord_file("0\t1\tC:maj\n1\t2\tX:zzz\n");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(BeatFile, RoundTripPreservesDownbeats) {
  const BeatGrid g = beats_from_bpm(120.0, 4, 4.0);
  const BeatGrid back = parse_beat_file(format_beat_file(g), 4.0);
  EXPECT_EQ(back.beat_times, g.beat_times);
  EXPECT_EQ(back.downbeat_times, g.downbeat_times);
}

}  // namespace
}  // namespace tempcondlm
