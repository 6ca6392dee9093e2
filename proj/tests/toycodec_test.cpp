/**
 * @file toycodec_test.cpp
 * @brief Tests for the deterministic synthetic codec: packing layout, exact
 * inversion of codebook 0, and noise behavior on the other codebooks.
 */

#include "tempcondlm/toycodec.hpp"

#include <gtest/gtest.h>

#include "tempcondlm/common.hpp"
#include "tempcondlm/conditions.hpp"

namespace tempcondlm {
namespace {

ToyCodecSpec small_spec() {
  ToyCodecSpec spec;
  spec.N = 64;
  spec.K = 4;
  spec.f_s = 50.0;
  spec.chord_code_width = 3;
  spec.beat_code_width = 2;
  spec.genre_code_width = 1;
  spec.chord_vocab = {parse_chord_symbol("C:maj"), parse_chord_symbol("A:min"),
                      parse_chord_symbol("F:maj"), parse_chord_symbol("G:dom7")};
  return spec;
}

ConditionBundle make_bundle(const std::string& chords_lab, double bpm,
                            double duration, int genre) {
  const ChordTrack track = [&] {
    ChordTrack t = parse_chord_file(chords_lab);
    t.duration_sec = duration;
    return t;
  }();
  const BeatGrid grid = beats_from_bpm(bpm, 4, duration);
  return build_condition_bundle(track, grid, genre, 5.0, 50.0);
}

TEST(ToyCodecSpecValidate, RejectsOverfullLayouts) {
  ToyCodecSpec spec = small_spec();
  spec.chord_code_width = 4;  // 4 + 2 + 1 = 7 bits > log2(64)
  EXPECT_THROW(spec.validate(), SpecOverflow);

  spec = small_spec();
  spec.chord_vocab.resize(4);
  spec.chord_code_width = 2;  // ids 0..4 need 3 bits
  EXPECT_THROW(spec.validate(), SpecOverflow);

  spec = small_spec();
  spec.noise_rate = 1.0;
  EXPECT_THROW(spec.validate(), SpecOverflow);

  EXPECT_NO_THROW(small_spec().validate());
}

TEST(EncodeClip, ConstantChordPacksExpectedCodebookZero) {
  // One chord, no beats in range of frame 30, genre 1.
  const ToyCodecSpec spec = small_spec();
  ConditionBundle b = make_bundle("0\t2\tC:maj\n", 30.0, 2.0, 1);
  const TokenGrid g = encode_clip(b, spec, 123);
  ASSERT_EQ(g.T, 100);
  ASSERT_EQ(g.K, 4);
  // Frame 0 is a downbeat (bucket 2), chord id 1 (C:maj), genre 1:
  // 1 | 2<<3 | 1<<5 = 1 + 16 + 32 = 49.
  EXPECT_EQ(g.at(0, 0), 49);
  // At 30 bpm the only in-range beat is t = 0; frame 30 is bucket 0.
  EXPECT_EQ(g.at(30, 0), 1 + 0 + 32);
}

TEST(EncodeClip, UnknownChordThrows) {
  const ToyCodecSpec spec = small_spec();
  ConditionBundle b = make_bundle("0\t2\tD:min\n", 120.0, 2.0, 0);
  EXPECT_THROW(encode_clip(b, spec, 1), UnknownChordId);
}

TEST(EncodeDecode, RoundTripRecoversChordsBucketsGenre) {
  const ToyCodecSpec spec = small_spec();
  const ConditionBundle b =
      make_bundle("0\t1\tC:maj\n1\t2\tA:min\n2\t4\tG:dom7\n", 90.0, 4.0, 1);
  const TokenGrid g = encode_clip(b, spec, 42);
  const DecodedClip d = decode_clip(g, spec);
  ASSERT_EQ(static_cast<int>(d.chords.size()), g.T);

  const auto frame_chords = [&] {
    ChordTrack t = parse_chord_file("0\t1\tC:maj\n1\t2\tA:min\n2\t4\tG:dom7\n");
    t.duration_sec = 4.0;
    return chord_frame_sequence(t, 50.0, g.T);
  }();
  for (int t = 0; t < g.T; ++t) EXPECT_EQ(d.chords[t], frame_chords[t]) << t;

  for (int t = 0; t < g.T; ++t)
    EXPECT_EQ(d.rhythm_buckets[t], detail::rhythm_bucket(b.r.frames[t])) << t;

  // Every frame voted genre 1.
  EXPECT_EQ(d.genre_votes[1], g.T);
  EXPECT_EQ(d.genre_votes[0], 0);
}

TEST(EncodeDecode, DecodedBeatTimesNearTrueBeats) {
  const ToyCodecSpec spec = small_spec();
  const double bpm = 100.0, dur = 4.0;
  const ConditionBundle b = make_bundle("0\t4\tF:maj\n", bpm, dur, 0);
  const TokenGrid g = encode_clip(b, spec, 9);
  const DecodedClip d = decode_clip(g, spec);
  const BeatGrid truth = beats_from_bpm(bpm, 4, dur);
  ASSERT_EQ(d.beat_times.size(), truth.beat_times.size());
  for (std::size_t i = 0; i < truth.beat_times.size(); ++i)
    EXPECT_NEAR(d.beat_times[i], truth.beat_times[i], 0.5 / spec.f_s + 1e-9);
  ASSERT_EQ(d.downbeat_times.size(), truth.downbeat_times.size());
}

TEST(EncodeClip, RoundTripHoldsUnderNoise) {
  // Codebook 0 is deterministic; noise only perturbs codebooks >= 1.
  ToyCodecSpec noisy = small_spec();
  noisy.noise_rate = 0.1;
  const ToyCodecSpec clean = small_spec();
  const ConditionBundle b = make_bundle("0\t2\tC:maj\n2\t4\tA:min\n", 80.0, 4.0, 0);
  for (std::uint64_t seed : {1ULL, 2ULL, 77ULL, 12345ULL}) {
    const TokenGrid gn = encode_clip(b, noisy, seed);
    const TokenGrid gc = encode_clip(b, clean, seed);
    for (int t = 0; t < gn.T; ++t) EXPECT_EQ(gn.at(t, 0), gc.at(t, 0));
    const DecodedClip dn = decode_clip(gn, noisy);
    const DecodedClip dc = decode_clip(gc, clean);
    EXPECT_EQ(dn.rhythm_buckets, dc.rhythm_buckets);
    EXPECT_EQ(dn.pc_sets, dc.pc_sets);
  }
}

TEST(EncodeClip, NoiseActuallyPerturbsUpperCodebooks) {
  ToyCodecSpec noisy = small_spec();
  noisy.noise_rate = 0.5;
  const ToyCodecSpec clean = small_spec();
  const ConditionBundle b = make_bundle("0\t4\tC:maj\n", 120.0, 4.0, 0);
  const TokenGrid gn = encode_clip(b, noisy, 31);
  const TokenGrid gc = encode_clip(b, clean, 31);
  int diff = 0;
  for (int t = 0; t < gn.T; ++t)
    for (int k = 1; k < gn.K; ++k) diff += gn.at(t, k) != gc.at(t, k);
  EXPECT_GT(diff, 0);
}

TEST(EncodeClip, DeterministicInSeed) {
  const ToyCodecSpec spec = small_spec();
  const ConditionBundle b = make_bundle("0\t2\tG:dom7\n", 140.0, 2.0, 1);
  EXPECT_EQ(encode_clip(b, spec, 5).tokens, encode_clip(b, spec, 5).tokens);
  EXPECT_NE(encode_clip(b, spec, 5).tokens, encode_clip(b, spec, 6).tokens);
}

TEST(GenreBitField, AllGenresSurviveRoundTrip) {
  ToyCodecSpec spec = small_spec();
  spec.genre_code_width = 3;  // widths 3+2+3 = 8 > 6 bits, so widen N
  spec.N = 256;
  for (int genre = 0; genre < 8; ++genre) {
    const ConditionBundle b = make_bundle("0\t2\tA:min\n", 100.0, 2.0, genre);
    const DecodedClip d = decode_clip(encode_clip(b, spec, 3), spec);
    EXPECT_EQ(d.genre_votes[genre], 100) << genre;
  }
}

TEST(DecodeClip, OutOfVocabularyChordIdStrictThrowsLenientFlags) {
  const ToyCodecSpec spec = small_spec();  // vocab size 4, ids 0..4 valid
  TokenGrid grid(2, spec.K, spec.N);
  grid.at(0, 0) = 7;  // chord id 7 > 4
  grid.at(1, 0) = 1;
  EXPECT_THROW(decode_clip(grid, spec), UnknownChordId);
  const DecodedClip d = decode_clip(grid, spec, /*strict=*/false);
  EXPECT_EQ(d.chord_valid, (std::vector<std::uint8_t>{0, 1}));
  EXPECT_TRUE(d.chords[0].is_no_chord());
  EXPECT_EQ(d.chords[1], spec.chord_vocab[0]);
}

TEST(CodecSpecJson, RoundTrip) {
  ToyCodecSpec spec = small_spec();
  spec.noise_rate = 0.05;
  const ToyCodecSpec back = codec_spec_from_json(codec_spec_to_json(spec));
  EXPECT_EQ(back.N, spec.N);
  EXPECT_EQ(back.K, spec.K);
  EXPECT_DOUBLE_EQ(back.f_s, spec.f_s);
  EXPECT_EQ(back.chord_code_width, spec.chord_code_width);
  EXPECT_DOUBLE_EQ(back.noise_rate, spec.noise_rate);
  ASSERT_EQ(back.chord_vocab.size(), spec.chord_vocab.size());
  for (std::size_t i = 0; i < spec.chord_vocab.size(); ++i)
    EXPECT_EQ(back.chord_vocab[i], spec.chord_vocab[i]);
}

TEST(FullChordVocab, Has144UniquePcSetsUpToEnharmonics) {
  const auto v = full_chord_vocab();
  EXPECT_EQ(v.size(), 144u);
}

}  // namespace
}  // namespace tempcondlm
