/**
 * @file datagen.hpp
 * @brief Synthetic clip generator: random bar-aligned chord progressions over
 * a configured vocabulary, a regular beat grid from a random BPM, a random
 * genre tag, all encoded through the toy codec.
 */

#ifndef TEMPCONDLM_DATAGEN_HPP
#define TEMPCONDLM_DATAGEN_HPP

#include <vector>

#include "tempcondlm/common.hpp"
#include "tempcondlm/conditions.hpp"
#include "tempcondlm/dataset.hpp"
#include "tempcondlm/toycodec.hpp"

namespace tempcondlm {

struct DataGenConfig {
  int n_clips = 100;
  double clip_seconds = 10.0;
  double bpm_min = 60.0;
  double bpm_max = 180.0;
  int beats_per_bar = 4;
  int n_genres = 5;
  int max_span_bars = 4;
  std::uint64_t seed = 0;
  ToyCodecSpec codec;
};

/// Bar-aligned random chord progression: span lengths uniform in
/// [1, max_span_bars] bars, chords uniform over the codec vocabulary, last
/// span truncated at the clip end.
inline ChordTrack random_progression(Rng& rng, const std::vector<ChordSymbol>& vocab,
                                     double bar_sec, double duration_sec,
                                     int max_span_bars) {
  ChordTrack track;
  track.duration_sec = duration_sec;
  double cur = 0.0;
  while (cur < duration_sec - 1e-9) {
    const int bars = 1 + static_cast<int>(rng.next_below(max_span_bars));
    ChordSpan span;
    span.start_sec = cur;
    span.end_sec = std::min(cur + bars * bar_sec, duration_sec);
    span.symbol = vocab[rng.next_below(vocab.size())];
    track.spans.push_back(span);
    cur = span.end_sec;
  }
  return track;
}

inline ClipDataset generate_dataset(const DataGenConfig& cfg) {
  cfg.codec.validate();
  if (cfg.codec.chord_vocab.empty())
    throw BadConfig("codec chord vocabulary is empty");
  if (cfg.n_genres > (1 << cfg.codec.genre_code_width))
    throw BadConfig("n_genres does not fit genre_code_width");
  ClipDataset ds;
  ds.spec = cfg.codec;
  Rng rng(cfg.seed);
  for (int i = 0; i < cfg.n_clips; ++i) {
    ClipRecord clip;
    clip.duration_sec = cfg.clip_seconds;
    clip.bpm = rng.next_range(cfg.bpm_min, cfg.bpm_max);
    clip.genre_id = static_cast<int>(rng.next_below(cfg.n_genres));
    const double bar_sec = cfg.beats_per_bar * 60.0 / clip.bpm;
    const ChordTrack track = random_progression(
        rng, cfg.codec.chord_vocab, bar_sec, cfg.clip_seconds, cfg.max_span_bars);
    const BeatGrid beats =
        beats_from_bpm(clip.bpm, cfg.beats_per_bar, cfg.clip_seconds);
    clip.chord_text = format_chord_file(track);
    clip.beat_text = format_beat_file(beats);
    const ConditionBundle bundle = build_condition_bundle(
        track, beats, clip.genre_id, cfg.codec.f_s / 10.0, cfg.codec.f_s);
    clip.grid = encode_clip(bundle, cfg.codec, rng.next_u64());
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_DATAGEN_HPP
