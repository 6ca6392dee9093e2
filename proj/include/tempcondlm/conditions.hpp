/**
 * @file conditions.hpp
 * @brief Symbolic chord/beat inputs and their numeric condition tensors.
 *
 * Produces the three model-facing conditions: the low-rate prepend chromagram,
 * the frame-rate chromagram, and the frame-rate rhythm vector (softened beats
 * plus downbeat one-hots).
 */

#ifndef TEMPCONDLM_CONDITIONS_HPP
#define TEMPCONDLM_CONDITIONS_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tempcondlm/chords.hpp"
#include "tempcondlm/common.hpp"
#include "tempcondlm/mat.hpp"

namespace tempcondlm {

struct ChordSpan {
  double start_sec = 0.0;
  double end_sec = 0.0;
  ChordSymbol symbol;
};

struct ChordTrack {
  std::vector<ChordSpan> spans;  // sorted, non-overlapping; gaps render as N
  double duration_sec = 0.0;
};

struct BeatGrid {
  std::vector<double> beat_times;      // strictly increasing, in [0, duration)
  std::vector<double> downbeat_times;  // subset of beat_times
  double duration_sec = 0.0;
};

struct PrependChordCondition {
  Mat<double> frames;  // T_fM x 12, 0/1 rows
  double frame_rate = 0.0;
};

struct FrameChordCondition {
  Mat<double> frames;  // T_fs x 12, 0/1 rows
  double frame_rate = 0.0;
};

struct RhythmCondition {
  std::vector<double> frames;  // T_fs, entries in [0, 2]
  double frame_rate = 0.0;
};

struct ConditionBundle {
  PrependChordCondition c_pre;
  FrameChordCondition c_sum;
  RhythmCondition r;
  int genre_id = 0;
  // Present flags drive classifier-free-guidance dropout and ablations.
  bool c_pre_present = true;
  bool c_sum_present = true;
  bool r_present = true;
  bool genre_present = true;
};

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Frame i carries the pitch classes of the span containing the frame center
/// (i + 0.5) / frame_rate; uncovered frames are all-zero. Boundary ties go to
/// the later span (span membership is start <= t < end).
inline Mat<double> render_chromagram(const ChordTrack& track, double frame_rate,
                                     int n_frames) {
  if (track.duration_sec <= 0.0) throw EmptyTrack("chord track has no duration");
  Mat<double> out(n_frames, 12);
  std::size_t cursor = 0;
  for (int i = 0; i < n_frames; ++i) {
    const double t = (i + 0.5) / frame_rate;
    while (cursor < track.spans.size() && track.spans[cursor].end_sec <= t)
      ++cursor;
    if (cursor < track.spans.size() && track.spans[cursor].start_sec <= t &&
        t < track.spans[cursor].end_sec) {
      const auto pcs = chord_to_pitch_classes(track.spans[cursor].symbol);
      std::copy(pcs.begin(), pcs.end(), out.row(i));
    }
  }
  return out;
}

/// Per-frame chord symbols at the same frame-center sampling rule.
inline std::vector<ChordSymbol> chord_frame_sequence(const ChordTrack& track,
                                                     double frame_rate,
                                                     int n_frames) {
  std::vector<ChordSymbol> out(n_frames, ChordSymbol::no_chord());
  std::size_t cursor = 0;
  for (int i = 0; i < n_frames; ++i) {
    const double t = (i + 0.5) / frame_rate;
    while (cursor < track.spans.size() && track.spans[cursor].end_sec <= t)
      ++cursor;
    if (cursor < track.spans.size() && track.spans[cursor].start_sec <= t &&
        t < track.spans[cursor].end_sec)
      out[i] = track.spans[cursor].symbol;
  }
  return out;
}

/// Regular beat grid: beats at phase + k*60/bpm below duration, every
/// beats_per_bar-th beat (starting from the first) a downbeat.
inline BeatGrid beats_from_bpm(double bpm, int beats_per_bar,
                               double duration_sec, double phase_sec = 0.0) {
  if (bpm <= 0.0) throw InvalidTempo("bpm must be positive");
  if (beats_per_bar < 1) throw InvalidTempo("beats_per_bar must be >= 1");
  const double period = 60.0 / bpm;
  BeatGrid grid;
  grid.duration_sec = duration_sec;
  for (int k = 0;; ++k) {
    const double t = phase_sec + k * period;
    if (t >= duration_sec) break;
    grid.beat_times.push_back(t);
    if (k % beats_per_bar == 0) grid.downbeat_times.push_back(t);
  }
  return grid;
}

inline constexpr double kBeatKernel[7] = {0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25};

/// One-hot beats stamped with the 7-tap soft kernel, overlaps combined by
/// elementwise max, clipped to [0, 1].
inline std::vector<double> soften_beats(const std::vector<double>& beat_times,
                                        double f_s, int n_frames) {
  std::vector<double> out(n_frames, 0.0);
  for (double t : beat_times) {
    if (t < 0.0 || t >= n_frames / f_s)
      throw BeatOutOfRange("beat time out of range: " + std::to_string(t));
    const int center = static_cast<int>(std::lround(t * f_s));
    for (int d = -3; d <= 3; ++d) {
      const int f = center + d;
      if (f < 0 || f >= n_frames) continue;
      out[f] = std::max(out[f], kBeatKernel[d + 3]);
    }
  }
  for (double& v : out) v = std::min(v, 1.0);
  return out;
}

/// Softened beats plus exact downbeat one-hots; entries in [0, 2].
inline RhythmCondition render_rhythm(const BeatGrid& grid, double f_s,
                                     int n_frames) {
  RhythmCondition r;
  r.frame_rate = f_s;
  r.frames = soften_beats(grid.beat_times, f_s, n_frames);
  for (double t : grid.downbeat_times) {
    const int f = static_cast<int>(std::lround(t * f_s));
    if (f >= 0 && f < n_frames) r.frames[f] += 1.0;
  }
  return r;
}

/// Assembles (C_pre at f_M, C_sum at f_s, R at f_s, genre) for one clip.
inline ConditionBundle build_condition_bundle(const ChordTrack& track,
                                              const BeatGrid& grid,
                                              int genre_id, double f_M,
                                              double f_s) {
  if (std::abs(track.duration_sec - grid.duration_sec) > 1e-9)
    throw DurationMismatch("chord track and beat grid durations differ");
  const int n_fs = static_cast<int>(std::lround(track.duration_sec * f_s));
  const int n_fm = static_cast<int>(std::lround(track.duration_sec * f_M));
  ConditionBundle b;
  b.c_pre.frames = render_chromagram(track, f_M, n_fm);
  b.c_pre.frame_rate = f_M;
  b.c_sum.frames = render_chromagram(track, f_s, n_fs);
  b.c_sum.frame_rate = f_s;
  b.r = render_rhythm(grid, f_s, n_fs);
  b.genre_id = genre_id;
  return b;
}

// ---------------------------------------------------------------------------
// File formats (lab-style chords, tab-separated beats)
// ---------------------------------------------------------------------------

/// Parses `start<TAB>end<TAB>symbol` lines. Errors carry 1-based line numbers.
inline ChordTrack parse_chord_file(const std::string& text) {
  ChordTrack track;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double start, end;
    std::string sym;
    if (!(ls >> start >> end >> sym))
      throw IoError("chord file line " + std::to_string(lineno) +
                    ": expected 'start end symbol'");
    ChordSpan span;
    span.start_sec = start;
    span.end_sec = end;
    try {
      span.symbol = parse_chord_symbol(sym);
    } catch (const MalformedChord& e) {
      throw IoError("chord file line " + std::to_string(lineno) + ": " +
                    e.what());
    }
    if (!(span.start_sec < span.end_sec))
      throw IoError("chord file line " + std::to_string(lineno) +
                    ": start must precede end");
    if (!track.spans.empty() && span.start_sec < track.spans.back().end_sec)
      throw IoError("chord file line " + std::to_string(lineno) +
                    ": spans overlap or are unsorted");
    track.spans.push_back(span);
    track.duration_sec = std::max(track.duration_sec, span.end_sec);
  }
  return track;
}

inline std::string format_chord_file(const ChordTrack& track) {
  std::ostringstream out;
  out.precision(9);
  for (const auto& s : track.spans)
    out << s.start_sec << '\t' << s.end_sec << '\t'
        << format_chord_symbol(s.symbol) << '\n';
  return out.str();
}

/// Parses `time<TAB>{beat|downbeat}` lines; downbeat lines count as beats too.
inline BeatGrid parse_beat_file(const std::string& text, double duration_sec) {
  BeatGrid grid;
  grid.duration_sec = duration_sec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double t;
    std::string kind;
    if (!(ls >> t >> kind) || (kind != "beat" && kind != "downbeat"))
      throw IoError("beat file line " + std::to_string(lineno) +
                    ": expected 'time beat|downbeat'");
    if (!grid.beat_times.empty() && t <= grid.beat_times.back())
      throw IoError("beat file line " + std::to_string(lineno) +
                    ": times must be strictly increasing");
    grid.beat_times.push_back(t);
    if (kind == "downbeat") grid.downbeat_times.push_back(t);
  }
  return grid;
}

inline std::string format_beat_file(const BeatGrid& grid) {
  std::ostringstream out;
  out.precision(9);
  std::size_t dcursor = 0;
  for (double t : grid.beat_times) {
    bool down = dcursor < grid.downbeat_times.size() &&
                std::abs(grid.downbeat_times[dcursor] - t) < 1e-6;
    if (down) ++dcursor;
    out << t << '\t' << (down ? "downbeat" : "beat") << '\n';
  }
  return out.str();
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_CONDITIONS_HPP
