/**
 * @file dataset.hpp
 * @brief JSONL clip dataset: a codec-spec header line followed by one record
 * per clip (condition source texts, genre, bpm, token grid).
 */

#ifndef TEMPCONDLM_DATASET_HPP
#define TEMPCONDLM_DATASET_HPP

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "tempcondlm/common.hpp"
#include "tempcondlm/conditions.hpp"
#include "tempcondlm/tokens.hpp"
#include "tempcondlm/toycodec.hpp"

namespace tempcondlm {

struct ClipRecord {
  std::string chord_text;  // lab-style chord file contents
  std::string beat_text;   // beat file contents
  int genre_id = 0;
  double bpm = 0.0;
  double duration_sec = 0.0;
  TokenGrid grid;
};

struct ClipDataset {
  ToyCodecSpec spec;
  std::vector<ClipRecord> clips;
};

inline nlohmann::json clip_to_json(const ClipRecord& clip) {
  return {{"chords", clip.chord_text}, {"beats", clip.beat_text},
          {"genre", clip.genre_id},    {"bpm", clip.bpm},
          {"duration_sec", clip.duration_sec}, {"grid", grid_to_json(clip.grid)}};
}

inline ClipRecord clip_from_json(const nlohmann::json& j) {
  ClipRecord clip;
  clip.chord_text = j.at("chords").get<std::string>();
  clip.beat_text = j.at("beats").get<std::string>();
  clip.genre_id = j.at("genre").get<int>();
  clip.bpm = j.at("bpm").get<double>();
  clip.duration_sec = j.at("duration_sec").get<double>();
  clip.grid = grid_from_json(j.at("grid"));
  return clip;
}

inline void write_dataset(const ClipDataset& ds, std::ostream& out) {
  out << codec_spec_to_json(ds.spec).dump() << '\n';
  for (const auto& clip : ds.clips) out << clip_to_json(clip).dump() << '\n';
}

inline ClipDataset read_dataset(std::istream& in) {
  ClipDataset ds;
  std::string line;
  if (!std::getline(in, line)) throw DatasetEmpty("dataset has no header line");
  ds.spec = codec_spec_from_json(nlohmann::json::parse(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ClipRecord clip = clip_from_json(nlohmann::json::parse(line));
    if (clip.grid.K != ds.spec.K || clip.grid.N != ds.spec.N)
      throw ConfigMismatch("clip grid does not match dataset codec spec");
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

inline ClipDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  return read_dataset(in);
}

/// Reconstructs the full condition bundle for a clip.
inline ConditionBundle clip_bundle(const ClipRecord& clip, double f_M,
                                   double f_s) {
  ChordTrack track = parse_chord_file(clip.chord_text);
  track.duration_sec = clip.duration_sec;
  BeatGrid grid = parse_beat_file(clip.beat_text, clip.duration_sec);
  return build_condition_bundle(track, grid, clip.genre_id, f_M, f_s);
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_DATASET_HPP
