/**
 * @file toycodec.hpp
 * @brief Deterministic synthetic codec: packs (chord id, rhythm bucket, genre)
 * into codebook 0 and fills codebooks >= 1 with seeded pseudorandom tokens.
 *
 * Codebook 0 is exactly invertible regardless of the noise rate, which gives
 * the evaluation module perfect ground truth for controllability scoring.
 */

#ifndef TEMPCONDLM_TOYCODEC_HPP
#define TEMPCONDLM_TOYCODEC_HPP

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tempcondlm/chords.hpp"
#include "tempcondlm/common.hpp"
#include "tempcondlm/conditions.hpp"
#include "tempcondlm/tokens.hpp"

namespace tempcondlm {

/// Builds the full 12-root x 12-quality chord vocabulary.
inline std::vector<ChordSymbol> full_chord_vocab() {
  std::vector<ChordSymbol> v;
  v.reserve(144);
  for (int root = 0; root < 12; ++root)
    for (int q = 0; q < kNumChordQualities; ++q)
      v.push_back(ChordSymbol::make(root, static_cast<ChordQuality>(q)));
  return v;
}

struct ToyCodecSpec {
  int N = 64;
  int K = 4;
  double f_s = 50.0;
  int chord_code_width = 3;
  int beat_code_width = 2;
  int genre_code_width = 3;
  double noise_rate = 0.0;
  // Chords packable into codebook 0; dense id = index + 1, id 0 is N.
  std::vector<ChordSymbol> chord_vocab;

  int total_width() const {
    return chord_code_width + beat_code_width + genre_code_width;
  }

  /// Throws SpecOverflow when the bit allocations cannot hold the vocabulary
  /// or exceed the codebook size.
  void validate() const {
    if (N < 2 || K < 1 || f_s <= 0.0)
      throw SpecOverflow("invalid codec dimensions");
    const int codebook_bits = static_cast<int>(std::floor(std::log2(N)));
    if (total_width() > codebook_bits)
      throw SpecOverflow("bit allocations exceed codebook size");
    if (static_cast<std::size_t>(1) << chord_code_width <= chord_vocab.size())
      throw SpecOverflow("chord vocabulary does not fit chord_code_width");
    if (beat_code_width < 2)
      throw SpecOverflow("beat_code_width must hold buckets 0..2");
    if (noise_rate < 0.0 || noise_rate >= 1.0)
      throw SpecOverflow("noise_rate must be in [0,1)");
  }
};

/// Per-frame structure recovered from a grid.
struct DecodedClip {
  std::vector<ChordSymbol> chords;      // per frame
  std::vector<std::uint8_t> chord_valid;  // 0 when the id was out of vocabulary
  std::vector<std::uint16_t> pc_sets;   // per frame, 12-bit masks
  std::vector<int> rhythm_buckets;      // 0 none, 1 beat, 2 downbeat
  std::vector<double> beat_times;       // frame centers of buckets >= 1
  std::vector<double> downbeat_times;   // frame centers of bucket 2
  std::vector<int> genre_votes;         // histogram over genre field values
};

namespace detail {

inline std::map<std::uint16_t, int> pcset_to_id(const ToyCodecSpec& spec) {
  std::map<std::uint16_t, int> m;
  m[0] = 0;  // N
  for (std::size_t i = 0; i < spec.chord_vocab.size(); ++i) {
    const std::uint16_t mask = chord_pitch_class_mask(spec.chord_vocab[i]);
    // First vocabulary entry wins for enharmonically identical sets.
    m.emplace(mask, static_cast<int>(i) + 1);
  }
  return m;
}

inline int rhythm_bucket(double r) {
  if (r >= 1.99) return 2;
  if (r >= 0.99) return 1;  // soft-kernel shoulders top out at 0.75
  return 0;
}

inline int noise_token(std::uint64_t seed, int t, int k, int n) {
  std::uint64_t h = splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(t) << 20) | static_cast<std::uint64_t>(k)));
  return static_cast<int>(h % static_cast<std::uint64_t>(n));
}

}  // namespace detail

/// Packs the condition structure of a bundle into a token grid.
inline TokenGrid encode_clip(const ConditionBundle& bundle,
                             const ToyCodecSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int T = bundle.c_sum.frames.rows;
  if (static_cast<int>(bundle.r.frames.size()) != T)
    throw ShapeMismatch("bundle condition lengths disagree");
  if (bundle.genre_id < 0 ||
      bundle.genre_id >= (1 << spec.genre_code_width))
    throw SpecOverflow("genre id does not fit genre_code_width");

  const auto set_ids = detail::pcset_to_id(spec);
  TokenGrid grid(T, spec.K, spec.N);
  for (int t = 0; t < T; ++t) {
    std::uint16_t mask = 0;
    const double* row = bundle.c_sum.frames.row(t);
    for (int p = 0; p < 12; ++p)
      if (row[p] > 0.5) mask |= static_cast<std::uint16_t>(1u << p);
    auto it = set_ids.find(mask);
    if (it == set_ids.end())
      throw UnknownChordId("pitch-class set at frame " + std::to_string(t) +
                           " not in codec chord vocabulary");
    const int chord_id = it->second;
    const int bucket = detail::rhythm_bucket(bundle.r.frames[t]);
    grid.at(t, 0) = chord_id | (bucket << spec.chord_code_width) |
                    (bundle.genre_id << (spec.chord_code_width + spec.beat_code_width));
    for (int k = 1; k < spec.K; ++k) {
      int tok = detail::noise_token(seed, t, k, spec.N);
      if (spec.noise_rate > 0.0) {
        const std::uint64_t h = splitmix64(seed ^ 0xabcdULL ^
                                           splitmix64((static_cast<std::uint64_t>(t) << 20) | static_cast<std::uint64_t>(k)));
        if (static_cast<double>(h >> 11) * 0x1.0p-53 < spec.noise_rate)
          tok = detail::noise_token(seed ^ 0x77ULL, t, k, spec.N);
      }
      grid.at(t, k) = tok;
    }
  }
  return grid;
}

/// Unpacks codebook 0 back into chords, rhythm buckets, and genre votes.
/// Chord ids outside the vocabulary throw in strict mode; otherwise they
/// decode to no-chord with chord_valid = 0 (generated grids may emit them).
inline DecodedClip decode_clip(const TokenGrid& grid, const ToyCodecSpec& spec,
                               bool strict = true) {
  spec.validate();
  DecodedClip out;
  out.genre_votes.assign(1 << spec.genre_code_width, 0);
  const int chord_mask = (1 << spec.chord_code_width) - 1;
  const int beat_mask = (1 << spec.beat_code_width) - 1;
  for (int t = 0; t < grid.T; ++t) {
    const int tok = grid.at(t, 0);
    const int chord_id = tok & chord_mask;
    const int bucket = (tok >> spec.chord_code_width) & beat_mask;
    const int genre = tok >> (spec.chord_code_width + spec.beat_code_width);
    const bool valid = chord_id <= static_cast<int>(spec.chord_vocab.size());
    if (!valid && strict)
      throw UnknownChordId("chord id " + std::to_string(chord_id) +
                           " outside vocabulary");
    const ChordSymbol sym = (!valid || chord_id == 0)
                                ? ChordSymbol::no_chord()
                                : spec.chord_vocab[chord_id - 1];
    out.chords.push_back(sym);
    out.chord_valid.push_back(valid ? 1 : 0);
    out.pc_sets.push_back(chord_pitch_class_mask(sym));
    out.rhythm_buckets.push_back(bucket >= 2 ? 2 : bucket);
    if (bucket >= 1) {
      const double tc = (t + 0.5) / spec.f_s;
      out.beat_times.push_back(tc);
      if (bucket >= 2) out.downbeat_times.push_back(tc);
    }
    if (genre < static_cast<int>(out.genre_votes.size()))
      ++out.genre_votes[genre];
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON serialization of the spec (dataset header line)
// ---------------------------------------------------------------------------

inline nlohmann::json codec_spec_to_json(const ToyCodecSpec& spec) {
  nlohmann::json vocab = nlohmann::json::array();
  for (const auto& s : spec.chord_vocab) vocab.push_back(format_chord_symbol(s));
  return {{"N", spec.N},
          {"K", spec.K},
          {"f_s", spec.f_s},
          {"chord_code_width", spec.chord_code_width},
          {"beat_code_width", spec.beat_code_width},
          {"genre_code_width", spec.genre_code_width},
          {"noise_rate", spec.noise_rate},
          {"chord_vocab", std::move(vocab)}};
}

inline ToyCodecSpec codec_spec_from_json(const nlohmann::json& j) {
  ToyCodecSpec spec;
  spec.N = j.at("N").get<int>();
  spec.K = j.at("K").get<int>();
  spec.f_s = j.at("f_s").get<double>();
  spec.chord_code_width = j.at("chord_code_width").get<int>();
  spec.beat_code_width = j.at("beat_code_width").get<int>();
  spec.genre_code_width = j.at("genre_code_width").get<int>();
  spec.noise_rate = j.at("noise_rate").get<double>();
  for (const auto& s : j.at("chord_vocab"))
    spec.chord_vocab.push_back(parse_chord_symbol(s.get<std::string>()));
  spec.validate();
  return spec;
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_TOYCODEC_HPP
