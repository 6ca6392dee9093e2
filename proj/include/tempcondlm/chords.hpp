/**
 * @file chords.hpp
 * @brief Chord symbols: grammar `ROOT[:QUALITY]` or `N`, pitch-class sets,
 * canonical formatting.
 *
 * Quality vocabulary covers triads and the common sevenths; unknown qualities
 * are rejected so that tetrad-level scoring stays loss-free.
 */

#ifndef TEMPCONDLM_CHORDS_HPP
#define TEMPCONDLM_CHORDS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tempcondlm/common.hpp"

namespace tempcondlm {

enum class ChordQuality : std::uint8_t {
  kMaj = 0,
  kMin,
  kDim,
  kAug,
  kSus2,
  kSus4,
  kMaj7,
  kMin7,
  kDom7,
  kDim7,
  kHdim7,
  kMinMaj7,
};

inline constexpr int kNumChordQualities = 12;

struct ChordSymbol {
  // root is a pitch-class index 0-11; -1 marks NO_CHORD (quality ignored).
  int root = -1;
  ChordQuality quality = ChordQuality::kMaj;

  static ChordSymbol no_chord() { return ChordSymbol{}; }
  static ChordSymbol make(int root, ChordQuality q) { return {root, q}; }
  bool is_no_chord() const { return root < 0; }

  friend bool operator==(const ChordSymbol& a, const ChordSymbol& b) {
    if (a.is_no_chord() || b.is_no_chord())
      return a.is_no_chord() == b.is_no_chord();
    return a.root == b.root && a.quality == b.quality;
  }
};

namespace detail {

inline constexpr std::array<std::string_view, kNumChordQualities> kQualityNames = {
    "maj", "min", "dim", "aug", "sus2", "sus4",
    "maj7", "min7", "dom7", "dim7", "hdim7", "minmaj7"};

// Intervals above the root for each quality.
inline constexpr std::array<std::array<int, 4>, kNumChordQualities> kIntervals = {{
    {0, 4, 7, -1},   // maj
    {0, 3, 7, -1},   // min
    {0, 3, 6, -1},   // dim
    {0, 4, 8, -1},   // aug
    {0, 2, 7, -1},   // sus2
    {0, 5, 7, -1},   // sus4
    {0, 4, 7, 11},   // maj7
    {0, 3, 7, 10},   // min7
    {0, 4, 7, 10},   // dom7
    {0, 3, 6, 9},    // dim7
    {0, 3, 6, 10},   // hdim7
    {0, 3, 7, 11},   // minmaj7
}};

// Canonical root spellings use sharps.
inline constexpr std::array<std::string_view, 12> kRootNames = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

}  // namespace detail

/// Parses `ROOT[:QUALITY]` (sharps/flats accepted, quality defaults to maj)
/// or the no-chord literal `N`. Throws MalformedChord otherwise.
inline ChordSymbol parse_chord_symbol(std::string_view text) {
  if (text == "N") return ChordSymbol::no_chord();
  if (text.empty()) throw MalformedChord(std::string(text), 0);

  static constexpr int kLetterPc[7] = {9, 11, 0, 2, 4, 5, 7};  // A..G
  const char c0 = text[0];
  if (c0 < 'A' || c0 > 'G') throw MalformedChord(std::string(text), 0);
  int pc = kLetterPc[c0 - 'A'];
  std::size_t pos = 1;
  if (pos < text.size() && (text[pos] == '#' || text[pos] == 'b')) {
    pc = (pc + (text[pos] == '#' ? 1 : 11)) % 12;
    ++pos;
  }
  ChordQuality quality = ChordQuality::kMaj;
  if (pos < text.size()) {
    if (text[pos] != ':') throw MalformedChord(std::string(text), pos);
    std::string_view qname = text.substr(pos + 1);
    bool found = false;
    for (int q = 0; q < kNumChordQualities; ++q) {
      if (qname == detail::kQualityNames[q]) {
        quality = static_cast<ChordQuality>(q);
        found = true;
        break;
      }
    }
    if (!found) throw MalformedChord(std::string(text), pos + 1);
  }
  return ChordSymbol::make(pc, quality);
}

/// Canonical spelling: sharps for roots, explicit quality, `N` for no-chord.
inline std::string format_chord_symbol(const ChordSymbol& s) {
  if (s.is_no_chord()) return "N";
  std::string out(detail::kRootNames[s.root]);
  out += ':';
  out += detail::kQualityNames[static_cast<int>(s.quality)];
  return out;
}

/// 12-dim 0/1 chord-tone indicator (C, C#, ..., B); all-zero for NO_CHORD.
inline std::array<double, 12> chord_to_pitch_classes(const ChordSymbol& s) {
  std::array<double, 12> v{};
  if (s.is_no_chord()) return v;
  for (int iv : detail::kIntervals[static_cast<int>(s.quality)]) {
    if (iv < 0) break;
    v[(s.root + iv) % 12] = 1.0;
  }
  return v;
}

/// Chord-tone pitch classes as a 12-bit mask, bit i = pitch class i.
inline std::uint16_t chord_pitch_class_mask(const ChordSymbol& s) {
  std::uint16_t m = 0;
  if (s.is_no_chord()) return m;
  for (int iv : detail::kIntervals[static_cast<int>(s.quality)]) {
    if (iv < 0) break;
    m |= static_cast<std::uint16_t>(1u << ((s.root + iv) % 12));
  }
  return m;
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_CHORDS_HPP
