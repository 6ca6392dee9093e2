/**
 * @file common.hpp
 * @brief Shared error types, deterministic RNG helpers, and runtime mode flags.
 */

#ifndef TEMPCONDLM_COMMON_HPP
#define TEMPCONDLM_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace tempcondlm {

// ---------------------------------------------------------------------------
// Errors. One exception type per named error contract.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedChord : Error {
  MalformedChord(const std::string& text, std::size_t position)
      : Error("malformed chord symbol '" + text + "' at position " +
              std::to_string(position)),
        text(text),
        position(position) {}
  std::string text;
  std::size_t position;
};

struct EmptyTrack : Error {
  using Error::Error;
};
struct InvalidTempo : Error {
  using Error::Error;
};
struct BeatOutOfRange : Error {
  using Error::Error;
};
struct DurationMismatch : Error {
  using Error::Error;
};
struct InconsistentPad : Error {
  using Error::Error;
};
struct TokenOutOfRange : Error {
  using Error::Error;
};
struct SpecOverflow : Error {
  using Error::Error;
};
struct UnknownChordId : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct LengthOverflow : Error {
  using Error::Error;
};
struct ConfigMismatch : Error {
  using Error::Error;
};
struct DatasetEmpty : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};
struct UnsortedInput : Error {
  using Error::Error;
};
struct DegenerateSet : Error {
  using Error::Error;
};
struct BadConfig : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic mode. TEMPCONDLM_DETERMINISTIC=1 forces single-threaded
// reference execution everywhere a parallel path exists.
// ---------------------------------------------------------------------------

inline bool deterministic_mode() {
  static const bool on = [] {
    const char* v = std::getenv("TEMPCONDLM_DETERMINISTIC");
    return v != nullptr && v[0] == '1';
  }();
  return on;
}

// ---------------------------------------------------------------------------
// RNG. std::mt19937_64 plus hand-rolled draw helpers so that sampled values
// do not depend on the standard library's distribution implementations.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator with reproducible draw helpers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x5bf03635ULL)) {}

  std::uint64_t next_u64() {
    state_ = splitmix64(state_);
    return state_;
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Uniform in [lo, hi).
  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace tempcondlm

#endif  // TEMPCONDLM_COMMON_HPP
