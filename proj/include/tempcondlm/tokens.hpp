/**
 * @file tokens.hpp
 * @brief Multi-codebook token grids, the delay pattern, and codebook-summed
 * embeddings.
 *
 * Codebook k is shifted right by k frames; the reserved PAD id is N. The tail
 * frames lost to the delay are unrecoverable and come back as PAD from the
 * inverse.
 */

#ifndef TEMPCONDLM_TOKENS_HPP
#define TEMPCONDLM_TOKENS_HPP

#include <nlohmann/json.hpp>
#include <vector>

#include "tempcondlm/common.hpp"
#include "tempcondlm/mat.hpp"

namespace tempcondlm {

struct TokenGrid {
  int T = 0;
  int K = 0;
  int N = 0;  // codebook size; PAD id is N (only valid in delayed grids)
  std::vector<int> tokens;  // row-major T x K

  TokenGrid() = default;
  TokenGrid(int t, int k, int n) : T(t), K(k), N(n), tokens(static_cast<std::size_t>(t) * k, 0) {}
  int& at(int t, int k) { return tokens[static_cast<std::size_t>(t) * K + k]; }
  int at(int t, int k) const { return tokens[static_cast<std::size_t>(t) * K + k]; }
  int pad_id() const { return N; }
};

/// Same layout as TokenGrid; entries may be PAD (= N).
using DelayedGrid = TokenGrid;

/// K independent lookup tables, each (N+1) x D; row N is PAD.
template <typename Real>
struct EmbeddingTables {
  std::vector<Mat<Real>> tables;
  int dim() const { return tables.empty() ? 0 : tables[0].cols; }
};

/// Shifts codebook k right by k frames, left-filling with PAD. The last k
/// tokens of codebook k fall off the end.
inline DelayedGrid apply_delay_pattern(const TokenGrid& grid) {
  DelayedGrid out(grid.T, grid.K, grid.N);
  for (int t = 0; t < grid.T; ++t)
    for (int k = 0; k < grid.K; ++k)
      out.at(t, k) = t < k ? grid.pad_id() : grid.at(t - k, k);
  return out;
}

/// Left-shifts codebook k by k frames. Tail positions t >= T-k are
/// unrecoverable and filled with PAD. Throws InconsistentPad when PAD shows up
/// outside the diagonal region.
inline TokenGrid invert_delay_pattern(const DelayedGrid& grid) {
  TokenGrid out(grid.T, grid.K, grid.N);
  for (int k = 0; k < grid.K; ++k) {
    for (int t = 0; t < grid.T; ++t) {
      if (t < k) {
        if (grid.at(t, k) != grid.pad_id())
          throw InconsistentPad("expected PAD at (" + std::to_string(t) + "," +
                                std::to_string(k) + ")");
        continue;
      }
      if (grid.at(t, k) == grid.pad_id())
        throw InconsistentPad("unexpected PAD at (" + std::to_string(t) + "," +
                              std::to_string(k) + ")");
    }
    for (int t = 0; t < grid.T; ++t)
      out.at(t, k) = t + k < grid.T ? grid.at(t + k, k) : grid.pad_id();
  }
  return out;
}

/// Row t = sum over codebooks of tables[k][grid(t,k)].
template <typename Real>
Mat<Real> embed_grid(const DelayedGrid& grid, const EmbeddingTables<Real>& tables) {
  if (static_cast<int>(tables.tables.size()) != grid.K)
    throw ShapeMismatch("embedding table count does not match codebooks");
  const int d = tables.dim();
  Mat<Real> out(grid.T, d);
  for (int t = 0; t < grid.T; ++t) {
    Real* row = out.row(t);
    for (int k = 0; k < grid.K; ++k) {
      const int tok = grid.at(t, k);
      if (tok < 0 || tok > grid.N)
        throw TokenOutOfRange("token " + std::to_string(tok) + " at (" +
                              std::to_string(t) + "," + std::to_string(k) + ")");
      const Real* e = tables.tables[k].row(tok);
      for (int c = 0; c < d; ++c) row[c] += e[c];
    }
  }
  return out;
}

// JSON-lines record: {"T":int,"K":int,"N":int,"tokens":[[...]]}.

inline nlohmann::json grid_to_json(const TokenGrid& grid) {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < grid.T; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < grid.K; ++k) row.push_back(grid.at(t, k));
    rows.push_back(std::move(row));
  }
  return {{"T", grid.T}, {"K", grid.K}, {"N", grid.N}, {"tokens", std::move(rows)}};
}

inline TokenGrid grid_from_json(const nlohmann::json& j) {
  TokenGrid grid(j.at("T").get<int>(), j.at("K").get<int>(), j.at("N").get<int>());
  const auto& rows = j.at("tokens");
  if (static_cast<int>(rows.size()) != grid.T)
    throw IoError("token grid row count mismatch");
  for (int t = 0; t < grid.T; ++t) {
    if (static_cast<int>(rows[t].size()) != grid.K)
      throw IoError("token grid column count mismatch");
    for (int k = 0; k < grid.K; ++k) grid.at(t, k) = rows[t][k].get<int>();
  }
  return grid;
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_TOKENS_HPP
