/**
 * @file model.hpp
 * @brief Decoder-only transformer over delayed token grids with prepend
 * conditions, block-gated in-attention injection, jump-finetune freeze masks,
 * and classifier-free-guidance sampling.
 *
 * Layers are pre-norm with learned-scale residuals. Blocks are 4 layers; the
 * frame-wise condition projection is added to the token region of the residual
 * stream at the entry of every gated block. Analytic backward passes are
 * hand-written and checked against finite differences in the tests, so the
 * scalar type is a template parameter (double for gradient checks, float for
 * training).
 */

#ifndef TEMPCONDLM_MODEL_HPP
#define TEMPCONDLM_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tempcondlm/common.hpp"
#include "tempcondlm/conditions.hpp"
#include "tempcondlm/kernels.hpp"
#include "tempcondlm/mat.hpp"
#include "tempcondlm/tokens.hpp"

namespace tempcondlm {

struct ModelConfig {
  int L = 16;        // self-attention layers, multiple of 4
  int D = 128;       // model width
  int heads = 4;
  int K = 4;         // codebooks
  int N = 64;        // codebook size (PAD id = N)
  int n_genres = 5;  // genre tags; id n_genres is the null tag
  double f_s = 50.0;
  double f_M = 5.0;
  int max_frames = 576;

  static constexpr int kBlockSize = 4;
  int n_blocks() const { return L / kBlockSize; }
  int null_genre() const { return n_genres; }
  int vocab() const { return N + 1; }

  void validate() const {
    if (L < 4 || L % kBlockSize != 0)
      throw ConfigMismatch("L must be a positive multiple of 4");
    if (D % heads != 0) throw ConfigMismatch("D must be divisible by heads");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {{"L", c.L},        {"D", c.D},           {"heads", c.heads},
          {"K", c.K},        {"N", c.N},           {"n_genres", c.n_genres},
          {"f_s", c.f_s},    {"f_M", c.f_M},       {"max_frames", c.max_frames}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.L = j.at("L").get<int>();
  c.D = j.at("D").get<int>();
  c.heads = j.at("heads").get<int>();
  c.K = j.at("K").get<int>();
  c.N = j.at("N").get<int>();
  c.n_genres = j.at("n_genres").get<int>();
  c.f_s = j.at("f_s").get<double>();
  c.f_M = j.at("f_M").get<double>();
  c.max_frames = j.at("max_frames").get<int>();
  c.validate();
  return c;
}

/// Number of leading blocks that receive in-attention injection:
/// floor(3/4 of the blocks), at least one.
inline int in_attention_blocks(int n_blocks) {
  return std::max(1, 3 * n_blocks / 4);
}

enum class FinetuneMode { kJump, kJumpAdaptive, kJumpFull };

inline FinetuneMode parse_finetune_mode(const std::string& s) {
  if (s == "jump") return FinetuneMode::kJump;
  if (s == "jump+adaptive") return FinetuneMode::kJumpAdaptive;
  if (s == "jump+full") return FinetuneMode::kJumpFull;
  throw BadConfig("unknown finetune mode: " + s);
}

inline std::string finetune_mode_name(FinetuneMode m) {
  switch (m) {
    case FinetuneMode::kJump: return "jump";
    case FinetuneMode::kJumpAdaptive: return "jump+adaptive";
    case FinetuneMode::kJumpFull: return "jump+full";
  }
  return "jump+adaptive";
}

/// Per-block injection gates for a given mode.
inline std::vector<bool> condition_gates(int n_blocks, FinetuneMode mode) {
  std::vector<bool> gates(n_blocks, false);
  const int on = mode == FinetuneMode::kJump         ? 0
                 : mode == FinetuneMode::kJumpFull   ? n_blocks
                                                     : in_attention_blocks(n_blocks);
  for (int b = 0; b < on; ++b) gates[b] = true;
  return gates;
}

template <typename Real>
struct Param {
  std::string name;
  Mat<Real> value;
  Mat<Real> grad;
  bool trainable = true;

  void init_shape(const std::string& n, int r, int c) {
    name = n;
    value.resize(r, c);
    grad.resize(r, c);
  }
};

template <typename Real>
struct LayerParams {
  Param<Real> ln1_g, ln1_b;
  Param<Real> wq, bq, wk, bk, wv, bv, wo, bo;
  Param<Real> res_attn;
  Param<Real> ln2_g, ln2_b;
  Param<Real> w1, b1, w2, b2;
  Param<Real> res_mlp;
};

namespace detail {

template <typename Real>
Real gelu(Real x) {
  return Real(0.5) * x * (Real(1) + std::erf(x * Real(0.7071067811865476)));
}

template <typename Real>
Real gelu_grad(Real x) {
  const Real cdf = Real(0.5) * (Real(1) + std::erf(x * Real(0.7071067811865476)));
  const Real pdf = Real(0.3989422804014327) * std::exp(Real(-0.5) * x * x);
  return cdf + x * pdf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Forward cache (everything the analytic backward pass needs)
// ---------------------------------------------------------------------------

template <typename Real>
struct LayerCache {
  bool injected = false;
  Mat<Real> x_in;        // layer input after any injection, S x D
  Mat<Real> ln1_stats;   // S x 2 (mean, inv-std)
  Mat<Real> a;           // ln1 output
  Mat<Real> q, k, v;     // S x D
  Mat<Real> probs;       // (H*S) x S, row block per head, causal prefix rows
  Mat<Real> att_concat;  // S x D
  Mat<Real> att_out;     // S x D
  Mat<Real> x_mid;       // after attention residual
  Mat<Real> ln2_stats;
  Mat<Real> bn;          // ln2 output
  Mat<Real> m1, g, m2;   // S x 4D, S x 4D, S x D
  Mat<Real> x_out;       // layer output
};

template <typename Real>
struct ForwardCache {
  int S = 0, P = 0, T = 0;
  int genre_row = 0;  // genre id used for row 0
  Mat<Real> x0;       // embedded input sequence
  Mat<Real> cin13;    // T x 13 raw frame-wise conditions (empty if unused)
  Mat<Real> cinj;     // T x D projected injection (empty if unused)
  Mat<Real> c_pre;    // P x 12 prepended chroma (empty if absent)
  std::vector<LayerCache<Real>> layers;
  Mat<Real> lnf_stats;
  Mat<Real> f;        // final layernorm output
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

template <typename Real>
class Model {
 public:
  ModelConfig cfg;
  std::vector<Param<Real>> tok_emb;  // K tables, (N+1) x D
  Param<Real> genre_emb;             // (n_genres+1) x D
  Param<Real> prepend_w, prepend_b;  // 12 x D, 1 x D
  Param<Real> cond_w, cond_b;        // 13 x D, 1 x D
  std::vector<LayerParams<Real>> layers;
  Param<Real> lnf_g, lnf_b;
  std::vector<Param<Real>> head_w, head_b;  // K of D x (N+1), 1 x (N+1)

  explicit Model(const ModelConfig& config) : cfg(config) {
    cfg.validate();
    const int D = cfg.D, V = cfg.vocab();
    tok_emb.resize(cfg.K);
    for (int k = 0; k < cfg.K; ++k)
      tok_emb[k].init_shape("tok_emb." + std::to_string(k), V, D);
    genre_emb.init_shape("genre_emb", cfg.n_genres + 1, D);
    prepend_w.init_shape("prepend_proj.w", 12, D);
    prepend_b.init_shape("prepend_proj.b", 1, D);
    cond_w.init_shape("cond_proj.w", 13, D);
    cond_b.init_shape("cond_proj.b", 1, D);
    layers.resize(cfg.L);
    for (int l = 0; l < cfg.L; ++l) {
      const std::string p = "layer." + std::to_string(l) + ".";
      auto& lp = layers[l];
      lp.ln1_g.init_shape(p + "ln1.g", 1, D);
      lp.ln1_b.init_shape(p + "ln1.b", 1, D);
      lp.wq.init_shape(p + "attn.wq", D, D);
      lp.bq.init_shape(p + "attn.bq", 1, D);
      lp.wk.init_shape(p + "attn.wk", D, D);
      lp.bk.init_shape(p + "attn.bk", 1, D);
      lp.wv.init_shape(p + "attn.wv", D, D);
      lp.bv.init_shape(p + "attn.bv", 1, D);
      lp.wo.init_shape(p + "attn.wo", D, D);
      lp.bo.init_shape(p + "attn.bo", 1, D);
      lp.res_attn.init_shape(p + "attn.res_scale", 1, 1);
      lp.ln2_g.init_shape(p + "ln2.g", 1, D);
      lp.ln2_b.init_shape(p + "ln2.b", 1, D);
      lp.w1.init_shape(p + "mlp.w1", D, 4 * D);
      lp.b1.init_shape(p + "mlp.b1", 1, 4 * D);
      lp.w2.init_shape(p + "mlp.w2", 4 * D, D);
      lp.b2.init_shape(p + "mlp.b2", 1, D);
      lp.res_mlp.init_shape(p + "mlp.res_scale", 1, 1);
    }
    lnf_g.init_shape("final_norm.g", 1, D);
    lnf_b.init_shape("final_norm.b", 1, D);
    head_w.resize(cfg.K);
    head_b.resize(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
      head_w[k].init_shape("head." + std::to_string(k) + ".w", D, V);
      head_b[k].init_shape("head." + std::to_string(k) + ".b", 1, V);
    }
    gates_ = condition_gates(cfg.n_blocks(), FinetuneMode::kJumpAdaptive);
  }

  /// Registry in canonical order (checkpoint and optimizer order).
  std::vector<Param<Real>*> params() {
    std::vector<Param<Real>*> out;
    for (auto& p : tok_emb) out.push_back(&p);
    out.push_back(&genre_emb);
    out.push_back(&prepend_w);
    out.push_back(&prepend_b);
    out.push_back(&cond_w);
    out.push_back(&cond_b);
    for (auto& lp : layers) {
      for (Param<Real>* p :
           {&lp.ln1_g, &lp.ln1_b, &lp.wq, &lp.bq, &lp.wk, &lp.bk, &lp.wv,
            &lp.bv, &lp.wo, &lp.bo, &lp.res_attn, &lp.ln2_g, &lp.ln2_b,
            &lp.w1, &lp.b1, &lp.w2, &lp.b2, &lp.res_mlp})
        out.push_back(p);
    }
    out.push_back(&lnf_g);
    out.push_back(&lnf_b);
    for (int k = 0; k < cfg.K; ++k) {
      out.push_back(&head_w[k]);
      out.push_back(&head_b[k]);
    }
    return out;
  }

  void init_weights(std::uint64_t seed) {
    Rng rng(seed);
    for (Param<Real>* p : params()) {
      const std::string& n = p->name;
      const bool is_norm_gain = n.ends_with("ln1.g") || n.ends_with("ln2.g") ||
                                n == "final_norm.g";
      const bool is_res = n.ends_with("res_scale");
      const bool is_bias = n.ends_with(".b") || n.ends_with(".bq") ||
                           n.ends_with(".bk") || n.ends_with(".bv") ||
                           n.ends_with(".bo") || n.ends_with(".b1") ||
                           n.ends_with(".b2");
      if (is_norm_gain || is_res) {
        std::fill(p->value.data.begin(), p->value.data.end(), Real(1));
      } else if (is_bias) {
        p->value.zero();
      } else {
        for (auto& v : p->value.data)
          v = static_cast<Real>(rng.next_gaussian() * 0.02);
      }
    }
    // PAD rows start at zero so an all-PAD frame embeds to the zero vector.
    for (int k = 0; k < cfg.K; ++k)
      for (int c = 0; c < cfg.D; ++c) tok_emb[k].value.at(cfg.N, c) = Real(0);
  }

  void zero_grad() {
    for (Param<Real>* p : params()) p->grad.zero();
  }

  void set_finetune_mode(FinetuneMode mode) {
    mode_ = mode;
    gates_ = condition_gates(cfg.n_blocks(), mode);
  }
  FinetuneMode finetune_mode() const { return mode_; }
  const std::vector<bool>& gates() const { return gates_; }

  // -- forward -------------------------------------------------------------

  /// Full teacher-forced forward. Returns logits as a T x (K*(N+1)) matrix
  /// (token region only) and fills the cache for backward().
  Mat<Real> forward(const DelayedGrid& grid, const ConditionBundle& bundle,
                    ForwardCache<Real>& cache) const {
    const int T = grid.T, D = cfg.D;
    if (grid.K != cfg.K || grid.N != cfg.N)
      throw ShapeMismatch("grid codebooks do not match model config");
    const int P = bundle.c_pre_present ? bundle.c_pre.frames.rows : 0;
    const int S = 1 + P + T;
    if (S > cfg.max_frames + 1)
      throw LengthOverflow("sequence length " + std::to_string(S) +
                           " exceeds max_frames");

    cache.S = S;
    cache.P = P;
    cache.T = T;
    cache.genre_row = bundle.genre_present ? bundle.genre_id : cfg.null_genre();
    if (cache.genre_row < 0 || cache.genre_row > cfg.n_genres)
      throw ShapeMismatch("genre id out of range");

    // Input embedding: [genre] ++ [projected C_pre] ++ [token embeddings+PE].
    Mat<Real>& x0 = cache.x0;
    x0.resize(S, D);
    {
      const Real* g = genre_emb.value.row(cache.genre_row);
      std::copy(g, g + D, x0.row(0));
    }
    if (P > 0) {
      cache.c_pre.resize(P, 12);
      for (int i = 0; i < P; ++i)
        for (int c = 0; c < 12; ++c)
          cache.c_pre.at(i, c) = static_cast<Real>(bundle.c_pre.frames.at(i, c));
      kernels::gemm<Real>(false, false, P, D, 12, Real(1),
                          cache.c_pre.data.data(), 12, prepend_w.value.data.data(),
                          D, Real(0), x0.row(1), D);
      for (int i = 0; i < P; ++i) {
        Real* r = x0.row(1 + i);
        const Real* b = prepend_b.value.data.data();
        for (int c = 0; c < D; ++c) r[c] += b[c];
      }
    }
    for (int t = 0; t < T; ++t) {
      Real* r = x0.row(1 + P + t);
      for (int k = 0; k < cfg.K; ++k) {
        const int tok = t == 0 ? cfg.N : grid.at(t - 1, k);
        if (tok < 0 || tok > cfg.N) throw TokenOutOfRange("token out of range");
        const Real* e = tok_emb[k].value.row(tok);
        for (int c = 0; c < D; ++c) r[c] += e[c];
      }
      add_positional(r, t, D);
    }

    // Frame-wise condition projection, shared across gated blocks.
    const bool has_frame_cond = bundle.c_sum_present || bundle.r_present;
    cache.cin13.resize(0, 0);
    cache.cinj.resize(0, 0);
    if (has_frame_cond) {
      if (bundle.c_sum_present && bundle.c_sum.frames.rows != T)
        throw ShapeMismatch("C_sum length does not match grid");
      if (bundle.r_present && static_cast<int>(bundle.r.frames.size()) != T)
        throw ShapeMismatch("rhythm length does not match grid");
      cache.cin13.resize(T, 13);
      for (int t = 0; t < T; ++t) {
        Real* r = cache.cin13.row(t);
        if (bundle.c_sum_present) {
          const double* cs = bundle.c_sum.frames.row(t);
          for (int c = 0; c < 12; ++c) r[c] = static_cast<Real>(cs[c]);
        }
        if (bundle.r_present) r[12] = static_cast<Real>(bundle.r.frames[t]);
      }
      cache.cinj.resize(T, D);
      kernels::gemm<Real>(false, false, T, D, 13, Real(1),
                          cache.cin13.data.data(), 13, cond_w.value.data.data(),
                          D, Real(0), cache.cinj.data.data(), D);
      for (int t = 0; t < T; ++t) {
        Real* r = cache.cinj.row(t);
        const Real* b = cond_b.value.data.data();
        for (int c = 0; c < D; ++c) r[c] += b[c];
      }
    }

    cache.layers.resize(cfg.L);
    Mat<Real> x = x0;
    for (int l = 0; l < cfg.L; ++l) {
      LayerCache<Real>& lc = cache.layers[l];
      lc.injected = l % ModelConfig::kBlockSize == 0 &&
                    gates_[l / ModelConfig::kBlockSize] && has_frame_cond;
      if (lc.injected) {
        for (int t = 0; t < T; ++t) {
          Real* r = x.row(1 + P + t);
          const Real* cj = cache.cinj.row(t);
          for (int c = 0; c < D; ++c) r[c] += cj[c];
        }
      }
      layer_forward(l, x, lc);
    }

    // Final norm + per-codebook readout on the token region.
    cache.lnf_stats.resize(S, 2);
    cache.f.resize(S, D);
    layernorm_forward(x, lnf_g.value, lnf_b.value, cache.f, cache.lnf_stats);

    const int V = cfg.vocab();
    Mat<Real> logits(T, cfg.K * V);
    for (int k = 0; k < cfg.K; ++k) {
      kernels::gemm<Real>(false, false, T, V, D, Real(1), cache.f.row(1 + P),
                          D, head_w[k].value.data.data(), V, Real(0),
                          logits.data.data() + k * V, cfg.K * V);
      for (int t = 0; t < T; ++t) {
        Real* r = logits.row(t) + k * V;
        const Real* b = head_b[k].value.data.data();
        for (int c = 0; c < V; ++c) r[c] += b[c];
      }
    }
    return logits;
  }

  // -- backward ------------------------------------------------------------

  /// Accumulates parameter gradients given d(loss)/d(logits).
  void backward(const DelayedGrid& grid, const ForwardCache<Real>& cache,
                const Mat<Real>& dlogits) {
    const int D = cfg.D, V = cfg.vocab();
    const int S = cache.S, P = cache.P, T = cache.T;

    // Heads and final norm.
    Mat<Real> df(S, D);
    for (int k = 0; k < cfg.K; ++k) {
      kernels::gemm<Real>(false, true, T, D, V, Real(1),
                          dlogits.data.data() + k * V, cfg.K * V,
                          head_w[k].value.data.data(), V, Real(0),
                          scratch_td_.resize(T, D), D);
      for (int t = 0; t < T; ++t) {
        Real* dst = df.row(1 + P + t);
        const Real* src = scratch_td_.row_ptr(t);
        for (int c = 0; c < D; ++c) dst[c] += src[c];
      }
      kernels::gemm<Real>(true, false, D, V, T, Real(1), cache.f.row(1 + P), D,
                          dlogits.data.data() + k * V, cfg.K * V, Real(1),
                          head_w[k].grad.data.data(), V);
      for (int t = 0; t < T; ++t) {
        const Real* r = dlogits.row(t) + k * V;
        Real* gb = head_b[k].grad.data.data();
        for (int c = 0; c < V; ++c) gb[c] += r[c];
      }
    }

    Mat<Real> dx(S, D);
    const Mat<Real>& x_last = cfg.L > 0 ? layer_output(cache, cfg.L - 1) : cache.x0;
    layernorm_backward(x_last, lnf_g.value, cache.lnf_stats, df, lnf_g.grad,
                       lnf_b.grad, dx);

    Mat<Real> dcinj;
    if (cache.cinj.rows > 0) dcinj.resize(T, D);

    for (int l = cfg.L - 1; l >= 0; --l) {
      const Mat<Real>& x_in = cache.layers[l].x_in;
      layer_backward(l, x_in, cache.layers[l], dx);
      if (cache.layers[l].injected) {
        for (int t = 0; t < T; ++t) {
          const Real* r = dx.row(1 + P + t);
          Real* dj = dcinj.row(t);
          for (int c = 0; c < D; ++c) dj[c] += r[c];
        }
      }
    }

    // Condition projection gradients (accumulated over all gated blocks).
    if (dcinj.rows > 0) {
      kernels::gemm<Real>(true, false, 13, D, T, Real(1),
                          cache.cin13.data.data(), 13, dcinj.data.data(), D,
                          Real(1), cond_w.grad.data.data(), D);
      for (int t = 0; t < T; ++t) {
        const Real* r = dcinj.row(t);
        Real* gb = cond_b.grad.data.data();
        for (int c = 0; c < D; ++c) gb[c] += r[c];
      }
    }

    // Input embedding gradients.
    {
      const Real* r = dx.row(0);
      Real* g = genre_emb.grad.row(cache.genre_row);
      for (int c = 0; c < D; ++c) g[c] += r[c];
    }
    if (P > 0) {
      kernels::gemm<Real>(true, false, 12, D, P, Real(1),
                          cache.c_pre.data.data(), 12, dx.row(1), D, Real(1),
                          prepend_w.grad.data.data(), D);
      for (int i = 0; i < P; ++i) {
        const Real* r = dx.row(1 + i);
        Real* gb = prepend_b.grad.data.data();
        for (int c = 0; c < D; ++c) gb[c] += r[c];
      }
    }
    for (int t = 0; t < T; ++t) {
      const Real* r = dx.row(1 + P + t);
      for (int k = 0; k < cfg.K; ++k) {
        const int tok = t == 0 ? cfg.N : grid.at(t - 1, k);
        Real* g = tok_emb[k].grad.row(tok);
        for (int c = 0; c < D; ++c) g[c] += r[c];
      }
    }
  }

  // -- incremental decoding ------------------------------------------------

  struct DecodeState {
    std::vector<Mat<Real>> kcache, vcache;  // per layer, len x D
    int len = 0;
    int token_pos = 0;  // next token-region index
  };

  DecodeState make_decode_state(int capacity) const {
    DecodeState st;
    st.kcache.resize(cfg.L);
    st.vcache.resize(cfg.L);
    for (int l = 0; l < cfg.L; ++l) {
      st.kcache[l].resize(capacity, cfg.D);
      st.vcache[l].resize(capacity, cfg.D);
    }
    return st;
  }

  /// Processes the prefix (genre row + optional C_pre rows) of a bundle.
  void decode_prefix(DecodeState& st, const ConditionBundle& bundle) const {
    const int D = cfg.D;
    std::vector<Real> row(D);
    const int gid = bundle.genre_present ? bundle.genre_id : cfg.null_genre();
    const Real* g = genre_emb.value.row(gid);
    std::copy(g, g + D, row.begin());
    decode_row(st, row.data(), nullptr, nullptr);
    if (bundle.c_pre_present) {
      for (int i = 0; i < bundle.c_pre.frames.rows; ++i) {
        std::fill(row.begin(), row.end(), Real(0));
        const double* cp = bundle.c_pre.frames.row(i);
        for (int c = 0; c < D; ++c) {
          Real s = prepend_b.value.data[c];
          for (int p = 0; p < 12; ++p)
            s += static_cast<Real>(cp[p]) * prepend_w.value.at(p, c);
          row[c] = s;
        }
        decode_row(st, row.data(), nullptr, nullptr);
      }
    }
  }

  /// Feeds one token-region frame (the delayed input row for position t) and
  /// returns the K*(N+1) logits row predicting delayed frame t.
  std::vector<Real> decode_step(DecodeState& st, const int* delayed_in_row,
                                const Real* cinj_row) const {
    const int D = cfg.D;
    std::vector<Real> row(D, Real(0));
    for (int k = 0; k < cfg.K; ++k) {
      const int tok = delayed_in_row == nullptr ? cfg.N : delayed_in_row[k];
      const Real* e = tok_emb[k].value.row(tok);
      for (int c = 0; c < D; ++c) row[c] += e[c];
    }
    add_positional(row.data(), st.token_pos, D);
    ++st.token_pos;
    std::vector<Real> logits(cfg.K * cfg.vocab());
    decode_row(st, row.data(), cinj_row, logits.data());
    return logits;
  }

  /// Projects one frame of raw [C_sum ; R] conditions for injection.
  std::vector<Real> project_condition_row(const double* c_sum_row,
                                          double r_value, bool c_sum_present,
                                          bool r_present) const {
    const int D = cfg.D;
    std::vector<Real> in13(13, Real(0));
    if (c_sum_present && c_sum_row != nullptr)
      for (int p = 0; p < 12; ++p) in13[p] = static_cast<Real>(c_sum_row[p]);
    if (r_present) in13[12] = static_cast<Real>(r_value);
    std::vector<Real> out(D);
    for (int c = 0; c < D; ++c) {
      Real s = cond_b.value.data[c];
      for (int p = 0; p < 13; ++p) s += in13[p] * cond_w.value.at(p, c);
      out[c] = s;
    }
    return out;
  }

 private:
  FinetuneMode mode_ = FinetuneMode::kJumpAdaptive;
  std::vector<bool> gates_;

  // Small resizable scratch used by backward.
  struct Scratch {
    Mat<Real> m;
    Real* resize(int r, int c) {
      m.resize(r, c);
      return m.data.data();
    }
    const Real* row_ptr(int r) const { return m.row(r); }
  };
  mutable Scratch scratch_td_;

  static void add_positional(Real* row, int pos, int D) {
    for (int c = 0; c < D; c += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(c) / D);
      row[c] += static_cast<Real>(std::sin(angle));
      if (c + 1 < D) row[c + 1] += static_cast<Real>(std::cos(angle));
    }
  }

  static void layernorm_forward(const Mat<Real>& x, const Mat<Real>& gain,
                                const Mat<Real>& bias, Mat<Real>& y,
                                Mat<Real>& stats) {
    const int S = x.rows, D = x.cols;
    y.resize(S, D);
    stats.resize(S, 2);
    for (int i = 0; i < S; ++i) {
      const Real* xr = x.row(i);
      Real mean = 0;
      for (int c = 0; c < D; ++c) mean += xr[c];
      mean /= D;
      Real var = 0;
      for (int c = 0; c < D; ++c) {
        const Real d = xr[c] - mean;
        var += d * d;
      }
      var /= D;
      const Real inv = Real(1) / std::sqrt(var + Real(1e-5));
      stats.at(i, 0) = mean;
      stats.at(i, 1) = inv;
      Real* yr = y.row(i);
      const Real* g = gain.data.data();
      const Real* b = bias.data.data();
      for (int c = 0; c < D; ++c) yr[c] = g[c] * (xr[c] - mean) * inv + b[c];
    }
  }

  static void layernorm_backward(const Mat<Real>& x, const Mat<Real>& gain,
                                 const Mat<Real>& stats, const Mat<Real>& dy,
                                 Mat<Real>& dgain, Mat<Real>& dbias,
                                 Mat<Real>& dx_acc) {
    const int S = x.rows, D = x.cols;
    for (int i = 0; i < S; ++i) {
      const Real* xr = x.row(i);
      const Real* dyr = dy.row(i);
      const Real mean = stats.at(i, 0);
      const Real inv = stats.at(i, 1);
      Real sum_dxhat = 0, sum_dxhat_xhat = 0;
      for (int c = 0; c < D; ++c) {
        const Real xhat = (xr[c] - mean) * inv;
        const Real dxhat = dyr[c] * gain.data[c];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
        dgain.data[c] += dyr[c] * xhat;
        dbias.data[c] += dyr[c];
      }
      Real* dxr = dx_acc.row(i);
      for (int c = 0; c < D; ++c) {
        const Real xhat = (xr[c] - mean) * inv;
        const Real dxhat = dyr[c] * gain.data[c];
        dxr[c] += inv * (dxhat - (sum_dxhat + xhat * sum_dxhat_xhat) / D);
      }
    }
  }

  const Mat<Real>& layer_output(const ForwardCache<Real>& cache, int l) const {
    // The output of layer l is the input of layer l+1 minus any injection at
    // l+1; we cache x_in per layer, so reconstruct via x_mid + res*mlp. To
    // avoid that, layer_forward stores its own output in x_out_.
    return cache.layers[l].x_out;
  }

 public:
  // Exposed for the training loop: sequence position helpers.
  int prepend_rows(const ConditionBundle& bundle) const {
    return bundle.c_pre_present ? bundle.c_pre.frames.rows : 0;
  }

 private:
  void layer_forward(int l, Mat<Real>& x, LayerCache<Real>& lc) const {
    const int S = x.rows, D = cfg.D, H = cfg.heads, dh = D / H;
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
    const auto& lp = layers[l];

    lc.x_in = x;
    layernorm_forward(x, lp.ln1_g.value, lp.ln1_b.value, lc.a, lc.ln1_stats);
    kernels::linear(lc.a, lp.wq.value, lp.bq.value, lc.q);
    kernels::linear(lc.a, lp.wk.value, lp.bk.value, lc.k);
    kernels::linear(lc.a, lp.wv.value, lp.bv.value, lc.v);

    lc.probs.resize(H * S, S);
    lc.att_concat.resize(S, D);
    for (int h = 0; h < H; ++h) {
      Real* probs = lc.probs.row(h * S);
      // scores(i,j) = q_i . k_j * scale for j <= i
      kernels::gemm<Real>(false, true, S, S, dh, scale,
                          lc.q.data.data() + h * dh, D,
                          lc.k.data.data() + h * dh, D, Real(0), probs, S);
      for (int i = 0; i < S; ++i) {
        Real* row = probs + static_cast<std::size_t>(i) * S;
        kernels::softmax_row(row, i + 1);
        for (int j = i + 1; j < S; ++j) row[j] = Real(0);
      }
      kernels::gemm<Real>(false, false, S, dh, S, Real(1), probs, S,
                          lc.v.data.data() + h * dh, D, Real(0),
                          lc.att_concat.data.data() + h * dh, D);
    }
    kernels::linear(lc.att_concat, lp.wo.value, lp.bo.value, lc.att_out);

    lc.x_mid.resize(S, D);
    const Real ra = lp.res_attn.value.data[0];
    for (std::size_t i = 0; i < x.data.size(); ++i)
      lc.x_mid.data[i] = x.data[i] + ra * lc.att_out.data[i];

    layernorm_forward(lc.x_mid, lp.ln2_g.value, lp.ln2_b.value, lc.bn,
                      lc.ln2_stats);
    kernels::linear(lc.bn, lp.w1.value, lp.b1.value, lc.m1);
    lc.g.resize(S, 4 * D);
    for (std::size_t i = 0; i < lc.m1.data.size(); ++i)
      lc.g.data[i] = detail::gelu(lc.m1.data[i]);
    kernels::linear(lc.g, lp.w2.value, lp.b2.value, lc.m2);

    const Real rm = lp.res_mlp.value.data[0];
    lc.x_out.resize(S, D);
    for (std::size_t i = 0; i < x.data.size(); ++i)
      lc.x_out.data[i] = lc.x_mid.data[i] + rm * lc.m2.data[i];
    x = lc.x_out;
  }

  void layer_backward(int l, const Mat<Real>& x_in, const LayerCache<Real>& lc,
                      Mat<Real>& dx) {
    const int S = x_in.rows, D = cfg.D, H = cfg.heads, dh = D / H;
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
    auto& lp = layers[l];

    // MLP branch: x_out = x_mid + rm * m2.
    Real drm = 0;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
      drm += dx.data[i] * lc.m2.data[i];
    lp.res_mlp.grad.data[0] += drm;
    const Real rm = lp.res_mlp.value.data[0];

    Mat<Real> dm2(S, D);
    for (std::size_t i = 0; i < dx.data.size(); ++i)
      dm2.data[i] = dx.data[i] * rm;

    Mat<Real> dg(S, 4 * D);
    kernels::gemm<Real>(false, true, S, 4 * D, D, Real(1), dm2.data.data(), D,
                        lp.w2.value.data.data(), D, Real(0), dg.data.data(),
                        4 * D);
    kernels::gemm<Real>(true, false, 4 * D, D, S, Real(1), lc.g.data.data(),
                        4 * D, dm2.data.data(), D, Real(1),
                        lp.w2.grad.data.data(), D);
    for (int i = 0; i < S; ++i) {
      const Real* r = dm2.row(i);
      Real* gb = lp.b2.grad.data.data();
      for (int c = 0; c < D; ++c) gb[c] += r[c];
    }

    Mat<Real> dm1(S, 4 * D);
    for (std::size_t i = 0; i < dm1.data.size(); ++i)
      dm1.data[i] = dg.data[i] * detail::gelu_grad(lc.m1.data[i]);

    Mat<Real> dbn(S, D);
    kernels::gemm<Real>(false, true, S, D, 4 * D, Real(1), dm1.data.data(),
                        4 * D, lp.w1.value.data.data(), 4 * D, Real(0),
                        dbn.data.data(), D);
    kernels::gemm<Real>(true, false, D, 4 * D, S, Real(1), lc.bn.data.data(),
                        D, dm1.data.data(), 4 * D, Real(1),
                        lp.w1.grad.data.data(), 4 * D);
    for (int i = 0; i < S; ++i) {
      const Real* r = dm1.row(i);
      Real* gb = lp.b1.grad.data.data();
      for (int c = 0; c < 4 * D; ++c) gb[c] += r[c];
    }

    // dx currently holds d(x_out); the residual passthrough keeps it, the norm
    // path adds into it.
    layernorm_backward(lc.x_mid, lp.ln2_g.value, lc.ln2_stats, dbn,
                       lp.ln2_g.grad, lp.ln2_b.grad, dx);

    // Attention branch: x_mid = x_in + ra * att_out.
    Real dra = 0;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
      dra += dx.data[i] * lc.att_out.data[i];
    lp.res_attn.grad.data[0] += dra;
    const Real ra = lp.res_attn.value.data[0];

    Mat<Real> datt_out(S, D);
    for (std::size_t i = 0; i < dx.data.size(); ++i)
      datt_out.data[i] = dx.data[i] * ra;

    Mat<Real> datt_concat(S, D);
    kernels::gemm<Real>(false, true, S, D, D, Real(1), datt_out.data.data(), D,
                        lp.wo.value.data.data(), D, Real(0),
                        datt_concat.data.data(), D);
    kernels::gemm<Real>(true, false, D, D, S, Real(1),
                        lc.att_concat.data.data(), D, datt_out.data.data(), D,
                        Real(1), lp.wo.grad.data.data(), D);
    for (int i = 0; i < S; ++i) {
      const Real* r = datt_out.row(i);
      Real* gb = lp.bo.grad.data.data();
      for (int c = 0; c < D; ++c) gb[c] += r[c];
    }

    Mat<Real> dq(S, D), dk(S, D), dv(S, D);
    Mat<Real> dprobs(S, S);
    for (int h = 0; h < H; ++h) {
      const Real* probs = lc.probs.row(h * S);
      // dprobs = datt_h * V_h^T
      kernels::gemm<Real>(false, true, S, S, dh, Real(1),
                          datt_concat.data.data() + h * dh, D,
                          lc.v.data.data() + h * dh, D, Real(0),
                          dprobs.data.data(), S);
      // dV_h += probs^T * datt_h
      kernels::gemm<Real>(true, false, S, dh, S, Real(1), probs, S,
                          datt_concat.data.data() + h * dh, D, Real(1),
                          dv.data.data() + h * dh, D);
      // softmax backward, in place on dprobs; rows keep their causal prefix.
      for (int i = 0; i < S; ++i) {
        const Real* prow = probs + static_cast<std::size_t>(i) * S;
        Real* dprow = dprobs.row(i);
        Real dot = 0;
        for (int j = 0; j <= i; ++j) dot += dprow[j] * prow[j];
        for (int j = 0; j <= i; ++j) dprow[j] = prow[j] * (dprow[j] - dot);
        for (int j = i + 1; j < S; ++j) dprow[j] = Real(0);
      }
      // dQ_h += dscores * K_h * scale ; dK_h += dscores^T * Q_h * scale
      kernels::gemm<Real>(false, false, S, dh, S, scale, dprobs.data.data(), S,
                          lc.k.data.data() + h * dh, D, Real(1),
                          dq.data.data() + h * dh, D);
      kernels::gemm<Real>(true, false, S, dh, S, scale, dprobs.data.data(), S,
                          lc.q.data.data() + h * dh, D, Real(1),
                          dk.data.data() + h * dh, D);
    }

    Mat<Real> da(S, D);
    kernels::gemm<Real>(false, true, S, D, D, Real(1), dq.data.data(), D,
                        lp.wq.value.data.data(), D, Real(0), da.data.data(), D);
    kernels::gemm<Real>(false, true, S, D, D, Real(1), dk.data.data(), D,
                        lp.wk.value.data.data(), D, Real(1), da.data.data(), D);
    kernels::gemm<Real>(false, true, S, D, D, Real(1), dv.data.data(), D,
                        lp.wv.value.data.data(), D, Real(1), da.data.data(), D);
    kernels::gemm<Real>(true, false, D, D, S, Real(1), lc.a.data.data(), D,
                        dq.data.data(), D, Real(1), lp.wq.grad.data.data(), D);
    kernels::gemm<Real>(true, false, D, D, S, Real(1), lc.a.data.data(), D,
                        dk.data.data(), D, Real(1), lp.wk.grad.data.data(), D);
    kernels::gemm<Real>(true, false, D, D, S, Real(1), lc.a.data.data(), D,
                        dv.data.data(), D, Real(1), lp.wv.grad.data.data(), D);
    for (int i = 0; i < S; ++i) {
      Real* gq = lp.bq.grad.data.data();
      Real* gk = lp.bk.grad.data.data();
      Real* gv = lp.bv.grad.data.data();
      const Real* rq = dq.row(i);
      const Real* rk = dk.row(i);
      const Real* rv = dv.row(i);
      for (int c = 0; c < D; ++c) {
        gq[c] += rq[c];
        gk[c] += rk[c];
        gv[c] += rv[c];
      }
    }

    layernorm_backward(x_in, lp.ln1_g.value, lc.ln1_stats, da, lp.ln1_g.grad,
                       lp.ln1_b.grad, dx);
  }

  /// One sequence position through all layers with KV caching. logits_out may
  /// be null (prefix rows need no readout).
  void decode_row(DecodeState& st, Real* row, const Real* cinj_row,
                  Real* logits_out) const {
    const int D = cfg.D, H = cfg.heads, dh = D / H;
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
    const int pos = st.len;
    std::vector<Real> a(D), q(D), att(D), tmp(D);
    std::vector<Real> scores(pos + 1);
    for (int l = 0; l < cfg.L; ++l) {
      const auto& lp = layers[l];
      if (cinj_row != nullptr && l % ModelConfig::kBlockSize == 0 &&
          gates_[l / ModelConfig::kBlockSize]) {
        for (int c = 0; c < D; ++c) row[c] += cinj_row[c];
      }
      layernorm_row(row, lp.ln1_g.value, lp.ln1_b.value, a.data(), D);
      Real* krow = st.kcache[l].row(pos);
      Real* vrow = st.vcache[l].row(pos);
      linear_row(a.data(), lp.wq.value, lp.bq.value, q.data());
      linear_row(a.data(), lp.wk.value, lp.bk.value, krow);
      linear_row(a.data(), lp.wv.value, lp.bv.value, vrow);
      for (int h = 0; h < H; ++h) {
        const Real* qh = q.data() + h * dh;
        for (int j = 0; j <= pos; ++j) {
          const Real* kh = st.kcache[l].row(j) + h * dh;
          Real s = 0;
          for (int c = 0; c < dh; ++c) s += qh[c] * kh[c];
          scores[j] = s * scale;
        }
        kernels::softmax_row(scores.data(), pos + 1);
        Real* oh = att.data() + h * dh;
        std::fill(oh, oh + dh, Real(0));
        for (int j = 0; j <= pos; ++j) {
          const Real* vh = st.vcache[l].row(j) + h * dh;
          const Real p = scores[j];
          for (int c = 0; c < dh; ++c) oh[c] += p * vh[c];
        }
      }
      linear_row(att.data(), lp.wo.value, lp.bo.value, tmp.data());
      const Real ra = lp.res_attn.value.data[0];
      for (int c = 0; c < D; ++c) row[c] += ra * tmp[c];
      layernorm_row(row, lp.ln2_g.value, lp.ln2_b.value, a.data(), D);
      // MLP row
      mlp_row(lp, a.data(), tmp.data());
      const Real rmv = lp.res_mlp.value.data[0];
      for (int c = 0; c < D; ++c) row[c] += rmv * tmp[c];
    }
    ++st.len;
    if (logits_out != nullptr) {
      layernorm_row(row, lnf_g.value, lnf_b.value, a.data(), D);
      const int V = cfg.vocab();
      for (int k = 0; k < cfg.K; ++k) {
        Real* out = logits_out + k * V;
        const Real* b = head_b[k].value.data.data();
        std::copy(b, b + V, out);
        kernels::gemm<Real>(false, false, 1, V, D, Real(1), a.data(), D,
                            head_w[k].value.data.data(), V, Real(1), out, V);
      }
    }
  }

  static void layernorm_row(const Real* x, const Mat<Real>& gain,
                            const Mat<Real>& bias, Real* y, int D) {
    Real mean = 0;
    for (int c = 0; c < D; ++c) mean += x[c];
    mean /= D;
    Real var = 0;
    for (int c = 0; c < D; ++c) {
      const Real d = x[c] - mean;
      var += d * d;
    }
    var /= D;
    const Real inv = Real(1) / std::sqrt(var + Real(1e-5));
    for (int c = 0; c < D; ++c)
      y[c] = gain.data[c] * (x[c] - mean) * inv + bias.data[c];
  }

  void linear_row(const Real* x, const Mat<Real>& w, const Mat<Real>& b,
                  Real* y) const {
    const int D = w.rows, O = w.cols;
    std::copy(b.data.data(), b.data.data() + O, y);
    kernels::gemm<Real>(false, false, 1, O, D, Real(1), x, D, w.data.data(), O,
                        Real(1), y, O);
  }

  void mlp_row(const LayerParams<Real>& lp, const Real* x, Real* y) const {
    const int D = cfg.D;
    std::vector<Real> hidden(4 * D);
    linear_row(x, lp.w1.value, lp.b1.value, hidden.data());
    for (auto& v : hidden) v = detail::gelu(v);
    linear_row(hidden.data(), lp.w2.value, lp.b2.value, y);
  }
};

// ---------------------------------------------------------------------------
// Freeze mask (jump finetuning)
// ---------------------------------------------------------------------------

/// Trainable groups: the first layer of every 4-layer block plus both
/// condition projections. Everything else (embeddings, other layers, final
/// norm, heads) is frozen.
inline std::map<std::string, bool> freeze_mask_for_jump_finetune(
    const ModelConfig& cfg) {
  cfg.validate();
  Model<float> probe(cfg);
  std::map<std::string, bool> mask;
  for (auto* p : probe.params()) {
    const std::string& n = p->name;
    bool trainable = false;
    if (n.starts_with("cond_proj.") || n.starts_with("prepend_proj.")) {
      trainable = true;
    } else if (n.starts_with("layer.")) {
      const int idx = std::stoi(n.substr(6));
      trainable = idx % ModelConfig::kBlockSize == 0;
    }
    mask[n] = trainable;
  }
  return mask;
}

template <typename Real>
void apply_freeze_mask(Model<Real>& model,
                       const std::map<std::string, bool>& mask) {
  for (auto* p : model.params()) {
    auto it = mask.find(p->name);
    p->trainable = it != mask.end() && it->second;
  }
}

template <typename Real>
void set_all_trainable(Model<Real>& model) {
  for (auto* p : model.params()) p->trainable = true;
}

// ---------------------------------------------------------------------------
// Classifier-free guidance
// ---------------------------------------------------------------------------

/// (1 - gamma) * uncond + gamma * cond, elementwise on raw logits.
template <typename Real>
Mat<Real> cfg_logits(const Mat<Real>& cond, const Mat<Real>& uncond,
                     Real gamma) {
  if (cond.rows != uncond.rows || cond.cols != uncond.cols)
    throw ShapeMismatch("cfg_logits shape mismatch");
  Mat<Real> out(cond.rows, cond.cols);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = (Real(1) - gamma) * uncond.data[i] + gamma * cond.data[i];
  return out;
}

/// Returns a copy of the bundle with all conditions nulled.
inline ConditionBundle null_bundle_like(const ConditionBundle& b) {
  ConditionBundle out = b;
  out.c_pre_present = false;
  out.c_sum_present = false;
  out.r_present = false;
  out.genre_present = false;
  return out;
}

/// With probability p, replaces the whole bundle by the null bundle.
inline ConditionBundle condition_dropout(const ConditionBundle& bundle,
                                         double p, Rng& rng) {
  if (p <= 0.0) return bundle;
  if (p >= 1.0 || rng.next_double() < p) return null_bundle_like(bundle);
  return bundle;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct SampleOptions {
  double gamma = 3.0;
  int n_frames = 0;
  double temperature = 1.0;
  int top_k = 0;  // 0 = no truncation
  std::uint64_t seed = 0;
};

namespace detail {

/// Categorical draw over logits[0..n), PAD class excluded. temperature == 0
/// means greedy argmax (lowest index wins ties).
template <typename Real>
int sample_class(const Real* logits, int n, int pad_id, double temperature,
                 int top_k, Rng& rng) {
  std::vector<int> idx;
  idx.reserve(n);
  for (int i = 0; i < n; ++i)
    if (i != pad_id) idx.push_back(i);
  if (temperature <= 0.0) {
    int best = idx[0];
    for (int i : idx)
      if (logits[i] > logits[best]) best = i;
    return best;
  }
  if (top_k > 0 && top_k < static_cast<int>(idx.size())) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return logits[a] > logits[b];
    });
    idx.resize(top_k);
  }
  double mx = logits[idx[0]];
  for (int i : idx) mx = std::max(mx, static_cast<double>(logits[i]));
  std::vector<double> probs(idx.size());
  double sum = 0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    probs[j] = std::exp((static_cast<double>(logits[idx[j]]) - mx) / temperature);
    sum += probs[j];
  }
  const double u = rng.next_double() * sum;
  double acc = 0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    acc += probs[j];
    if (u < acc) return idx[j];
  }
  return idx.back();
}

}  // namespace detail

/// Autoregressive CFG sampling. Runs conditional and null-bundle decoding in
/// lockstep, mixes logits with the guidance scale, samples each codebook in
/// delay-pattern order, and returns the un-delayed grid.
template <typename Real>
TokenGrid sample(const Model<Real>& model, const ConditionBundle& bundle,
                 const SampleOptions& opt) {
  const ModelConfig& cfg = model.cfg;
  const int T = opt.n_frames;
  const int P = bundle.c_pre_present ? bundle.c_pre.frames.rows : 0;
  if (1 + P + T > cfg.max_frames + 1)
    throw LengthOverflow("sample length exceeds max_frames");

  const ConditionBundle null_bundle = null_bundle_like(bundle);
  auto st_c = model.make_decode_state(1 + P + T);
  auto st_u = model.make_decode_state(1 + T);
  model.decode_prefix(st_c, bundle);
  model.decode_prefix(st_u, null_bundle);

  const bool frame_cond = bundle.c_sum_present || bundle.r_present;
  Rng rng(opt.seed);
  DelayedGrid delayed(T, cfg.K, cfg.N);
  const int V = cfg.vocab();
  std::vector<int> prev_row;  // delayed row t-1 fed at step t
  for (int t = 0; t < T; ++t) {
    std::vector<Real> cinj;
    if (frame_cond) {
      cinj = model.project_condition_row(
          bundle.c_sum_present ? bundle.c_sum.frames.row(t) : nullptr,
          bundle.r_present ? bundle.r.frames[t] : 0.0, bundle.c_sum_present,
          bundle.r_present);
    }
    const int* in_row = t == 0 ? nullptr : prev_row.data();
    auto logits_c = model.decode_step(st_c, in_row,
                                      frame_cond ? cinj.data() : nullptr);
    auto logits_u = model.decode_step(st_u, in_row, nullptr);
    for (int k = 0; k < cfg.K; ++k) {
      Real* lc = logits_c.data() + k * V;
      const Real* lu = logits_u.data() + k * V;
      for (int c = 0; c < V; ++c)
        lc[c] = (Real(1) - static_cast<Real>(opt.gamma)) * lu[c] +
                static_cast<Real>(opt.gamma) * lc[c];
      delayed.at(t, k) = t < k ? cfg.N
                               : detail::sample_class(lc, V, cfg.N,
                                                      opt.temperature,
                                                      opt.top_k, rng);
    }
    prev_row.assign(cfg.K, 0);
    for (int k = 0; k < cfg.K; ++k) prev_row[k] = delayed.at(t, k);
  }
  return invert_delay_pattern(delayed);
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_MODEL_HPP
