/**
 * @file training.hpp
 * @brief Two-stage optimization: pretrain a genre-only base model, then
 * jump-finetune with temporal conditions.
 *
 * Loss is mean cross-entropy over non-PAD target positions. The optimizer is
 * Adam with linear warmup; moments are kept in double regardless of the model
 * scalar type. Batches are processed in index order so runs are reproducible.
 */

#ifndef TEMPCONDLM_TRAINING_HPP
#define TEMPCONDLM_TRAINING_HPP

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "tempcondlm/common.hpp"
#include "tempcondlm/dataset.hpp"
#include "tempcondlm/model.hpp"

namespace tempcondlm {

enum class TrainStage { kPretrain, kFinetune };

struct TrainConfig {
  TrainStage stage = TrainStage::kPretrain;
  int steps = 5000;
  int batch_size = 16;
  double learning_rate = 3e-4;
  int warmup_steps = 500;
  double dropout_p = 0.5;
  double gamma_eval = 3.0;
  std::uint64_t seed = 0;
  // Conditions nulled for the whole run (subset of {c_pre, c_sum, r}).
  // Ignored during pretrain, where temporal conditions are always masked.
  std::set<std::string> condition_ablation;
  int eval_every = 500;
};

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

/// Mean cross-entropy over all (t, k) whose target is not PAD. Logits are a
/// T x (K*(N+1)) matrix; targets a delayed grid of matching shape.
template <typename Real>
double loss(const Mat<Real>& logits, const DelayedGrid& targets) {
  const int V = targets.N + 1;
  if (logits.rows != targets.T || logits.cols != targets.K * V)
    throw ShapeMismatch("loss shape mismatch");
  double total = 0;
  long count = 0;
  for (int t = 0; t < targets.T; ++t) {
    for (int k = 0; k < targets.K; ++k) {
      const int y = targets.at(t, k);
      if (y == targets.pad_id()) continue;
      const Real* row = logits.row(t) + k * V;
      double mx = row[0];
      for (int c = 1; c < V; ++c) mx = std::max(mx, static_cast<double>(row[c]));
      double sum = 0;
      for (int c = 0; c < V; ++c) sum += std::exp(static_cast<double>(row[c]) - mx);
      total += std::log(sum) - (static_cast<double>(row[y]) - mx);
      ++count;
    }
  }
  return count > 0 ? total / count : 0.0;
}

/// d(loss)/d(logits), scaled by an extra factor (1/batch for averaging).
template <typename Real>
Mat<Real> loss_grad(const Mat<Real>& logits, const DelayedGrid& targets,
                    double scale = 1.0) {
  const int V = targets.N + 1;
  if (logits.rows != targets.T || logits.cols != targets.K * V)
    throw ShapeMismatch("loss shape mismatch");
  long count = 0;
  for (int t = 0; t < targets.T; ++t)
    for (int k = 0; k < targets.K; ++k)
      if (targets.at(t, k) != targets.pad_id()) ++count;
  Mat<Real> dlogits(logits.rows, logits.cols);
  if (count == 0) return dlogits;
  const double w = scale / count;
  for (int t = 0; t < targets.T; ++t) {
    for (int k = 0; k < targets.K; ++k) {
      const int y = targets.at(t, k);
      if (y == targets.pad_id()) continue;  // PAD rows stay zero
      const Real* row = logits.row(t) + k * V;
      Real* drow = dlogits.row(t) + k * V;
      double mx = row[0];
      for (int c = 1; c < V; ++c) mx = std::max(mx, static_cast<double>(row[c]));
      double sum = 0;
      for (int c = 0; c < V; ++c) sum += std::exp(static_cast<double>(row[c]) - mx);
      for (int c = 0; c < V; ++c) {
        const double p = std::exp(static_cast<double>(row[c]) - mx) / sum;
        drow[c] = static_cast<Real>((p - (c == y ? 1.0 : 0.0)) * w);
      }
    }
  }
  return dlogits;
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

template <typename Real>
class Adam {
 public:
  Adam(std::vector<Param<Real>*> params, double lr, int warmup_steps)
      : params_(std::move(params)), lr_(lr), warmup_(warmup_steps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i]->value.size(), 0.0);
      v_[i].assign(params_[i]->value.size(), 0.0);
    }
  }

  void step() {
    ++t_;
    const double warm = warmup_ > 0 ? std::min(1.0, static_cast<double>(t_) / warmup_) : 1.0;
    const double lr = lr_ * warm;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param<Real>* p = params_[i];
      if (!p->trainable) continue;
      for (std::size_t j = 0; j < p->value.size(); ++j) {
        const double g = static_cast<double>(p->grad.data[j]);
        m_[i][j] = kBeta1 * m_[i][j] + (1.0 - kBeta1) * g;
        v_[i][j] = kBeta2 * v_[i][j] + (1.0 - kBeta2) * g * g;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p->value.data[j] -= static_cast<Real>(lr * mhat / (std::sqrt(vhat) + kEps));
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<Param<Real>*> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_;
  int warmup_;
  long t_ = 0;
};

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

/// One clip ready for optimization.
struct TrainItem {
  ConditionBundle bundle;
  DelayedGrid delayed;
};

/// Nulls every condition named in the ablation subset.
inline void apply_ablation(ConditionBundle& b,
                           const std::set<std::string>& ablation) {
  for (const auto& name : ablation)
    if (name != "c_pre" && name != "c_sum" && name != "r")
      throw BadConfig("unknown ablation target: " + name);
  if (ablation.count("c_pre")) b.c_pre_present = false;
  if (ablation.count("c_sum")) b.c_sum_present = false;
  if (ablation.count("r")) b.r_present = false;
}

/// Builds train items from dataset clips. Pretrain masks temporal conditions
/// entirely (genre tag only); finetune honors the ablation subset.
inline std::vector<TrainItem> build_train_items(const ClipDataset& ds,
                                                const ModelConfig& cfg,
                                                const TrainConfig& tc) {
  if (ds.clips.empty()) throw DatasetEmpty("no clips in dataset");
  std::vector<TrainItem> items;
  items.reserve(ds.clips.size());
  for (const auto& clip : ds.clips) {
    TrainItem item;
    item.bundle = clip_bundle(clip, cfg.f_M, cfg.f_s);
    if (tc.stage == TrainStage::kPretrain) {
      item.bundle.c_pre_present = false;
      item.bundle.c_sum_present = false;
      item.bundle.r_present = false;
    } else {
      apply_ablation(item.bundle, tc.condition_ablation);
    }
    item.delayed = apply_delay_pattern(clip.grid);
    items.push_back(std::move(item));
  }
  return items;
}

struct MetricsRow {
  int step = 0;
  double train_loss = 0.0;
  double heldout_loss = 0.0;
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  double final_heldout_loss = 0.0;
  long dropout_null_count = 0;  // clips trained with the null bundle
  long clip_count = 0;
};

template <typename Real>
double heldout_loss(Model<Real>& model, const std::vector<TrainItem>& items) {
  if (items.empty()) return 0.0;
  double total = 0;
  ForwardCache<Real> cache;
  for (const auto& item : items) {
    const Mat<Real> logits = model.forward(item.delayed, item.bundle, cache);
    total += loss(logits, item.delayed);
  }
  return total / static_cast<double>(items.size());
}

/// Runs the optimization loop. Trainability flags and condition gates must be
/// set by the caller before entry (all-trainable for pretrain, freeze mask +
/// finetune mode for finetune).
template <typename Real>
TrainResult train(Model<Real>& model, const std::vector<TrainItem>& train_items,
                  const std::vector<TrainItem>& heldout_items,
                  const TrainConfig& tc) {
  if (train_items.empty()) throw DatasetEmpty("no training items");
  Adam<Real> opt(model.params(), tc.learning_rate, tc.warmup_steps);
  Rng batch_rng(tc.seed ^ 0x9e37ULL);
  TrainResult result;
  ForwardCache<Real> cache;
  double running = 0;
  int running_n = 0;
  for (int step = 1; step <= tc.steps; ++step) {
    model.zero_grad();
    double batch_loss = 0;
    for (int b = 0; b < tc.batch_size; ++b) {
      const auto& item =
          train_items[batch_rng.next_below(train_items.size())];
      Rng drop_rng(tc.seed ^ splitmix64((static_cast<std::uint64_t>(step) << 8) | static_cast<std::uint64_t>(b)));
      ConditionBundle bundle = condition_dropout(item.bundle, tc.dropout_p, drop_rng);
      const bool is_null = !bundle.genre_present;
      if (is_null) ++result.dropout_null_count;
      ++result.clip_count;
      const Mat<Real> logits = model.forward(item.delayed, bundle, cache);
      batch_loss += loss(logits, item.delayed);
      const Mat<Real> dlogits =
          loss_grad(logits, item.delayed, 1.0 / tc.batch_size);
      model.backward(item.delayed, cache, dlogits);
    }
    opt.step();
    batch_loss /= tc.batch_size;
    running += batch_loss;
    ++running_n;
    if (step % tc.eval_every == 0 || step == tc.steps) {
      MetricsRow row;
      row.step = step;
      row.train_loss = running / running_n;
      row.heldout_loss = heldout_loss(model, heldout_items);
      result.metrics.push_back(row);
      running = 0;
      running_n = 0;
    }
  }
  result.final_heldout_loss =
      result.metrics.empty() ? 0.0 : result.metrics.back().heldout_loss;
  return result;
}

/// Pretrain: all parameters trainable, temporal conditions masked upstream.
template <typename Real>
TrainResult pretrain(Model<Real>& model,
                     const std::vector<TrainItem>& train_items,
                     const std::vector<TrainItem>& heldout_items,
                     const TrainConfig& tc) {
  set_all_trainable(model);
  model.set_finetune_mode(FinetuneMode::kJumpAdaptive);
  return train(model, train_items, heldout_items, tc);
}

/// Finetune: jump freeze mask plus the requested gating mode.
template <typename Real>
TrainResult finetune(Model<Real>& model,
                     const std::vector<TrainItem>& train_items,
                     const std::vector<TrainItem>& heldout_items,
                     const TrainConfig& tc, FinetuneMode mode) {
  apply_freeze_mask(model, freeze_mask_for_jump_finetune(model.cfg));
  model.set_finetune_mode(mode);
  return train(model, train_items, heldout_items, tc);
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_TRAINING_HPP
