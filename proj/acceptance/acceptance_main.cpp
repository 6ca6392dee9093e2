/**
 * @file acceptance_main.cpp
 * @brief End-to-end acceptance checks. Each criterion prints one PASS/FAIL
 * line; the exit code is the number of failures.
 *
 * Usage: acceptance_test [--cli PATH] [--workdir DIR] [--only 1,2,...]
 *
 * Criterion 8 trains one pretrain run and four finetune variants at the full
 * toy scale (about 45 minutes on one CPU core); checkpoints are cached in the
 * workdir, so delete it to retrain. All other criteria finish in seconds.
 */

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tempcondlm/checkpoint.hpp"
#include "tempcondlm/common.hpp"
#include "tempcondlm/datagen.hpp"
#include "tempcondlm/evaluation.hpp"
#include "tempcondlm/model.hpp"
#include "tempcondlm/tokens.hpp"
#include "tempcondlm/training.hpp"

namespace fs = std::filesystem;
using namespace tempcondlm;

namespace {

struct Context {
  std::string cli = "tools/tempcondlm";
  fs::path workdir = "acceptance-work";
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------------
// 1. Delay-pattern round trip
// ---------------------------------------------------------------------------

bool criterion_1(std::ostream& log, const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const int ks[3] = {1, 2, 4};
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = 8 + static_cast<int>(rng.next_below(249));
    const int K = ks[rng.next_below(3)];
    const int N = 2 + static_cast<int>(rng.next_below(255));
    TokenGrid grid(T, K, N);
    for (auto& v : grid.tokens) v = static_cast<int>(rng.next_below(N));
    const TokenGrid back = invert_delay_pattern(apply_delay_pattern(grid));
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) {
        const int expected = t + k < T ? grid.at(t, k) : N;
        if (back.at(t, k) != expected) {
          log << "mismatch at trial " << trial << " (" << t << "," << k << ")";
          return false;
        }
      }
  }
  const double dt = seconds_since(t0);
  log << "1000 grids round-tripped in " << dt << " s";
  return dt < 5.0;
}

// ---------------------------------------------------------------------------
// 2. Freeze correctness after a 100-step jump finetune
// ---------------------------------------------------------------------------

ClipDataset small_dataset(int n_clips, std::uint64_t seed) {
  DataGenConfig dg;
  dg.n_clips = n_clips;
  dg.clip_seconds = 2.0;
  dg.n_genres = 2;
  dg.seed = seed;
  dg.codec.N = 64;
  dg.codec.K = 4;
  dg.codec.f_s = 50.0;
  dg.codec.chord_code_width = 3;
  dg.codec.beat_code_width = 2;
  dg.codec.genre_code_width = 1;
  dg.codec.chord_vocab = {
      parse_chord_symbol("C:maj"), parse_chord_symbol("D:min7"),
      parse_chord_symbol("E:min"), parse_chord_symbol("F:maj7"),
      parse_chord_symbol("G:dom7"), parse_chord_symbol("A:min"),
      parse_chord_symbol("A#:maj")};
  return generate_dataset(dg);
}

bool criterion_2(std::ostream& log, const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  const ClipDataset ds = small_dataset(16, 202);

  ModelConfig mc;  // toy config, codec-compatible N
  mc.L = 16;
  mc.D = 128;
  mc.heads = 4;
  mc.K = 4;
  mc.N = 64;
  mc.n_genres = 2;
  Model<float> model(mc);
  model.init_weights(203);

  TrainConfig tc;
  tc.stage = TrainStage::kFinetune;
  tc.steps = 100;
  tc.batch_size = 2;
  tc.eval_every = 100;
  tc.seed = 204;
  const auto items = build_train_items(ds, mc, tc);

  std::vector<std::vector<float>> before;
  for (auto* p : model.params()) before.push_back(p->value.data);
  finetune(model, items, {}, tc, FinetuneMode::kJumpAdaptive);

  long frozen_changed = 0, trainable_total = 0, trainable_changed = 0;
  std::size_t idx = 0;
  for (auto* p : model.params()) {
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const bool changed = p->value.data[i] != before[idx][i];
      if (p->trainable) {
        ++trainable_total;
        trainable_changed += changed;
      } else {
        frozen_changed += changed;
      }
    }
    ++idx;
  }
  const double frac =
      static_cast<double>(trainable_changed) / trainable_total;
  const double dt = seconds_since(t0);
  log << "frozen scalars changed " << frozen_changed << ", trainable changed "
      << trainable_changed << "/" << trainable_total << " (" << frac * 100
      << "%) in " << dt << " s";
  return frozen_changed == 0 && frac >= 0.99 && dt < 120.0;
}

// ---------------------------------------------------------------------------
// 3. Trainable-fraction check
// ---------------------------------------------------------------------------

bool criterion_3(std::ostream& log, const Context&) {
  for (int L : {4, 8, 16, 48}) {
    ModelConfig mc;
    mc.L = L;
    mc.D = 16;
    mc.heads = 2;
    mc.K = 2;
    mc.N = 8;
    const auto mask = freeze_mask_for_jump_finetune(mc);
    int trainable_attn_layers = 0;
    for (const auto& [name, trainable] : mask)
      if (trainable && name.find(".attn.wq") != std::string::npos)
        ++trainable_attn_layers;
    if (trainable_attn_layers != L / 4) {
      log << "L=" << L << ": got " << trainable_attn_layers << " expected "
          << L / 4;
      return false;
    }
  }
  log << "trainable self-attention layers == L/4 for L in {4,8,16,48}";
  return true;
}

// ---------------------------------------------------------------------------
// 4. Gate rule
// ---------------------------------------------------------------------------

bool criterion_4(std::ostream& log, const Context&) {
  const int expect[][2] = {{12, 9}, {1, 1}, {2, 1}, {4, 3}, {8, 6}};
  for (const auto& e : expect) {
    if (in_attention_blocks(e[0]) != e[1]) {
      log << "in_attention_blocks(" << e[0] << ") = "
          << in_attention_blocks(e[0]) << ", expected " << e[1];
      return false;
    }
  }
  log << "floor-rule values match for n_blocks in {12,1,2,4,8}";
  return true;
}

// ---------------------------------------------------------------------------
// 5. Gradient check
// ---------------------------------------------------------------------------

bool criterion_5(std::ostream& log, const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig mc;
  mc.L = 4;
  mc.D = 8;
  mc.heads = 2;
  mc.K = 2;
  mc.N = 6;
  mc.n_genres = 2;
  mc.max_frames = 32;
  Model<double> model(mc);
  model.init_weights(501);

  Rng rng(502);
  const int T = 5, P = 2;
  ConditionBundle bundle;
  bundle.c_pre.frames.resize(P, 12);
  for (auto& v : bundle.c_pre.frames.data) v = rng.next_below(2) ? 1.0 : 0.0;
  bundle.c_sum.frames.resize(T, 12);
  for (auto& v : bundle.c_sum.frames.data) v = rng.next_below(2) ? 1.0 : 0.0;
  bundle.r.frames.resize(T);
  for (auto& v : bundle.r.frames) v = rng.next_double() * 2.0;
  bundle.genre_id = 1;
  TokenGrid raw(T, mc.K, mc.N);
  for (auto& v : raw.tokens) v = static_cast<int>(rng.next_below(mc.N));
  const DelayedGrid delayed = apply_delay_pattern(raw);

  const auto loss_at = [&] {
    ForwardCache<double> cache;
    return loss(model.forward(delayed, bundle, cache), delayed);
  };
  model.zero_grad();
  {
    ForwardCache<double> cache;
    const Mat<double> logits = model.forward(delayed, bundle, cache);
    model.backward(delayed, cache, loss_grad(logits, delayed, 1.0));
  }

  const double eps = 1e-5;
  double max_rel = 0.0;
  Rng pick(503);
  long checked = 0;
  for (auto* p : model.params()) {
    const std::size_t n = p->value.data.size();
    const std::size_t probes = n <= 8 ? n : 8;
    for (std::size_t j = 0; j < probes; ++j) {
      const std::size_t i = n <= 8 ? j : pick.next_below(n);
      const double saved = p->value.data[i];
      p->value.data[i] = saved + eps;
      const double lp = loss_at();
      p->value.data[i] = saved - eps;
      const double lm = loss_at();
      p->value.data[i] = saved;
      const double fd = (lp - lm) / (2 * eps);
      const double an = p->grad.data[i];
      if (std::abs(fd) < 1e-10 && std::abs(an) < 1e-10) continue;
      ++checked;
      max_rel = std::max(
          max_rel, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an),
                                                 1e-6}));
    }
  }
  const double dt = seconds_since(t0);
  log << "max relative error " << max_rel << " over " << checked
      << " probes in " << dt << " s";
  return max_rel < 1e-4 && checked > 100 && dt < 60.0;
}

// ---------------------------------------------------------------------------
// 6. CFG identities
// ---------------------------------------------------------------------------

bool criterion_6(std::ostream& log, const Context&) {
  Rng rng(601);
  Mat<double> cond(4, 9), uncond(4, 9);
  for (auto& v : cond.data) v = rng.next_gaussian();
  for (auto& v : uncond.data) v = rng.next_gaussian();
  if (cfg_logits(cond, uncond, 1.0).data != cond.data) {
    log << "gamma=1 does not reproduce conditional logits";
    return false;
  }
  if (cfg_logits(cond, uncond, 0.0).data != uncond.data) {
    log << "gamma=0 does not reproduce unconditional logits";
    return false;
  }

  // temperature -> 0 equals greedy: per-row draws match the argmax oracle,
  // and whole-grid sampling at temperature 0 is seed-independent.
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_below(20));
    const int pad = static_cast<int>(rng.next_below(n));
    std::vector<double> logits(n);
    for (auto& v : logits) v = rng.next_gaussian();
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (i == pad) continue;
      if (best < 0 || logits[i] > logits[best]) best = i;
    }
    Rng draw(trial);
    if (detail::sample_class(logits.data(), n, pad, 0.0, 0, draw) != best) {
      log << "temperature-0 draw differs from argmax at trial " << trial;
      return false;
    }
  }

  ModelConfig mc;
  mc.L = 4;
  mc.D = 16;
  mc.heads = 2;
  mc.K = 2;
  mc.N = 8;
  mc.n_genres = 2;
  mc.max_frames = 64;
  Model<double> model(mc);
  model.init_weights(602);
  ConditionBundle bundle;
  bundle.c_pre.frames.resize(1, 12);
  bundle.c_pre.frames.at(0, 0) = 1.0;
  bundle.c_sum.frames.resize(8, 12);
  bundle.r.frames.assign(8, 0.5);
  bundle.genre_id = 0;
  SampleOptions opt;
  opt.n_frames = 8;
  opt.temperature = 0.0;
  opt.seed = 1;
  const TokenGrid a = sample(model, bundle, opt);
  opt.seed = 424242;
  const TokenGrid b = sample(model, bundle, opt);
  if (a.tokens != b.tokens) {
    log << "temperature-0 sampling depends on the seed";
    return false;
  }
  log << "gamma endpoints exact; temperature-0 sampling is greedy";
  return true;
}

// ---------------------------------------------------------------------------
// 7. Metric oracles
// ---------------------------------------------------------------------------

bool criterion_7(std::ostream& log, const Context&) {
  Rng rng(701);
  // chord_score vs naive oracle, 100 random 1000-frame pairs.
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ChordSymbol> ref, est;
    for (int i = 0; i < 1000; ++i) {
      const auto mk = [&] {
        if (rng.next_below(10) == 0) return ChordSymbol::no_chord();
        return ChordSymbol::make(static_cast<int>(rng.next_below(12)),
                                 static_cast<ChordQuality>(rng.next_below(12)));
      };
      ref.push_back(mk());
      est.push_back(mk());
    }
    for (ChordLevel level : {ChordLevel::kMajmin, ChordLevel::kTriads,
                             ChordLevel::kTetrads}) {
      long scored = 0, correct = 0;
      for (int i = 0; i < 1000; ++i) {
        const auto r = reduce_chord(ref[i], level);
        if (!r) continue;
        ++scored;
        const auto e = reduce_chord(est[i], level);
        if (e && *e == *r) ++correct;
      }
      const double expected =
          scored == 0 ? kScoreUndefined
                      : static_cast<double>(correct) / scored;
      if (std::abs(chord_score(ref, est, level) - expected) > 1e-12) {
        log << "chord_score oracle mismatch at trial " << trial;
        return false;
      }
    }
  }

  // beat_f1 shift tests at 500 ms spacing.
  std::vector<double> beats;
  for (int i = 0; i < 20; ++i) beats.push_back(0.25 + 0.5 * i);
  std::vector<double> inside = beats, outside = beats;
  for (double& t : inside) t += 0.069;
  for (double& t : outside) t += 0.071;
  if (beat_f1(beats, inside) != 1.0) {
    log << "69 ms shift should score 1.0";
    return false;
  }
  if (beat_f1(beats, outside) != 0.0) {
    log << "71 ms shift should score 0.0";
    return false;
  }

  // Frechet distance: self-distance and the 1-D analytic case.
  std::vector<std::vector<double>> a, b;
  for (int i = 0; i < 100000; ++i) {
    a.push_back({rng.next_gaussian()});
    b.push_back({1.0 + rng.next_gaussian()});
  }
  std::vector<std::vector<double>> cloud;
  for (int i = 0; i < 500; ++i)
    cloud.push_back({rng.next_gaussian(), rng.next_gaussian(),
                     rng.next_gaussian()});
  const double self_fd = frechet_distance(cloud, cloud);
  const double shift_fd = frechet_distance(a, b);
  log << "self FD " << self_fd << ", unit-shift FD " << shift_fd;
  return self_fd <= 1e-6 && std::abs(shift_fd - 1.0) <= 0.05;
}

// ---------------------------------------------------------------------------
// 8. End-to-end controllability ordering
// ---------------------------------------------------------------------------

ToyCodecSpec acceptance_codec() {
  ToyCodecSpec spec;
  spec.N = 256;
  spec.K = 4;
  spec.f_s = 50.0;
  spec.chord_code_width = 3;
  spec.beat_code_width = 2;
  spec.genre_code_width = 3;
  spec.chord_vocab = {
      parse_chord_symbol("C:maj"), parse_chord_symbol("D:min7"),
      parse_chord_symbol("E:min"), parse_chord_symbol("F:maj7"),
      parse_chord_symbol("G:dom7"), parse_chord_symbol("A:min"),
      parse_chord_symbol("A#:maj")};
  return spec;
}

// Short clips keep the cold-start frames (where the model must read the
// chord from the conditions rather than copy its own history) a meaningful
// share of the loss; at 2 s they are ~0.3% of target positions and the
// chroma-to-chord mapping never trains within the step budget.
ClipDataset acceptance_dataset(int n_clips, double clip_seconds,
                               std::uint64_t seed) {
  DataGenConfig dg;
  dg.n_clips = n_clips;
  dg.clip_seconds = clip_seconds;
  dg.n_genres = 5;
  dg.seed = seed;
  dg.codec = acceptance_codec();
  return generate_dataset(dg);
}

ModelConfig acceptance_model_config() {
  ModelConfig mc;
  mc.L = 16;
  mc.D = 128;
  mc.heads = 4;
  mc.K = 4;
  mc.N = 256;
  mc.n_genres = 5;
  mc.f_s = 50.0;
  mc.f_M = 5.0;
  mc.max_frames = 576;
  return mc;
}

/// Trains (or loads from cache) one run and returns the model.
Model<float> cached_run(const Context& ctx, const std::string& name,
                        const std::function<Model<float>()>& make,
                        std::ostream& log) {
  const fs::path path = ctx.workdir / ("ac8-" + name + ".ckpt");
  if (fs::exists(path)) {
    log << "  [" << name << "] cached\n";
    return load_checkpoint<float>(path.string());
  }
  const auto t0 = std::chrono::steady_clock::now();
  Model<float> model = make();
  fs::create_directories(ctx.workdir);
  save_checkpoint(path.string(), model);
  log << "  [" << name << "] trained in " << seconds_since(t0) << " s\n";
  return model;
}

bool criterion_8(std::ostream& log, const Context& ctx) {
  const auto t_all = std::chrono::steady_clock::now();
  log << "\n";
  // Pretraining uses its own longer-clip corpus (mirroring a generic base
  // corpus followed by a task-format finetune set). Pretraining on the short
  // finetune clips instead entrenches the unconditional cold-start prediction
  // so strongly that the mostly-frozen finetune can no longer learn to read
  // the chroma conditions.
  const ClipDataset pretrain_ds = acceptance_dataset(2000, 2.0, 8001);
  const ClipDataset train_ds = acceptance_dataset(2000, 0.6, 8001);
  const ClipDataset heldout_ds = acceptance_dataset(200, 0.6, 8002);
  const ModelConfig mc = acceptance_model_config();

  TrainConfig base_tc;
  base_tc.steps = 5000;
  base_tc.batch_size = 16;
  base_tc.learning_rate = 3e-4;
  base_tc.warmup_steps = 500;
  base_tc.dropout_p = 0.5;
  base_tc.eval_every = 1000;

  double pretrain_sec = 0, first_finetune_sec = 0;

  Model<float> base = cached_run(ctx, "pretrain", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    TrainConfig tc = base_tc;
    tc.stage = TrainStage::kPretrain;
    tc.batch_size = 2;  // longer clips; keeps the stage inside the time budget
    tc.seed = 11;
    Model<float> m(mc);
    m.init_weights(11);
    pretrain(m, build_train_items(pretrain_ds, mc, tc), {}, tc);
    pretrain_sec = seconds_since(t0);
    return m;
  }, log);

  struct Variant {
    std::string name;
    std::set<std::string> ablate;
    FinetuneMode mode;
    std::uint64_t seed;
  };
  const std::vector<Variant> variants = {
      {"full", {}, FinetuneMode::kJumpAdaptive, 21},
      {"rhythm-only", {"c_pre", "c_sum"}, FinetuneMode::kJumpAdaptive, 22},
      {"chords-only", {"r"}, FinetuneMode::kJumpAdaptive, 23},
      {"jump-only", {}, FinetuneMode::kJump, 24},
  };

  std::map<std::string, MetricsReport> reports;
  for (const auto& var : variants) {
    Model<float> m = cached_run(ctx, var.name, [&] {
      const auto t0 = std::chrono::steady_clock::now();
      TrainConfig tc = base_tc;
      tc.stage = TrainStage::kFinetune;
      tc.seed = var.seed;
      tc.condition_ablation = var.ablate;
      Model<float> ft = base;
      finetune(ft, build_train_items(train_ds, mc, tc), {}, tc, var.mode);
      if (var.name == "full") first_finetune_sec = seconds_since(t0);
      return ft;
    }, log);
    // Each variant samples under the conditioning it was trained with; the
    // scoring side always uses the full reference conditions. Decoding uses
    // mild temperature sharpening, the usual recipe for token LMs, so
    // tail-of-distribution sampling noise does not dominate the scores.
    const MetricsReport rep =
        evaluate_run(m, heldout_ds, 3.0, 900, 0.8, 0, var.ablate);
    reports[var.name] = rep;
    log << "  [" << var.name << "] beat_f1=" << rep.beat_f1
        << " majmin=" << rep.majmin << " triads=" << rep.triads
        << " tetrads=" << rep.tetrads << " frechet=" << rep.frechet << "\n";
  }

  const double chance = 1.0 / 7.0;  // uniform over the 7-chord vocabulary
  const auto& full = reports.at("full");
  const auto& rhythm = reports.at("rhythm-only");
  const auto& chords = reports.at("chords-only");
  const auto& jump = reports.at("jump-only");

  bool ok = true;
  const auto check = [&](bool cond, const std::string& what) {
    log << "  " << (cond ? "ok  " : "FAIL") << " " << what << "\n";
    ok = ok && cond;
  };
  check(full.majmin >= 0.90, "(a) full majmin >= 0.90");
  check(full.beat_f1 >= 0.80, "(a) full beat_f1 >= 0.80");
  check(rhythm.majmin < 3.0 * chance,
        "(b) rhythm-only majmin < 3x chance (" +
            std::to_string(3.0 * chance) + ")");
  check(chords.beat_f1 <= full.beat_f1 - 0.15,
        "(c) chords-only beat_f1 at least 0.15 below full");
  check(full.beat_f1 >= jump.beat_f1 + 0.10,
        "(d) jump+adaptive beats jump-only by >= 0.10 beat_f1");
  if (pretrain_sec > 0 && first_finetune_sec > 0) {
    check(pretrain_sec + first_finetune_sec < 3600.0,
          "pretrain + finetune < 60 min (" +
              std::to_string(pretrain_sec + first_finetune_sec) + " s)");
  } else {
    log << "  note: training times not measured (cached checkpoints)\n";
  }
  log << "  total " << seconds_since(t_all) << " s\n ";
  return ok;
}

// ---------------------------------------------------------------------------
// 9. Determinism of CLI artifacts
// ---------------------------------------------------------------------------

bool files_equal(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

bool criterion_9(std::ostream& log, const Context& ctx) {
  const fs::path root = ctx.workdir / "ac9";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg_path = root / "config";
  {
    std::ofstream cfg(cfg_path);
    cfg << "n_clips = 16\nclip_seconds = 1\nn_genres = 2\n"
           "codec_n = 64\ncodec_k = 4\nchord_code_width = 3\n"
           "beat_code_width = 2\ngenre_code_width = 1\n"
           "chord_vocab = C:maj,D:min7,E:min,F:maj7,G:dom7,A:min,A#:maj\n"
           "f_s = 50\nf_m = 5\nmodel_l = 8\nmodel_d = 64\nmodel_heads = 4\n"
           "max_frames = 64\nsteps = 20\nbatch_size = 2\nwarmup_steps = 5\n"
           "eval_every = 20\nheldout_fraction = 0.25\nseed = 42\n"
           "dataset = " << (root / "train.jsonl").string() << "\n";
  }
  {
    std::ofstream chords(root / "chords.lab");
    chords << "0\t0.5\tC:maj\n0.5\t1\tA:min\n";
  }

  const auto run = [&](const std::string& tag) -> bool {
    const fs::path dir = root / tag;
    fs::create_directories(dir);
    const std::string env = "TEMPCONDLM_DETERMINISTIC=1 ";
    const std::string quiet = " > /dev/null 2>&1";
    const std::vector<std::string> cmds = {
        env + ctx.cli + " gen-data --config " + cfg_path.string() + " --out " +
            (root / "train.jsonl").string() + quiet,
        env + ctx.cli + " pretrain --config " + cfg_path.string() + " --out " +
            (dir / "pre").string() + quiet,
        env + ctx.cli + " finetune --config " + cfg_path.string() + " --out " +
            (dir / "ft").string() + " --base " + (dir / "pre/ckpt-20").string() +
            quiet,
        env + ctx.cli + " sample --ckpt " + (dir / "ft/ckpt-20").string() +
            " --chords " + (root / "chords.lab").string() +
            " --bpm 120 --genre 1 --gamma 3 --seed 7 --out " +
            (dir / "sample.json").string() + quiet,
        env + ctx.cli + " eval --ckpt " + (dir / "ft/ckpt-20").string() +
            " --dataset " + (root / "train.jsonl").string() +
            " --gamma 3 --seed 9 --out " + (dir / "eval.json").string() + quiet,
    };
    for (const auto& c : cmds) {
      if (std::system(c.c_str()) != 0) {
        log << "command failed: " << c;
        return false;
      }
    }
    // Snapshot the dataset bytes per run (regenerated before each run).
    fs::copy_file(root / "train.jsonl", dir / "train.jsonl",
                  fs::copy_options::overwrite_existing);
    return true;
  };

  if (!run("a") || !run("b")) return false;
  const std::vector<std::string> artifacts = {
      "train.jsonl",     "pre/config",      "pre/metrics.jsonl",
      "pre/ckpt-20",     "ft/config",       "ft/metrics.jsonl",
      "ft/ckpt-20",      "sample.json",     "sample.json.summary",
      "eval.json"};
  for (const auto& rel : artifacts) {
    if (!files_equal(root / "a" / rel, root / "b" / rel)) {
      log << "artifact differs between reruns: " << rel;
      return false;
    }
  }
  log << artifacts.size() << " artifacts byte-identical across reruns";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) ctx.cli = argv[++i];
    else if (arg == "--workdir" && i + 1 < argc) ctx.workdir = argv[++i];
    else if (arg == "--only" && i + 1 < argc) {
      std::istringstream in(argv[++i]);
      std::string item;
      while (std::getline(in, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance_test [--cli PATH] [--workdir DIR]"
                   " [--only 1,2,...]\n";
      return 64;
    }
  }

  using Fn = bool (*)(std::ostream&, const Context&);
  const std::vector<std::pair<std::string, Fn>> criteria = {
      {"delay-pattern round trip", criterion_1},
      {"freeze correctness after jump finetune", criterion_2},
      {"trainable self-attention fraction", criterion_3},
      {"in-attention gate rule", criterion_4},
      {"analytic vs finite-difference gradients", criterion_5},
      {"classifier-free guidance identities", criterion_6},
      {"metric oracles", criterion_7},
      {"end-to-end controllability ordering", criterion_8},
      {"byte-identical deterministic reruns", criterion_9},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && only.count(id) == 0) continue;
    std::cout << "criterion " << id << " (" << criteria[i].first << "): ";
    std::cout.flush();
    bool ok = false;
    try {
      ok = criteria[i].second(std::cout, ctx);
    } catch (const std::exception& e) {
      std::cout << "exception: " << e.what();
    }
    std::cout << "\n" << (ok ? "PASS" : "FAIL") << " criterion " << id << "\n";
    std::cout.flush();
    failures += !ok;
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED"
                              : std::to_string(failures) + " CRITERIA FAILED")
            << "\n";
  return failures;
}
