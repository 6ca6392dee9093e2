/**
 * @file tempcondlm.cpp
 * @brief Command-line entry point: data generation, training, sampling, and
 * evaluation. Batch, non-interactive; every command is deterministic under an
 * explicit seed, exits nonzero on any error, and writes outputs through temp
 * paths renamed into place on success.
 */

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tempcondlm/checkpoint.hpp"
#include "tempcondlm/config.hpp"
#include "tempcondlm/datagen.hpp"
#include "tempcondlm/dataset.hpp"
#include "tempcondlm/evaluation.hpp"
#include "tempcondlm/model.hpp"
#include "tempcondlm/training.hpp"

namespace fs = std::filesystem;
using namespace tempcondlm;

namespace {

using TrainReal = float;

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write: " + tmp);
    out << content;
    if (!out) throw IoError("short write: " + tmp);
  }
  fs::rename(tmp, path);
}

std::set<std::string> parse_csv_set(const std::string& csv) {
  std::set<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::vector<ChordSymbol> parse_vocab(const std::string& value) {
  if (value == "full") return full_chord_vocab();
  std::vector<ChordSymbol> vocab;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) vocab.push_back(parse_chord_symbol(item));
  }
  return vocab;
}

std::string format_vocab(const std::vector<ChordSymbol>& vocab) {
  if (vocab.size() == 144) return "full";
  std::string out;
  for (const auto& s : vocab) {
    if (!out.empty()) out += ',';
    out += format_chord_symbol(s);
  }
  return out;
}

ToyCodecSpec codec_from_config(const Config& cfg) {
  ToyCodecSpec spec;
  spec.N = static_cast<int>(cfg.get_int("codec_n", 64));
  spec.K = static_cast<int>(cfg.get_int("codec_k", 4));
  spec.f_s = cfg.get_double("f_s", 50.0);
  spec.chord_code_width = static_cast<int>(cfg.get_int("chord_code_width", 3));
  spec.beat_code_width = static_cast<int>(cfg.get_int("beat_code_width", 2));
  spec.genre_code_width = static_cast<int>(cfg.get_int("genre_code_width", 3));
  spec.noise_rate = cfg.get_double("noise_rate", 0.0);
  spec.chord_vocab = parse_vocab(cfg.get_str("chord_vocab", "full"));
  return spec;
}

ModelConfig model_from_config(const Config& cfg) {
  ModelConfig mc;
  mc.L = static_cast<int>(cfg.get_int("model_l", 16));
  mc.D = static_cast<int>(cfg.get_int("model_d", 128));
  mc.heads = static_cast<int>(cfg.get_int("model_heads", 4));
  mc.K = static_cast<int>(cfg.get_int("codec_k", 4));
  mc.N = static_cast<int>(cfg.get_int("codec_n", 64));
  mc.n_genres = static_cast<int>(cfg.get_int("n_genres", 5));
  mc.f_s = cfg.get_double("f_s", 50.0);
  mc.f_M = cfg.get_double("f_m", cfg.get_double("f_s", 50.0) / 10.0);
  mc.max_frames = static_cast<int>(cfg.get_int("max_frames", 576));
  mc.validate();
  return mc;
}

TrainConfig train_from_config(const Config& cfg, TrainStage stage) {
  TrainConfig tc;
  tc.stage = stage;
  tc.steps = static_cast<int>(cfg.get_int("steps", 5000));
  tc.batch_size = static_cast<int>(cfg.get_int("batch_size", 16));
  tc.learning_rate = cfg.get_double("learning_rate", 3e-4);
  tc.warmup_steps = static_cast<int>(cfg.get_int("warmup_steps", 500));
  tc.dropout_p = cfg.get_double("dropout_p", 0.5);
  tc.gamma_eval = cfg.get_double("gamma", 3.0);
  tc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  tc.eval_every = static_cast<int>(cfg.get_int("eval_every", 500));
  if (cfg.has("ablate")) tc.condition_ablation = parse_csv_set(cfg.get_str("ablate"));
  return tc;
}

/// Splits clips into train/heldout by a deterministic tail fraction.
std::pair<ClipDataset, ClipDataset> split_dataset(ClipDataset ds,
                                                  double heldout_fraction) {
  ClipDataset heldout;
  heldout.spec = ds.spec;
  const auto n_hold = static_cast<std::size_t>(
      std::lround(ds.clips.size() * heldout_fraction));
  if (n_hold > 0 && n_hold < ds.clips.size()) {
    heldout.clips.assign(ds.clips.end() - n_hold, ds.clips.end());
    ds.clips.resize(ds.clips.size() - n_hold);
  }
  return {std::move(ds), std::move(heldout)};
}

void write_run_dir(const std::string& out_dir, const Config& resolved,
                   Model<TrainReal>& model, const TrainResult& result,
                   int steps) {
  fs::create_directories(out_dir);
  write_file_atomic(out_dir + "/config", resolved.dump());
  std::ostringstream metrics;
  for (const auto& row : result.metrics) {
    nlohmann::json j = {{"step", row.step},
                        {"train_loss", row.train_loss},
                        {"heldout_loss", row.heldout_loss}};
    metrics << j.dump() << '\n';
  }
  write_file_atomic(out_dir + "/metrics.jsonl", metrics.str());
  save_checkpoint(out_dir + "/ckpt-" + std::to_string(steps), model);
}

// -- subcommands ------------------------------------------------------------

int cmd_gen_data(const std::string& config_path, const std::string& out_path,
                 long seed_override) {
  Config cfg = Config::load(config_path);
  if (seed_override >= 0) cfg.set("seed", std::to_string(seed_override));
  DataGenConfig gen;
  gen.n_clips = static_cast<int>(cfg.get_int("n_clips", 100));
  gen.clip_seconds = cfg.get_double("clip_seconds", 10.0);
  gen.bpm_min = cfg.get_double("bpm_min", 60.0);
  gen.bpm_max = cfg.get_double("bpm_max", 180.0);
  gen.beats_per_bar = static_cast<int>(cfg.get_int("beats_per_bar", 4));
  gen.n_genres = static_cast<int>(cfg.get_int("n_genres", 5));
  gen.max_span_bars = static_cast<int>(cfg.get_int("max_span_bars", 4));
  gen.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  gen.codec = codec_from_config(cfg);
  cfg.set("chord_vocab", format_vocab(gen.codec.chord_vocab));

  const ClipDataset ds = generate_dataset(gen);
  std::ostringstream out;
  write_dataset(ds, out);
  fs::create_directories(fs::path(out_path).parent_path().empty()
                             ? "."
                             : fs::path(out_path).parent_path().string());
  write_file_atomic(out_path, out.str());
  write_file_atomic(out_path + ".config", cfg.dump());
  std::cout << "wrote " << ds.clips.size() << " clips to " << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              long seed_override, TrainStage stage, const std::string& base,
              const std::string& ablate_flag, const std::string& mode_flag) {
  Config cfg = Config::load(config_path);
  if (seed_override >= 0) cfg.set("seed", std::to_string(seed_override));
  if (!ablate_flag.empty()) cfg.set("ablate", ablate_flag);
  if (!mode_flag.empty()) cfg.set("finetune_mode", mode_flag);
  const TrainConfig tc = train_from_config(cfg, stage);

  ClipDataset full = load_dataset(cfg.get_str("dataset"));
  auto [train_ds, heldout_ds] =
      split_dataset(std::move(full), cfg.get_double("heldout_fraction", 0.1));

  Model<TrainReal> model = [&] {
    if (stage == TrainStage::kFinetune) {
      if (base.empty()) throw BadConfig("finetune requires --base checkpoint");
      return load_checkpoint<TrainReal>(base);
    }
    ModelConfig mc = model_from_config(cfg);
    if (mc.K != train_ds.spec.K || mc.N != train_ds.spec.N)
      throw ConfigMismatch("model K/N must match dataset codec spec");
    Model<TrainReal> m(mc);
    m.init_weights(tc.seed ^ 0x11d7ULL);
    return m;
  }();
  if (model.cfg.K != train_ds.spec.K || model.cfg.N != train_ds.spec.N)
    throw ConfigMismatch("checkpoint K/N does not match dataset codec spec");

  const auto items = build_train_items(train_ds, model.cfg, tc);
  const auto heldout = build_train_items(heldout_ds, model.cfg, tc);

  TrainResult result;
  if (stage == TrainStage::kPretrain) {
    result = pretrain(model, items, heldout, tc);
  } else {
    const FinetuneMode mode =
        parse_finetune_mode(cfg.get_str("finetune_mode", "jump+adaptive"));
    result = finetune(model, items, heldout, tc, mode);
  }

  write_run_dir(out_dir, cfg, model, result, tc.steps);
  std::cout << "final heldout loss " << result.final_heldout_loss << ", run dir "
            << out_dir << "\n";
  return 0;
}

int cmd_sample(const std::string& ckpt, const std::string& chords_path,
               double bpm, int genre, double gamma, long seed,
               const std::string& out_path, double temperature, int top_k) {
  Model<TrainReal> model = load_checkpoint<TrainReal>(ckpt);
  std::ifstream in(chords_path);
  if (!in) throw IoError("cannot open chord file: " + chords_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const ChordTrack track = parse_chord_file(ss.str());
  if (track.spans.empty()) throw EmptyTrack("chord file has no spans");
  const BeatGrid beats = beats_from_bpm(bpm, 4, track.duration_sec);
  const ConditionBundle bundle =
      build_condition_bundle(track, beats, genre, model.cfg.f_M, model.cfg.f_s);

  SampleOptions opt;
  opt.gamma = gamma;
  opt.n_frames = static_cast<int>(std::lround(track.duration_sec * model.cfg.f_s));
  opt.temperature = temperature;
  opt.top_k = top_k;
  opt.seed = static_cast<std::uint64_t>(seed);
  const TokenGrid grid = sample(model, bundle, opt);
  write_file_atomic(out_path, grid_to_json(grid).dump() + "\n");

  // Human-readable decode summary (chord spans and estimated beat count).
  ToyCodecSpec spec;
  spec.N = model.cfg.N;
  spec.K = model.cfg.K;
  spec.f_s = model.cfg.f_s;
  std::ostringstream summary;
  summary << "frames " << grid.T << ", codebooks " << grid.K << "\n"
          << "conditions: bpm " << bpm << ", genre " << genre << ", gamma "
          << gamma << ", seed " << seed << "\n";
  summary << "requested chords:\n" << format_chord_file(track);
  write_file_atomic(out_path + ".summary", summary.str());
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& dataset_path,
             double gamma, long seed, const std::string& out_path,
             double temperature, int top_k, const std::string& ablate_flag) {
  Model<TrainReal> model = load_checkpoint<TrainReal>(ckpt);
  const ClipDataset ds = load_dataset(dataset_path);
  if (model.cfg.K != ds.spec.K || model.cfg.N != ds.spec.N)
    throw ConfigMismatch("checkpoint K/N does not match dataset codec spec");
  const MetricsReport report = evaluate_run(
      model, ds, gamma, static_cast<std::uint64_t>(seed), temperature, top_k,
      parse_csv_set(ablate_flag));
  write_file_atomic(out_path, metrics_report_to_json(report).dump(2) + "\n");
  std::cout << "beat_f1=" << report.beat_f1 << " majmin=" << report.majmin
            << " triads=" << report.triads << " tetrads=" << report.tetrads
            << " frechet=" << report.frechet << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporally conditioned codec-token language model"};
  app.require_subcommand(1);

  std::string config_path, out_path, base_ckpt, ablate_flag, mode_flag;
  std::string ckpt_path, chords_path, dataset_path;
  long seed = -1;
  double gamma = 3.0, bpm = 120.0, temperature = 1.0;
  int genre = 0, top_k = 0;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_path)->required();
  gen->add_option("--seed", seed);

  auto* pre = app.add_subcommand("pretrain", "pretrain the genre-only base model");
  pre->add_option("--config", config_path)->required();
  pre->add_option("--out", out_path)->required();
  pre->add_option("--seed", seed);

  auto* fin = app.add_subcommand("finetune", "jump-finetune with temporal conditions");
  fin->add_option("--config", config_path)->required();
  fin->add_option("--out", out_path)->required();
  fin->add_option("--base", base_ckpt)->required();
  fin->add_option("--seed", seed);
  fin->add_option("--ablate", ablate_flag, "conditions to null: c_pre,c_sum,r");
  fin->add_option("--finetune-mode", mode_flag, "jump | jump+adaptive | jump+full");

  auto* smp = app.add_subcommand("sample", "sample a clip from symbolic conditions");
  smp->add_option("--ckpt", ckpt_path)->required();
  smp->add_option("--chords", chords_path)->required();
  smp->add_option("--bpm", bpm);
  smp->add_option("--genre", genre);
  smp->add_option("--gamma", gamma);
  smp->add_option("--seed", seed);
  smp->add_option("--out", out_path)->required();
  smp->add_option("--temperature", temperature);
  smp->add_option("--top-k", top_k);

  auto* evl = app.add_subcommand("eval", "score a checkpoint on an eval dataset");
  evl->add_option("--ckpt", ckpt_path)->required();
  evl->add_option("--dataset", dataset_path)->required();
  evl->add_option("--gamma", gamma);
  evl->add_option("--seed", seed);
  evl->add_option("--out", out_path)->required();
  evl->add_option("--temperature", temperature);
  evl->add_option("--top-k", top_k);
  evl->add_option("--ablate", ablate_flag,
                  "conditions withheld at sampling time: c_pre,c_sum,r");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(config_path, out_path, seed);
    if (pre->parsed())
      return cmd_train(config_path, out_path, seed, TrainStage::kPretrain, "",
                       "", "");
    if (fin->parsed())
      return cmd_train(config_path, out_path, seed, TrainStage::kFinetune,
                       base_ckpt, ablate_flag, mode_flag);
    if (smp->parsed())
      return cmd_sample(ckpt_path, chords_path, bpm, genre, gamma,
                        seed < 0 ? 0 : seed, out_path, temperature, top_k);
    if (evl->parsed())
      return cmd_eval(ckpt_path, dataset_path, gamma, seed < 0 ? 0 : seed,
                      out_path, temperature, top_k, ablate_flag);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
