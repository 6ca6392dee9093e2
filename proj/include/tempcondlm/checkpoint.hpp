/**
 * @file checkpoint.hpp
 * @brief Versioned binary checkpoint: model config as JSON, the finetune mode
 * (which decides how many blocks receive condition injection), and all
 * parameter tensors by canonical group name. Freeze masks are recomputed on
 * load, never stored. Files are written to a temp path and renamed into place.
 */

#ifndef TEMPCONDLM_CHECKPOINT_HPP
#define TEMPCONDLM_CHECKPOINT_HPP

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "tempcondlm/common.hpp"
#include "tempcondlm/model.hpp"

namespace tempcondlm {

namespace detail {

inline constexpr char kCkptMagic[8] = {'T', 'C', 'L', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCkptVersion = 2;

inline void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

}  // namespace detail

template <typename Real>
void save_checkpoint(const std::string& path, Model<Real>& model) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + tmp);
    out.write(detail::kCkptMagic, sizeof(detail::kCkptMagic));
    detail::write_u32(out, detail::kCkptVersion);
    detail::write_u32(out, static_cast<std::uint32_t>(sizeof(Real)));
    detail::write_string(out, model_config_to_json(model.cfg).dump());
    detail::write_string(out, finetune_mode_name(model.finetune_mode()));
    auto params = model.params();
    detail::write_u32(out, static_cast<std::uint32_t>(params.size()));
    for (auto* p : params) {
      detail::write_string(out, p->name);
      detail::write_u32(out, static_cast<std::uint32_t>(p->value.rows));
      detail::write_u32(out, static_cast<std::uint32_t>(p->value.cols));
      out.write(reinterpret_cast<const char*>(p->value.data.data()),
                static_cast<std::streamsize>(p->value.data.size() * sizeof(Real)));
    }
    if (!out) throw IoError("short write: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

template <typename Real>
Model<Real> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, detail::kCkptMagic, sizeof(magic)) != 0)
    throw IoError("bad checkpoint magic: " + path);
  if (detail::read_u32(in) != detail::kCkptVersion)
    throw IoError("unsupported checkpoint version");
  if (detail::read_u32(in) != sizeof(Real))
    throw ConfigMismatch("checkpoint scalar width does not match build");
  const ModelConfig cfg =
      model_config_from_json(nlohmann::json::parse(detail::read_string(in)));
  Model<Real> model(cfg);
  model.set_finetune_mode(parse_finetune_mode(detail::read_string(in)));
  auto params = model.params();
  const std::uint32_t count = detail::read_u32(in);
  if (count != params.size()) throw ConfigMismatch("parameter count mismatch");
  for (auto* p : params) {
    const std::string name = detail::read_string(in);
    if (name != p->name)
      throw ConfigMismatch("parameter order mismatch at " + name);
    const int rows = static_cast<int>(detail::read_u32(in));
    const int cols = static_cast<int>(detail::read_u32(in));
    if (rows != p->value.rows || cols != p->value.cols)
      throw ConfigMismatch("parameter shape mismatch at " + name);
    in.read(reinterpret_cast<char*>(p->value.data.data()),
            static_cast<std::streamsize>(p->value.data.size() * sizeof(Real)));
  }
  if (!in) throw IoError("truncated checkpoint: " + path);
  return model;
}

}  // namespace tempcondlm

#endif  // TEMPCONDLM_CHECKPOINT_HPP
