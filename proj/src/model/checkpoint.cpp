// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/model/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "bioner/io/binary.hpp"

namespace bioner::model {

namespace {

constexpr std::uint32_t kMaxNameLength = 1u << 16;
constexpr std::uint32_t kMaxRank = 8;

std::string encode_header(const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw std::invalid_argument("checkpoint metadata key/value may not contain '=' or newlines: " + k);
    }
    out += k + "=" + v + "\n";
  }
  return out;
}

std::map<std::string, std::string> decode_header(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) throw CheckpointCorrupt("malformed checkpoint header line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

template <typename T>
void write_tensor(std::ostream& os, const std::string& name, const Tensor<T>& t) {
  io::write_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  io::write_u32(os, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) io::write_u32(os, static_cast<std::uint32_t>(d));
  for (T v : t.values()) io::write_f32(os, static_cast<float>(v));
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigMismatch("checkpoint header '" + key + "' must be true or false");
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt) {
  check_parameters(ckpt.params, ckpt.config, ckpt.heads);
  std::map<std::string, std::string> header;
  for (const auto& [k, v] : ckpt.config.to_map()) header["model." + k] = v;
  header["heads.pooler"] = ckpt.heads.pooler ? "true" : "false";
  header["heads.mlm"] = ckpt.heads.mlm ? "true" : "false";
  header["heads.sop"] = ckpt.heads.sop ? "true" : "false";
  header["heads.ner_labels"] = std::to_string(ckpt.heads.ner_labels);
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.starts_with("model.") || k.starts_with("heads.")) {
      throw std::invalid_argument("metadata key '" + k + "' collides with a reserved prefix");
    }
    header[k] = v;
  }
  const std::string header_text = encode_header(header);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
    io::write_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    io::write_u32(out, static_cast<std::uint32_t>(ckpt.params.size() + ckpt.optimizer.size()));
    for (const auto& [name, t] : ckpt.params) write_tensor(out, name, t);
    for (const auto& [name, t] : ckpt.optimizer) write_tensor(out, std::string(kOptimizerPrefix) + name, t);
    out.flush();
    if (!out) throw std::runtime_error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointCorrupt("cannot open checkpoint " + path.string());
  const std::string where = path.string() + ": ";

  Checkpoint<T> ckpt;
  try {
    std::string magic(kCheckpointMagic.size(), '\0');
    if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())) || magic != kCheckpointMagic) {
      throw CheckpointCorrupt(where + "not a checkpoint (bad magic)");
    }
    const std::uint32_t header_len = io::expect_u32(in, "header length");
    const auto header = decode_header(io::expect_bytes(in, header_len, "header"));

    std::map<std::string, std::string> model_kv;
    for (const auto& [k, v] : header) {
      if (k.starts_with("model.")) {
        model_kv[k.substr(6)] = v;
      } else if (!k.starts_with("heads.")) {
        ckpt.metadata[k] = v;
      }
    }
    try {
      ckpt.config = ModelConfig::from_map(model_kv);
      auto get = [&](const std::string& key) {
        auto it = header.find(key);
        if (it == header.end()) throw ConfigMismatch("checkpoint header is missing '" + key + "'");
        return it->second;
      };
      ckpt.heads.pooler = parse_bool(get("heads.pooler"), "heads.pooler");
      ckpt.heads.mlm = parse_bool(get("heads.mlm"), "heads.mlm");
      ckpt.heads.sop = parse_bool(get("heads.sop"), "heads.sop");
      ckpt.heads.ner_labels = std::stoul(get("heads.ner_labels"));
    } catch (const ModelError& e) {
      throw ConfigMismatch(where + e.what());
    } catch (const std::logic_error& e) {
      throw ConfigMismatch(where + "bad heads entry in header");
    }

    const std::uint32_t count = io::expect_u32(in, "tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t name_len = io::expect_u32(in, "tensor name length");
      if (name_len == 0 || name_len > kMaxNameLength) throw CheckpointCorrupt(where + "implausible tensor name length");
      std::string name = io::expect_bytes(in, name_len, "tensor name");
      const std::uint32_t rank = io::expect_u32(in, "tensor rank");
      if (rank == 0 || rank > kMaxRank) throw CheckpointCorrupt(where + "implausible rank for tensor " + name);
      Shape shape;
      for (std::uint32_t r = 0; r < rank; ++r) {
        const std::uint32_t d = io::expect_u32(in, "tensor dims");
        if (d == 0) throw CheckpointCorrupt(where + "zero dimension in tensor " + name);
        shape.push_back(d);
      }
      const std::size_t n = shape_size(shape);
      // Read in one block so a huge bogus size fails on EOF, not allocation.
      const std::string raw = io::expect_bytes(in, n * 4, "tensor values");
      std::vector<T> values(n);
      for (std::size_t k = 0; k < n; ++k) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[k * 4 + b])) << (8 * b);
        values[k] = static_cast<T>(std::bit_cast<float>(u));
      }
      Tensor<T> t(std::move(shape), std::move(values));
      if (name.starts_with(kOptimizerPrefix)) {
        ckpt.optimizer.insert(name.substr(kOptimizerPrefix.size()), std::move(t));
      } else {
        ckpt.params.insert(std::move(name), std::move(t));
      }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw CheckpointCorrupt(where + "trailing bytes after tensors");
  } catch (const io::TruncatedInput& e) {
    throw CheckpointCorrupt(where + e.what());
  }

  try {
    check_parameters(ckpt.params, ckpt.config, ckpt.heads);
  } catch (const ModelError& e) {
    throw ConfigMismatch(where + "tensors disagree with the stored config: " + e.what());
  }
  if (expected && !(*expected == ckpt.config)) {
    throw ConfigMismatch(where + "stored model config differs from the requested one");
  }
  return ckpt;
}

template void save_checkpoint<float>(const std::filesystem::path&, const Checkpoint<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&, const std::optional<ModelConfig>&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&, const std::optional<ModelConfig>&);

}  // namespace bioner::model
