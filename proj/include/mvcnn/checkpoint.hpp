#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mvcnn/network.hpp"

namespace mvcnn {

// Checkpoint layout: magic line, format-version line, a key-value config
// block (including the vocabulary) terminated by "end", then one binary
// record per named parameter: u32 name length, name bytes, u32 rank, u32
// extents, then the values as little-endian 32-bit floats. All integers are
// little-endian.
inline constexpr const char* kCheckpointMagic = "MVCNN-CHECKPOINT";
inline constexpr std::uint32_t kCheckpointFormat = 1;

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  check(in.good(), "checkpoint: truncated integer");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& out, float v) {
  write_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline float read_f32(std::istream& in) {
  return std::bit_cast<float>(read_u32(in));
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

inline std::vector<std::size_t> split_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

}  // namespace detail

inline void save_checkpoint(MvcnnModel& model, std::ostream& out) {
  const NetworkConfig& cfg = model.cfg;
  out << kCheckpointMagic << "\n";
  out << "format " << kCheckpointFormat << "\n";
  out << "config\n";
  out << "channels " << cfg.channels << "\n";
  out << "dim " << cfg.dim << "\n";
  out << "layers " << cfg.layers << "\n";
  out << "filter_sizes " << detail::join_sizes(cfg.filter_sizes) << "\n";
  out << "kernels " << cfg.kernels_per_size << "\n";
  out << "k_top " << cfg.k_top << "\n";
  out << "hidden_dim " << cfg.hidden_dim << "\n";
  out << "num_classes " << cfg.num_classes << "\n";
  out << std::setprecision(std::numeric_limits<real>::max_digits10)
      << "dropout_keep " << cfg.dropout_keep_prob << "\n";
  out << "vocab " << model.table.vocab_size() << "\n";
  for (const std::string& w : model.table.words) out << w << "\n";
  out << "end\n";
  for (Parameter* p : model.parameters()) {
    detail::write_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::write_u32(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t e : p->value.shape())
      detail::write_u32(out, static_cast<std::uint32_t>(e));
    for (std::size_t i = 0; i < p->value.size(); ++i)
      detail::write_f32(out, static_cast<float>(p->value[i]));
  }
}

inline MvcnnModel load_checkpoint(std::istream& in) {
  std::string line;
  check(std::getline(in, line) && line == kCheckpointMagic,
        "checkpoint: bad magic string");
  check(std::getline(in, line) && line.rfind("format ", 0) == 0,
        "checkpoint: missing format version");
  const unsigned long version = std::stoul(line.substr(7));
  check(version == kCheckpointFormat,
        "checkpoint: unsupported format version " + std::to_string(version));
  check(std::getline(in, line) && line == "config",
        "checkpoint: missing config block");

  NetworkConfig cfg;
  std::vector<std::string> words;
  while (std::getline(in, line) && line != "end") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "channels") ls >> cfg.channels;
    else if (key == "dim") ls >> cfg.dim;
    else if (key == "layers") ls >> cfg.layers;
    else if (key == "filter_sizes") {
      std::string v;
      ls >> v;
      cfg.filter_sizes = detail::split_sizes(v);
    } else if (key == "kernels") ls >> cfg.kernels_per_size;
    else if (key == "k_top") ls >> cfg.k_top;
    else if (key == "hidden_dim") ls >> cfg.hidden_dim;
    else if (key == "num_classes") ls >> cfg.num_classes;
    else if (key == "dropout_keep") {
      double v;
      ls >> v;
      cfg.dropout_keep_prob = static_cast<real>(v);
    } else if (key == "vocab") {
      std::size_t n = 0;
      ls >> n;
      words.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        check(static_cast<bool>(std::getline(in, line)),
              "checkpoint: truncated vocabulary");
        words.push_back(line);
      }
    } else {
      throw std::invalid_argument("checkpoint: unknown config key '" + key +
                                  "'");
    }
  }
  check(line == "end", "checkpoint: config block not terminated");
  check(!words.empty() && words[0] == MultichannelTable::kPaddingWord,
        "checkpoint: vocabulary must start with the padding word");

  MultichannelTable table;
  table.dim = cfg.dim;
  table.words = words;
  for (std::size_t i = 0; i < words.size(); ++i)
    table.word_index.emplace(words[i], static_cast<int>(i));
  table.presence.assign(cfg.channels,
                        std::vector<WordOrigin>(words.size(),
                                                WordOrigin::Random));
  for (auto& row : table.presence) row[0] = WordOrigin::Padding;
  for (std::size_t ch = 0; ch < cfg.channels; ++ch)
    table.channels.emplace_back("embedding.ch" + std::to_string(ch),
                                std::vector<std::size_t>{words.size(),
                                                         cfg.dim});

  Rng dummy(0);
  MvcnnModel model = build_model(cfg, std::move(table), dummy);
  for (Parameter* p : model.parameters()) {
    const std::uint32_t name_len = detail::read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    check(in.good() && name == p->name,
          "checkpoint: expected parameter '" + p->name + "', found '" + name +
              "'");
    const std::uint32_t rank = detail::read_u32(in);
    check(rank == p->value.rank(),
          "checkpoint: rank mismatch for " + p->name);
    for (std::size_t a = 0; a < rank; ++a) {
      const std::uint32_t e = detail::read_u32(in);
      check(e == p->value.shape()[a],
            "checkpoint: shape mismatch for " + p->name);
    }
    for (std::size_t i = 0; i < p->value.size(); ++i)
      p->value[i] = static_cast<real>(detail::read_f32(in));
  }
  return model;
}

}  // namespace mvcnn
