#pragma once

#include <cstddef>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mvcnn/array.hpp"
#include "mvcnn/optim.hpp"
#include "mvcnn/rng.hpp"

namespace mvcnn {

/// One pretrained embedding set: a vocabulary mapped to d-dimensional
/// vectors. Words keep file order so downstream passes are reproducible.
struct EmbeddingVersion {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::string> words;
  std::vector<std::vector<real>> vectors;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t duplicate_warnings = 0;

  bool contains(const std::string& w) const { return index.count(w) > 0; }

  const std::vector<real>* find(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? nullptr : &vectors[it->second];
  }

  // First occurrence wins; later duplicates are counted, not stored.
  void add(const std::string& w, std::vector<real> vec) {
    check(vec.size() == dim, "EmbeddingVersion: wrong vector dimension");
    if (index.count(w)) {
      ++duplicate_warnings;
      return;
    }
    index.emplace(w, words.size());
    words.push_back(w);
    vectors.push_back(std::move(vec));
  }
};

/// Parse the text format "word v1 v2 ... vd", one entry per line, with an
/// optional "count dim" header. Dimension comes from the header or the first
/// data line. CRLF is accepted.
inline EmbeddingVersion load_embeddings(std::istream& in,
                                        std::string name = "") {
  EmbeddingVersion v;
  v.name = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;  // blank line

    std::vector<real> vec;
    std::string field;
    bool numeric_word = true;
    for (char c : word)
      if (!std::isdigit(static_cast<unsigned char>(c))) numeric_word = false;
    std::size_t count_fields = 0;
    while (ls >> field) {
      ++count_fields;
      try {
        std::size_t used = 0;
        vec.push_back(static_cast<real>(std::stod(field, &used)));
        check(used == field.size(), "trailing junk");
      } catch (const std::exception&) {
        throw std::invalid_argument(
            "load_embeddings: line " + std::to_string(lineno) +
            ": cannot parse '" + field + "' as a real");
      }
    }
    if (first_content_line && numeric_word && count_fields == 1 &&
        vec[0] > real(0) && vec[0] == std::floor(vec[0])) {
      // "count dim" header
      v.dim = static_cast<std::size_t>(vec[0]);
      first_content_line = false;
      continue;
    }
    first_content_line = false;
    if (v.dim == 0) v.dim = vec.size();
    check(vec.size() == v.dim,
          "load_embeddings: line " + std::to_string(lineno) + " has dimension " +
              std::to_string(vec.size()) + ", expected " +
              std::to_string(v.dim));
    check(v.dim > 0, "load_embeddings: line " + std::to_string(lineno) +
                         " has no vector components");
    v.add(word, std::move(vec));
  }
  return v;
}

/// The Table-2 quantities: per-version unknown counts plus the full /
/// partial / no-hit split of a corpus vocabulary.
struct CoverageStats {
  std::vector<std::size_t> per_version_unknown;
  std::size_t vocab_size = 0;
  std::size_t full_hit = 0;
  std::size_t partial_hit = 0;
  std::size_t no_hit = 0;
};

inline CoverageStats coverage_stats(
    const std::vector<EmbeddingVersion>& versions,
    const std::vector<std::string>& corpus_vocab) {
  check(!versions.empty(), "coverage_stats: need at least one version");
  check(!corpus_vocab.empty(), "coverage_stats: empty corpus vocabulary");
  CoverageStats s;
  s.vocab_size = corpus_vocab.size();
  s.per_version_unknown.assign(versions.size(), 0);
  for (const std::string& w : corpus_vocab) {
    std::size_t known_in = 0;
    for (std::size_t i = 0; i < versions.size(); ++i) {
      if (versions[i].contains(w)) {
        ++known_in;
      } else {
        ++s.per_version_unknown[i];
      }
    }
    if (known_in == versions.size()) {
      ++s.full_hit;
    } else if (known_in > 0) {
      ++s.partial_hit;
    } else {
      ++s.no_hit;
    }
  }
  return s;
}

enum class WordOrigin : unsigned char { Padding, Pretrained, Imputed, Random };

/// Mutual-learning output: every version extended to the union vocabulary,
/// with per-(version, word) provenance.
struct CompletedVersions {
  std::vector<EmbeddingVersion> versions;
  std::vector<std::unordered_map<std::string, WordOrigin>> provenance;
};

/// The trainable network input: c per-channel lookup tables over one
/// vocabulary. Index 0 is the padding word and stays a zero vector forever.
struct MultichannelTable {
  static constexpr int kPaddingId = 0;
  static constexpr const char* kPaddingWord = "<pad>";

  std::vector<std::string> words;  // words[0] == kPaddingWord
  std::unordered_map<std::string, int> word_index;
  std::vector<Parameter> channels;  // each |words| x dim
  std::vector<std::vector<WordOrigin>> presence;  // channels x words
  std::size_t dim = 0;

  std::size_t vocab_size() const { return words.size(); }
  std::size_t channel_count() const { return channels.size(); }

  int id_of(const std::string& w) const {
    auto it = word_index.find(w);
    return it == word_index.end() ? -1 : it->second;
  }

  // The padding row takes no gradient, so AdaGrad never moves it.
  void mask_padding_row_grads() {
    for (Parameter& ch : channels)
      for (std::size_t j = 0; j < dim; ++j) ch.gradient[j] = real(0);
  }
};

/// Build the c-channel table for a corpus vocabulary. Priority per channel
/// and word: the version's own vector, then the mutual-learning imputation,
/// then uniform random in [-init_range, init_range].
inline MultichannelTable init_multichannel(
    const std::vector<std::string>& corpus_vocab,
    const std::vector<EmbeddingVersion>& versions,
    const CompletedVersions* imputed, Rng& rng, real init_range = real(0.1)) {
  check(!versions.empty(), "init_multichannel: need at least one version");
  const std::size_t dim = versions[0].dim;
  for (const auto& v : versions)
    check(v.dim == dim, "init_multichannel: versions disagree on dimension");
  if (imputed) {
    check(imputed->versions.size() == versions.size(),
          "init_multichannel: imputed version count mismatch");
    for (const auto& v : imputed->versions)
      check(v.dim == dim, "init_multichannel: imputed dimension mismatch");
  }

  MultichannelTable t;
  t.dim = dim;
  t.words.push_back(MultichannelTable::kPaddingWord);
  t.word_index.emplace(MultichannelTable::kPaddingWord,
                       MultichannelTable::kPaddingId);
  for (const std::string& w : corpus_vocab) {
    check(!t.word_index.count(w),
          "init_multichannel: duplicate corpus word '" + w + "'");
    t.word_index.emplace(w, static_cast<int>(t.words.size()));
    t.words.push_back(w);
  }

  const std::size_t vocab = t.words.size();
  t.presence.assign(versions.size(),
                    std::vector<WordOrigin>(vocab, WordOrigin::Random));
  for (std::size_t ch = 0; ch < versions.size(); ++ch) {
    Parameter p("embedding.ch" + std::to_string(ch), {vocab, dim});
    t.presence[ch][0] = WordOrigin::Padding;
    for (std::size_t row = 1; row < vocab; ++row) {
      const std::string& w = t.words[row];
      const std::vector<real>* vec = versions[ch].find(w);
      WordOrigin origin = WordOrigin::Pretrained;
      if (!vec && imputed) {
        vec = imputed->versions[ch].find(w);
        if (vec) {
          auto it = imputed->provenance[ch].find(w);
          origin = (it != imputed->provenance[ch].end())
                       ? it->second
                       : WordOrigin::Imputed;
        }
      }
      real* dst = p.value.data() + row * dim;
      if (vec) {
        for (std::size_t j = 0; j < dim; ++j) dst[j] = (*vec)[j];
        t.presence[ch][row] = origin;
      } else {
        for (std::size_t j = 0; j < dim; ++j)
          dst[j] = static_cast<real>(rng.uniform(-init_range, init_range));
        t.presence[ch][row] = WordOrigin::Random;
      }
    }
    t.channels.push_back(std::move(p));
  }
  return t;
}

}  // namespace mvcnn
