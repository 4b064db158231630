#pragma once

#include <cctype>
#include <cstddef>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvcnn/array.hpp"
#include "mvcnn/rng.hpp"

namespace mvcnn {

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

namespace detail {

inline bool is_url_token(const std::string& t) {
  return t.rfind("http://", 0) == 0 || t.rfind("https://", 0) == 0 ||
         t.rfind("www.", 0) == 0;
}

// Runs of the same letter longer than 2 collapse to 2. Letters are compared
// case-insensitively; otherwise the later lowercasing step could merge two
// adjacent runs and break idempotence.
inline std::string collapse_letter_runs(const std::string& t) {
  std::string out;
  out.reserve(t.size());
  std::size_t i = 0;
  while (i < t.size()) {
    const unsigned char c = t[i];
    if (!std::isalpha(c)) {
      out.push_back(t[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < t.size() && std::isalpha(static_cast<unsigned char>(t[j])) &&
           std::tolower(static_cast<unsigned char>(t[j])) == std::tolower(c))
      ++j;
    const std::size_t run = j - i;
    const std::size_t keep = run > 2 ? 2 : run;
    out.append(t, i, keep);
    i = j;
  }
  return out;
}

}  // namespace detail

/// Tweet normalization: URLs -> "url", @-mentions -> "username", letter runs
/// longer than two collapse to two, then everything is lowercased.
inline std::string normalize_tweet(const std::string& text) {
  std::vector<std::string> tokens = tokenize(text);
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    std::string t = tokens[k];
    if (detail::is_url_token(t)) {
      t = "url";
    } else if (!t.empty() && t[0] == '@') {
      t = "username";
    } else {
      t = detail::collapse_letter_runs(t);
      for (char& c : t)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (k) out.push_back(' ');
    out += t;
  }
  return out;
}

struct Dataset {
  struct Example {
    int label = 0;
    std::vector<std::string> tokens;
  };
  std::vector<Example> examples;
  int num_classes = 0;
  std::string split;
};

/// Lines are "label<TAB>text" with 0-based integer labels. num_classes is
/// max label + 1 unless a larger count is declared up front.
inline Dataset load_tsv(std::istream& in, bool tweet_normalize = false,
                        int declared_classes = 0) {
  Dataset ds;
  ds.num_classes = declared_classes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    check(tab != std::string::npos,
          "load_tsv: line " + std::to_string(lineno) + " has no TAB");
    const std::string label_str = line.substr(0, tab);
    std::string text = line.substr(tab + 1);
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(label_str, &used);
      check(used == label_str.size() && label >= 0, "bad label");
    } catch (const std::exception&) {
      throw std::invalid_argument("load_tsv: line " + std::to_string(lineno) +
                                  " has a malformed label '" + label_str +
                                  "'");
    }
    check(declared_classes == 0 || label < declared_classes,
          "load_tsv: line " + std::to_string(lineno) +
              " label exceeds the declared class count");
    if (tweet_normalize) text = normalize_tweet(text);
    std::vector<std::string> tokens = tokenize(text);
    check(!tokens.empty(),
          "load_tsv: line " + std::to_string(lineno) + " has no tokens");
    ds.num_classes = std::max(ds.num_classes, label + 1);
    ds.examples.push_back({label, std::move(tokens)});
  }
  return ds;
}

struct EncodedDataset {
  std::vector<std::vector<int>> token_ids;
  std::vector<int> labels;
  int num_classes = 0;
};

/// Map tokens to vocabulary ids. Words outside the vocabulary map to the
/// padding id 0 (a frozen zero vector) so evaluation on unseen text works.
inline EncodedDataset encode_dataset(
    const Dataset& ds, const std::unordered_map<std::string, int>& word_index) {
  EncodedDataset out;
  out.num_classes = ds.num_classes;
  out.token_ids.reserve(ds.examples.size());
  out.labels.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) {
    std::vector<int> ids;
    ids.reserve(ex.tokens.size());
    for (const std::string& t : ex.tokens) {
      auto it = word_index.find(t);
      ids.push_back(it == word_index.end() ? 0 : it->second);
    }
    out.token_ids.push_back(std::move(ids));
    out.labels.push_back(ex.label);
  }
  return out;
}

/// One mini-batch. Rows are padded with id 0 to the batch's own max length;
/// padding is storage only — the network always reads a row at its true
/// length, so dynamic pooling sees s, never s_max.
struct Batch {
  std::vector<std::vector<int>> token_ids;  // batch_size rows of equal width
  std::vector<std::size_t> true_lengths;
  std::vector<int> labels;
  std::vector<std::size_t> example_ids;  // position in the source dataset
};

inline std::vector<Batch> build_batches(const EncodedDataset& ds,
                                        std::size_t batch_size, Rng& rng) {
  check(batch_size >= 1, "build_batches: batch_size must be >= 1");
  check(!ds.token_ids.empty(), "build_batches: empty dataset");
  std::vector<std::size_t> order(ds.token_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    std::size_t width = 0;
    for (std::size_t i = start; i < end; ++i)
      width = std::max(width, ds.token_ids[order[i]].size());
    for (std::size_t i = start; i < end; ++i) {
      const auto& ids = ds.token_ids[order[i]];
      std::vector<int> row(width, 0);
      std::copy(ids.begin(), ids.end(), row.begin());
      b.token_ids.push_back(std::move(row));
      b.true_lengths.push_back(ids.size());
      b.labels.push_back(ds.labels[order[i]]);
      b.example_ids.push_back(order[i]);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace mvcnn
