#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvcnn/mvcnn.hpp"

namespace mvcnn {
namespace cli {

// Exit codes: 0 success, 1 validation error, 2 runtime or numeric failure.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::vector<std::string> embeddings;
  std::vector<std::string> completed;
  std::string train_path, dev_path, test_path;
  std::string corpus_path;
  std::string checkpoint_path;
  std::string init_checkpoint_path;
  std::string out_dir = ".";
  std::string report_path;
  bool tweet_normalize = false;

  std::uint64_t seed = 1;
  std::size_t dim = 50;
  std::size_t channels = 1;
  std::size_t layers = 1;
  std::vector<std::size_t> filter_sizes = {3, 5, 7, 9};
  std::size_t kernels = 5;
  std::size_t k_top = 4;
  std::size_t hidden_dim = 0;

  double lr = 0.01;
  double dropout_keep = 0.8;
  double l2 = 5e-3;
  std::size_t batch_size = 50;
  std::size_t max_epochs = 25;
  std::size_t patience = 10;
  bool l2_on_embeddings = false;
  double init_range = 0.1;

  std::size_t context_width = 3;
  std::size_t noise_k = 10;
  std::size_t pretrain_epochs = 1;
  double noise_alpha = 0.75;
  double ridge = -1.0;
  std::size_t num_classes = 0;  // 0: infer from data
};

namespace detail {

inline std::string basename_no_ext(const std::string& path) {
  std::filesystem::path p(path);
  return p.stem().string();
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(static_cast<bool>(in), "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline EmbeddingVersion load_embedding_file(const std::string& path) {
  std::ifstream in(path);
  check(static_cast<bool>(in), "cannot open embedding file: " + path);
  return load_embeddings(in, basename_no_ext(path));
}

inline Dataset load_dataset_file(const std::string& path, bool tweet,
                                 const std::string& split) {
  std::ifstream in(path);
  check(static_cast<bool>(in), "cannot open dataset file: " + path);
  Dataset ds = load_tsv(in, tweet);
  ds.split = split;
  return ds;
}

inline std::vector<std::vector<std::string>> load_corpus_file(
    const std::string& path, bool tweet) {
  std::ifstream in(path);
  check(static_cast<bool>(in), "cannot open corpus file: " + path);
  std::vector<std::vector<std::string>> sentences;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (tweet) line = normalize_tweet(line);
    std::vector<std::string> tokens = tokenize(line);
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
  }
  check(!sentences.empty(), "corpus file has no sentences: " + path);
  return sentences;
}

// Corpus vocabulary in first-seen order over the given sources.
inline std::vector<std::string> collect_vocab(
    const std::vector<const Dataset*>& datasets,
    const std::vector<std::vector<std::string>>* corpus) {
  std::vector<std::string> vocab;
  std::unordered_map<std::string, bool> seen;
  const auto visit = [&](const std::vector<std::string>& tokens) {
    for (const std::string& t : tokens) {
      if (!seen.count(t)) {
        seen.emplace(t, true);
        vocab.push_back(t);
      }
    }
  };
  for (const Dataset* ds : datasets)
    for (const auto& ex : ds->examples) visit(ex.tokens);
  if (corpus)
    for (const auto& sent : *corpus) visit(sent);
  return vocab;
}

inline std::vector<std::vector<int>> encode_corpus(
    const std::vector<std::vector<std::string>>& corpus,
    const std::unordered_map<std::string, int>& index) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.size());
  for (const auto& sent : corpus) {
    std::vector<int> ids;
    ids.reserve(sent.size());
    for (const std::string& t : sent) {
      auto it = index.find(t);
      check(it != index.end(), "corpus word missing from vocabulary: " + t);
      ids.push_back(it->second);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

inline void echo_config(const Options& o, const std::string& command) {
  auto& out = std::cout;
  out << "# effective configuration (" << command << ")\n";
  out << "seed=" << o.seed << "\n";
  out << "dim=" << o.dim << "\n";
  out << "channels=" << o.channels << "\n";
  out << "layers=" << o.layers << "\n";
  out << "filter_sizes=";
  for (std::size_t i = 0; i < o.filter_sizes.size(); ++i)
    out << (i ? "," : "") << o.filter_sizes[i];
  out << "\n";
  out << "kernels=" << o.kernels << "\n";
  out << "k_top=" << o.k_top << "\n";
  out << "hidden_dim=" << o.hidden_dim << "\n";
  out << "lr=" << o.lr << "\n";
  out << "dropout_keep=" << o.dropout_keep << "\n";
  out << "l2=" << o.l2 << "\n";
  out << "l2_on_embeddings=" << (o.l2_on_embeddings ? 1 : 0) << "\n";
  out << "batch_size=" << o.batch_size << "\n";
  out << "max_epochs=" << o.max_epochs << "\n";
  out << "patience=" << o.patience << "\n";
  out << "init_range=" << o.init_range << "\n";
  out << "context_width=" << o.context_width << "\n";
  out << "noise_k=" << o.noise_k << "\n";
  out << "pretrain_epochs=" << o.pretrain_epochs << "\n";
  out << "noise_alpha=" << o.noise_alpha << "\n";
  out << "ridge=" << o.ridge << "\n";
  out << "tweet_normalize=" << (o.tweet_normalize ? 1 : 0) << "\n";
}

inline NetworkConfig network_config(const Options& o, std::size_t channels,
                                    std::size_t dim, std::size_t classes) {
  NetworkConfig cfg;
  cfg.channels = channels;
  cfg.dim = dim;
  cfg.layers = o.layers;
  cfg.filter_sizes = o.filter_sizes;
  cfg.kernels_per_size = o.kernels;
  cfg.k_top = o.k_top;
  cfg.hidden_dim = o.hidden_dim;
  cfg.num_classes = classes;
  cfg.dropout_keep_prob = static_cast<real>(o.dropout_keep);
  return cfg;
}

inline TrainConfig train_config(const Options& o) {
  TrainConfig cfg;
  cfg.lr = static_cast<real>(o.lr);
  cfg.dropout_keep_prob = static_cast<real>(o.dropout_keep);
  cfg.l2_lambda = static_cast<real>(o.l2);
  cfg.batch_size = o.batch_size;
  cfg.max_epochs = o.max_epochs;
  cfg.patience = o.patience;
  cfg.seed = o.seed;
  cfg.l2_on_embeddings = o.l2_on_embeddings;
  return cfg;
}

// Build the multichannel table for a vocabulary, from embedding files plus
// optional completed (mutually-learned) files; words in a completed file but
// not in its base file count as imputed.
inline MultichannelTable build_table(const Options& o,
                                     const std::vector<std::string>& vocab,
                                     std::size_t* dim_out) {
  std::vector<EmbeddingVersion> versions;
  for (const std::string& path : o.embeddings)
    versions.push_back(load_embedding_file(path));

  CompletedVersions completed;
  const CompletedVersions* completed_ptr = nullptr;
  if (!o.completed.empty()) {
    check(o.completed.size() == versions.size(),
          "--completed must list one file per --embeddings file");
    for (std::size_t i = 0; i < o.completed.size(); ++i) {
      EmbeddingVersion cv = load_embedding_file(o.completed[i]);
      std::unordered_map<std::string, WordOrigin> prov;
      for (const std::string& w : cv.words)
        prov.emplace(w, versions[i].contains(w) ? WordOrigin::Pretrained
                                                : WordOrigin::Imputed);
      completed.versions.push_back(std::move(cv));
      completed.provenance.push_back(std::move(prov));
    }
    completed_ptr = &completed;
  }

  Rng rng(mix64(o.seed, 1));
  if (versions.empty()) {
    // no pretrained files: random channels of the requested geometry
    std::vector<EmbeddingVersion> blank(o.channels);
    for (std::size_t i = 0; i < blank.size(); ++i) {
      blank[i].name = "random" + std::to_string(i);
      blank[i].dim = o.dim;
    }
    *dim_out = o.dim;
    return init_multichannel(vocab, blank, nullptr, rng,
                             static_cast<real>(o.init_range));
  }
  *dim_out = versions[0].dim;
  return init_multichannel(vocab, versions, completed_ptr, rng,
                           static_cast<real>(o.init_range));
}

inline void write_checkpoint_file(MvcnnModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  check(static_cast<bool>(out), "cannot write checkpoint: " + path);
  save_checkpoint(model, out);
  out.close();
  std::cout << "checkpoint " << path << "\n";
  std::cout << "checkpoint_hash " << std::hex << std::setfill('0')
            << std::setw(16) << fnv1a(read_file_bytes(path)) << std::dec
            << std::setfill(' ') << "\n";
}

}  // namespace detail

inline int cmd_stats(const Options& o) {
  std::vector<Dataset> datasets;
  std::vector<const Dataset*> ptrs;
  for (const auto& [path, split] :
       {std::pair{o.train_path, "train"}, std::pair{o.dev_path, "dev"},
        std::pair{o.test_path, "test"}}) {
    if (path.empty()) continue;
    datasets.push_back(detail::load_dataset_file(path, o.tweet_normalize,
                                                 split));
  }
  for (const Dataset& d : datasets) ptrs.push_back(&d);
  std::vector<std::vector<std::string>> corpus;
  if (!o.corpus_path.empty())
    corpus = detail::load_corpus_file(o.corpus_path, o.tweet_normalize);

  std::vector<EmbeddingVersion> versions;
  for (const std::string& path : o.embeddings)
    versions.push_back(detail::load_embedding_file(path));

  const std::vector<std::string> vocab =
      detail::collect_vocab(ptrs, corpus.empty() ? nullptr : &corpus);
  const CoverageStats stats = coverage_stats(versions, vocab);

  for (std::size_t i = 0; i < versions.size(); ++i)
    std::cout << "unknown " << versions[i].name << " "
              << stats.per_version_unknown[i] << "\n";
  std::cout << "vocab_size " << stats.vocab_size << "\n";
  std::cout << "full_hit " << stats.full_hit << "\n";
  std::cout << "partial_hit " << stats.partial_hit << "\n";
  std::cout << "no_hit " << stats.no_hit << "\n";
  return kExitOk;
}

inline int cmd_mutual_learn(const Options& o) {
  std::vector<EmbeddingVersion> versions;
  for (const std::string& path : o.embeddings)
    versions.push_back(detail::load_embedding_file(path));

  const CompletedVersions completed =
      complete_all(versions, static_cast<real>(o.ridge));

  std::filesystem::create_directories(o.out_dir);
  for (const EmbeddingVersion& v : completed.versions) {
    const std::string path = o.out_dir + "/" + v.name + ".completed";
    std::ofstream out(path);
    check(static_cast<bool>(out), "cannot write " + path);
    save_embeddings(v, out);
    std::cout << "wrote " << path << " (" << v.words.size() << " words)\n";
  }

  const std::string prov_path = o.out_dir + "/provenance.tsv";
  std::ofstream prov(prov_path);
  check(static_cast<bool>(prov), "cannot write " + prov_path);
  prov << "word";
  for (const EmbeddingVersion& v : completed.versions) prov << "\t" << v.name;
  prov << "\n";
  for (const std::string& w : completed.versions[0].words) {
    prov << w;
    for (std::size_t i = 0; i < completed.versions.size(); ++i) {
      const auto it = completed.provenance[i].find(w);
      prov << "\t"
           << (it != completed.provenance[i].end() &&
                       it->second == WordOrigin::Imputed
                   ? "imputed"
                   : "pretrained");
    }
    prov << "\n";
  }
  std::cout << "wrote " << prov_path << "\n";
  return kExitOk;
}

inline int cmd_pretrain(const Options& o) {
  const auto corpus_tokens =
      detail::load_corpus_file(o.corpus_path, o.tweet_normalize);
  std::vector<Dataset> datasets;
  for (const auto& [path, split] :
       {std::pair{o.train_path, "train"}, std::pair{o.dev_path, "dev"},
        std::pair{o.test_path, "test"}}) {
    if (path.empty()) continue;
    datasets.push_back(detail::load_dataset_file(path, o.tweet_normalize,
                                                 split));
  }
  std::vector<const Dataset*> ptrs;
  for (const Dataset& d : datasets) ptrs.push_back(&d);
  const std::vector<std::string> vocab =
      detail::collect_vocab(ptrs, &corpus_tokens);

  std::size_t dim = 0;
  MultichannelTable table = detail::build_table(o, vocab, &dim);
  std::size_t classes = o.num_classes ? o.num_classes : 2;
  for (const Dataset& d : datasets)
    classes = std::max(classes, static_cast<std::size_t>(d.num_classes));

  NetworkConfig net = detail::network_config(
      o, table.channel_count(), dim, classes);
  Rng model_rng(mix64(o.seed, 2));
  MvcnnModel model = build_model(net, std::move(table), model_rng);

  const auto corpus = detail::encode_corpus(corpus_tokens,
                                            model.table.word_index);
  const NoiseDistribution pn = build_noise_distribution(
      corpus, model.table.vocab_size(), o.noise_alpha);

  PretrainConfig pc;
  pc.context_halfwidth = o.context_width;
  pc.noise_k = o.noise_k;
  pc.epochs = o.pretrain_epochs;
  pc.lr = static_cast<real>(o.lr);
  pc.noise_alpha = o.noise_alpha;
  pc.seed = o.seed;
  pc.init_range = static_cast<real>(o.init_range);

  Rng table_rng(mix64(o.seed, 3));
  PretrainTables tables = make_pretrain_tables(
      model.table.vocab_size(), dim, table_rng, pc.init_range);

  const PretrainTrace trace =
      run_pretraining(corpus, model, tables, pn, pc);
  for (std::size_t e = 0; e < trace.epoch_mean_losses.size(); ++e)
    std::cout << "epoch " << (e + 1) << " pretrain_loss "
              << trace.epoch_mean_losses[e] << "\n";

  // PretrainTables are deliberately dropped here; only the fine-tuned
  // multichannel input and network weights go into the checkpoint.
  detail::write_checkpoint_file(model, o.checkpoint_path);
  return kExitOk;
}

inline int cmd_train(const Options& o) {
  Dataset train_ds =
      detail::load_dataset_file(o.train_path, o.tweet_normalize, "train");
  Dataset dev_ds, test_ds;
  const bool have_dev = !o.dev_path.empty();
  const bool have_test = !o.test_path.empty();
  if (have_dev)
    dev_ds = detail::load_dataset_file(o.dev_path, o.tweet_normalize, "dev");
  if (have_test)
    test_ds =
        detail::load_dataset_file(o.test_path, o.tweet_normalize, "test");

  std::size_t classes = static_cast<std::size_t>(train_ds.num_classes);
  if (have_dev) classes = std::max(classes, (std::size_t)dev_ds.num_classes);
  if (have_test) classes = std::max(classes, (std::size_t)test_ds.num_classes);
  if (o.num_classes) {
    check(classes <= o.num_classes,
          "dataset labels exceed the requested --num-classes");
    classes = o.num_classes;
  }

  MvcnnModel model;
  if (!o.init_checkpoint_path.empty()) {
    std::ifstream in(o.init_checkpoint_path, std::ios::binary);
    check(static_cast<bool>(in),
          "cannot open checkpoint: " + o.init_checkpoint_path);
    model = load_checkpoint(in);
    check(model.cfg.num_classes == classes,
          "checkpoint was built for " +
              std::to_string(model.cfg.num_classes) +
              " classes but the datasets need " + std::to_string(classes));
    std::size_t missing = 0;
    std::string first_missing;
    for (const Dataset* ds : {&train_ds, &dev_ds, &test_ds})
      for (const auto& ex : ds->examples)
        for (const std::string& t : ex.tokens)
          if (model.table.id_of(t) < 0) {
            if (missing == 0) first_missing = t;
            ++missing;
          }
    check(missing == 0,
          "checkpoint vocabulary is missing " + std::to_string(missing) +
              " dataset words (first: '" + first_missing +
              "'); pretrain with the datasets supplied");
  } else {
    std::vector<const Dataset*> ptrs{&train_ds};
    if (have_dev) ptrs.push_back(&dev_ds);
    if (have_test) ptrs.push_back(&test_ds);
    const std::vector<std::string> vocab = detail::collect_vocab(ptrs, nullptr);
    std::size_t dim = 0;
    MultichannelTable table = detail::build_table(o, vocab, &dim);
    NetworkConfig net =
        detail::network_config(o, table.channel_count(), dim, classes);
    Rng model_rng(mix64(o.seed, 2));
    model = build_model(net, std::move(table), model_rng);
  }

  const EncodedDataset train_enc = [&] {
    EncodedDataset e = encode_dataset(train_ds, model.table.word_index);
    e.num_classes = static_cast<int>(classes);
    return e;
  }();
  EncodedDataset dev_enc, test_enc;
  if (have_dev) {
    dev_enc = encode_dataset(dev_ds, model.table.word_index);
    dev_enc.num_classes = static_cast<int>(classes);
  }
  if (have_test) {
    test_enc = encode_dataset(test_ds, model.table.word_index);
    test_enc.num_classes = static_cast<int>(classes);
  }

  const TrainConfig tc = detail::train_config(o);
  const TrainReport report =
      train_supervised(model, train_enc, have_dev ? &dev_enc : nullptr,
                       have_test ? &test_enc : nullptr, tc);

  if (!o.report_path.empty()) {
    std::ofstream rout(o.report_path);
    check(static_cast<bool>(rout), "cannot write report: " + o.report_path);
    print_report(report, rout);
  }
  print_report(report, std::cout);
  detail::write_checkpoint_file(model, o.checkpoint_path);
  return kExitOk;
}

inline int cmd_eval(const Options& o) {
  std::ifstream in(o.checkpoint_path, std::ios::binary);
  check(static_cast<bool>(in), "cannot open checkpoint: " + o.checkpoint_path);
  MvcnnModel model = load_checkpoint(in);
  Dataset ds =
      detail::load_dataset_file(o.test_path, o.tweet_normalize, "test");
  EncodedDataset enc = encode_dataset(ds, model.table.word_index);
  check(static_cast<std::size_t>(enc.num_classes) <= model.cfg.num_classes,
        "dataset labels exceed the checkpoint class count");
  enc.num_classes = static_cast<int>(model.cfg.num_classes);
  std::cout << "accuracy " << evaluate(model, enc) << "\n";
  return kExitOk;
}

/// Gradient check of the full supervised objective and the full pretraining
/// loss on a small random configuration. Nonzero exit above 1e-4.
inline int cmd_gradcheck(const Options& o) {
  const std::size_t dim = std::min<std::size_t>(o.dim, 6);
  const std::size_t vocab_words = 12;
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < vocab_words; ++i)
    vocab.push_back("w" + std::to_string(i));

  Rng rng(mix64(o.seed, 40));
  std::vector<EmbeddingVersion> blank(o.embeddings.empty() ? o.channels : 1);
  for (std::size_t i = 0; i < blank.size(); ++i) {
    blank[i].name = "random" + std::to_string(i);
    blank[i].dim = dim;
  }
  Rng init_rng(mix64(o.seed, 41));
  MultichannelTable table =
      init_multichannel(vocab, blank, nullptr, init_rng, real(0.5));

  NetworkConfig net = detail::network_config(o, table.channel_count(), dim, 3);
  net.hidden_dim = 0;  // pretraining path requires hidden == dim
  Rng model_rng(mix64(o.seed, 42));
  MvcnnModel model = build_model(net, std::move(table), model_rng);

  const auto random_sentence = [&](std::size_t len) {
    std::vector<int> t;
    for (std::size_t i = 0; i < len; ++i)
      t.push_back(1 + static_cast<int>(rng.below(vocab_words)));
    return t;
  };
  const std::vector<std::vector<int>> sentences{random_sentence(5),
                                                random_sentence(3)};
  const std::vector<int> labels{0, 2};
  const std::vector<std::uint64_t> streams{mix64(o.seed, 50),
                                           mix64(o.seed, 51)};
  TrainConfig tc = detail::train_config(o);

  const auto supervised = [&]() {
    return supervised_batch_objective(model, sentences, labels, streams, tc,
                                      RunMode::Train);
  };
  GradCheckOptions gopt;
  gopt.coords_per_param = 6;
  gopt.seed = mix64(o.seed, 52);
  const GradCheckResult sup =
      finite_difference_check(supervised, model.parameters(), gopt);
  std::cout << "supervised max_rel_error " << sup.max_rel_error << " (worst "
            << sup.worst_param << "[" << sup.worst_coord << "])\n";

  Rng table_rng(mix64(o.seed, 43));
  PretrainTables tables =
      make_pretrain_tables(model.table.vocab_size(), dim, table_rng);
  const std::vector<std::vector<int>> corpus{sentences[0], sentences[1]};
  const NoiseDistribution pn =
      build_noise_distribution(corpus, model.table.vocab_size(), 0.75);
  std::vector<int> noise;
  for (std::size_t i = 0; i < o.noise_k; ++i) noise.push_back(pn.sample(rng));
  const std::size_t pos = 2;
  const auto pretrain = [&]() {
    model.zero_grads();
    tables.context.zero_grad();
    tables.output.zero_grad();
    tables.output_bias.zero_grad();
    return pretrain_example_loss(model, tables, sentences[0], pos, noise, pn,
                                 o.context_width, true);
  };
  std::vector<Parameter*> pparams = model.pretrain_parameters();
  pparams.push_back(&tables.context);
  pparams.push_back(&tables.output);
  pparams.push_back(&tables.output_bias);
  const GradCheckResult pre =
      finite_difference_check(pretrain, pparams, gopt);
  std::cout << "pretrain max_rel_error " << pre.max_rel_error << " (worst "
            << pre.worst_param << "[" << pre.worst_coord << "])\n";

  const real worst = std::max(sup.max_rel_error, pre.max_rel_error);
  std::cout << "max_rel_error " << worst << "\n";
  return worst < real(1e-4) ? kExitOk : kExitRuntime;
}

inline int run(int argc, const char* const* argv) {
  CLI::App app{"multichannel variable-size convolution sentence classifier"};
  app.fallthrough();
  Options o;

  app.set_config("--config", "", "flat key=value config file; flags override");

  app.add_option("--seed", o.seed, "run seed (required for train/pretrain)")
      ->capture_default_str();
  app.add_option("--embeddings", o.embeddings,
                 "pretrained embedding files, one per channel")
      ->capture_default_str();
  app.add_option("--completed", o.completed,
                 "mutually-learned embedding files matching --embeddings")
      ->capture_default_str();
  app.add_option("--train", o.train_path, "training TSV (label<TAB>text)")
      ->capture_default_str();
  app.add_option("--dev", o.dev_path, "development TSV")
      ->capture_default_str();
  app.add_option("--test", o.test_path, "test TSV")->capture_default_str();
  app.add_option("--corpus", o.corpus_path,
                 "plain-text corpus, one sentence per line")
      ->capture_default_str();
  app.add_option("--checkpoint", o.checkpoint_path,
                 "checkpoint path (output for train/pretrain, input for eval)")
      ->capture_default_str();
  app.add_option("--init-checkpoint", o.init_checkpoint_path,
                 "warm-start checkpoint for train")
      ->capture_default_str();
  app.add_option("--out-dir", o.out_dir, "output directory for mutual-learn")
      ->capture_default_str();
  app.add_option("--report", o.report_path, "write the train report here too")
      ->capture_default_str();
  app.add_flag("--tweet-normalize", o.tweet_normalize,
               "apply tweet normalization to all text inputs")
      ->capture_default_str();

  app.add_option("--dim", o.dim, "embedding dimension when no files are given")
      ->capture_default_str();
  app.add_option("--channels", o.channels,
                 "channel count when no files are given")
      ->capture_default_str();
  app.add_option("--layers", o.layers, "convolution layers L")
      ->capture_default_str();
  app.add_option("--filter-sizes", o.filter_sizes, "filter sizes")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--kernels", o.kernels, "kernels per filter size")
      ->capture_default_str();
  app.add_option("--k-top", o.k_top, "top-layer pooling size")
      ->capture_default_str();
  app.add_option("--hidden-dim", o.hidden_dim,
                 "sentence representation size (0: embedding dim)")
      ->capture_default_str();
  app.add_option("--num-classes", o.num_classes,
                 "class count (0: infer from data)")
      ->capture_default_str();

  app.add_option("--lr", o.lr, "initial AdaGrad learning rate")
      ->capture_default_str();
  app.add_option("--dropout-keep", o.dropout_keep,
                 "dropout keep probability before the classifier")
      ->capture_default_str();
  app.add_option("--l2", o.l2, "L2 weight")->capture_default_str();
  app.add_flag("--l2-on-embeddings", o.l2_on_embeddings,
               "include embedding tables in the L2 term")
      ->capture_default_str();
  app.add_option("--batch-size", o.batch_size, "mini-batch size")
      ->capture_default_str();
  app.add_option("--max-epochs", o.max_epochs, "epoch cap")
      ->capture_default_str();
  app.add_option("--patience", o.patience,
                 "early-stopping epochs without dev improvement")
      ->capture_default_str();
  app.add_option("--init-range", o.init_range,
                 "uniform range for random embedding rows")
      ->capture_default_str();

  app.add_option("--context-width", o.context_width,
                 "pretraining context half-width t")
      ->capture_default_str();
  app.add_option("--noise-k", o.noise_k, "NCE noise samples per example")
      ->capture_default_str();
  app.add_option("--pretrain-epochs", o.pretrain_epochs, "pretraining epochs")
      ->capture_default_str();
  app.add_option("--noise-alpha", o.noise_alpha,
                 "noise distribution exponent")
      ->capture_default_str();
  app.add_option("--ridge", o.ridge,
                 "projection ridge (negative: intersection-scaled default)")
      ->capture_default_str();

  CLI::App* stats = app.add_subcommand("stats", "vocabulary coverage report");
  CLI::App* mutual =
      app.add_subcommand("mutual-learn", "impute unknown words across "
                                         "embedding versions");
  CLI::App* pretrain =
      app.add_subcommand("pretrain", "unsupervised NCE pretraining");
  CLI::App* train = app.add_subcommand("train", "supervised training");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const CLI::App* chosen = nullptr;
  std::string command;
  for (const CLI::App* sub :
       {stats, mutual, pretrain, train, eval, gradcheck}) {
    if (sub->parsed()) {
      chosen = sub;
      command = sub->get_name();
    }
  }
  if (!chosen) {
    std::cerr << "error: choose a subcommand (stats, mutual-learn, pretrain, "
                 "train, eval, gradcheck); see --help\n";
    return kExitValidation;
  }

  // Validation collects every problem before reporting.
  std::vector<std::string> problems;
  const auto need_file = [&problems](const std::string& path,
                                     const std::string& what) {
    if (path.empty()) {
      problems.push_back("missing required option: " + what);
    } else if (!std::filesystem::exists(path)) {
      problems.push_back(what + " does not exist: " + path);
    }
  };
  for (const std::string& p : o.embeddings)
    if (!std::filesystem::exists(p))
      problems.push_back("embedding file does not exist: " + p);
  for (const std::string& p : o.completed)
    if (!std::filesystem::exists(p))
      problems.push_back("completed embedding file does not exist: " + p);

  if (command == "stats") {
    if (o.embeddings.empty())
      problems.push_back("stats needs at least one --embeddings file");
    if (o.train_path.empty() && o.dev_path.empty() && o.test_path.empty() &&
        o.corpus_path.empty())
      problems.push_back("stats needs a dataset (--train/--dev/--test) or "
                         "--corpus for the vocabulary");
    if (!o.train_path.empty()) need_file(o.train_path, "--train");
    if (!o.dev_path.empty()) need_file(o.dev_path, "--dev");
    if (!o.test_path.empty()) need_file(o.test_path, "--test");
    if (!o.corpus_path.empty()) need_file(o.corpus_path, "--corpus");
  } else if (command == "mutual-learn") {
    if (o.embeddings.size() < 2)
      problems.push_back("mutual-learn needs at least two --embeddings files");
  } else if (command == "pretrain") {
    need_file(o.corpus_path, "--corpus");
    if (o.checkpoint_path.empty())
      problems.push_back("pretrain needs --checkpoint for its output");
    if (app.count("--seed") == 0)
      problems.push_back("pretrain requires an explicit --seed");
    if (!o.train_path.empty()) need_file(o.train_path, "--train");
    if (!o.dev_path.empty()) need_file(o.dev_path, "--dev");
    if (!o.test_path.empty()) need_file(o.test_path, "--test");
  } else if (command == "train") {
    need_file(o.train_path, "--train");
    if (!o.dev_path.empty()) need_file(o.dev_path, "--dev");
    if (!o.test_path.empty()) need_file(o.test_path, "--test");
    if (o.checkpoint_path.empty())
      problems.push_back("train needs --checkpoint for its output");
    if (!o.init_checkpoint_path.empty())
      need_file(o.init_checkpoint_path, "--init-checkpoint");
    if (app.count("--seed") == 0)
      problems.push_back("train requires an explicit --seed");
  } else if (command == "eval") {
    need_file(o.checkpoint_path, "--checkpoint");
    need_file(o.test_path, "--test");
  }
  if (!problems.empty()) {
    for (const std::string& p : problems) std::cerr << "error: " << p << "\n";
    return kExitValidation;
  }

  detail::echo_config(o, command);
  try {
    if (command == "stats") return cmd_stats(o);
    if (command == "mutual-learn") return cmd_mutual_learn(o);
    if (command == "pretrain") return cmd_pretrain(o);
    if (command == "train") return cmd_train(o);
    if (command == "eval") return cmd_eval(o);
    return cmd_gradcheck(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace cli
}  // namespace mvcnn
