#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "mvcnn/gradcheck.hpp"
#include "mvcnn/network.hpp"
#include "mvcnn/ops.hpp"
#include "mvcnn/optim.hpp"
#include "mvcnn/text.hpp"

namespace mvcnn {

struct TrainConfig {
  real lr = real(0.01);
  real dropout_keep_prob = real(0.8);
  real l2_lambda = real(5e-3);
  std::size_t batch_size = 50;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  bool l2_on_embeddings = false;
  real adagrad_eps = real(1e-6);
};

struct TrainReport {
  std::vector<real> train_loss;    // per epoch
  std::vector<real> dev_accuracy;  // per epoch (empty without a dev set)
  std::size_t best_epoch = 0;      // 1-based
  real test_accuracy = real(-1);   // -1 without a test set
  double wall_seconds = 0;
};

inline void print_report(const TrainReport& r, std::ostream& out) {
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    out << "epoch " << (e + 1) << " train_loss " << r.train_loss[e];
    if (e < r.dev_accuracy.size()) out << " dev_acc " << r.dev_accuracy[e];
    out << "\n";
  }
  out << "best_epoch " << r.best_epoch << "\n";
  if (r.test_accuracy >= real(0))
    out << "test_accuracy " << r.test_accuracy << "\n";
}

/// Fraction of examples whose argmax class equals the label. Dropout is
/// disabled; argmax ties break toward the lowest class index. Pure read.
inline real evaluate(const MvcnnModel& model, const EncodedDataset& ds) {
  check(!ds.token_ids.empty(), "evaluate: empty dataset");
  check(static_cast<std::size_t>(ds.num_classes) == model.cfg.num_classes,
        "evaluate: dataset class count != model class count");
  std::size_t correct = 0;
  SentenceTape tape;
  for (std::size_t i = 0; i < ds.token_ids.size(); ++i) {
    ForwardResult fr = sentence_forward(model, ds.token_ids[i], RunMode::Eval,
                                        nullptr, tape);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < fr.class_probs.size(); ++c)
      if (fr.class_probs[c] > fr.class_probs[arg]) arg = c;
    if (arg == static_cast<std::size_t>(ds.labels[i])) ++correct;
  }
  return static_cast<real>(correct) / static_cast<real>(ds.token_ids.size());
}

/// The per-batch training objective: mean cross-entropy over the batch's
/// sentences (each at its true length) plus the L2 term. Clears and then
/// fills every gradient; deterministic for fixed dropout streams, which
/// makes it directly checkable by finite differences.
inline real supervised_batch_objective(
    MvcnnModel& model, const std::vector<std::vector<int>>& sentences,
    const std::vector<int>& labels,
    const std::vector<std::uint64_t>& dropout_streams, const TrainConfig& cfg,
    RunMode mode, std::vector<real>* per_example_ce = nullptr,
    real* l2_term_out = nullptr) {
  check(!sentences.empty(), "batch objective: empty batch");
  check(sentences.size() == labels.size() &&
            sentences.size() == dropout_streams.size(),
        "batch objective: ragged batch");
  model.zero_grads();
  const real inv_batch = real(1) / static_cast<real>(sentences.size());
  real ce_sum = 0;
  SentenceTape tape;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Rng dropout_rng(dropout_streams[i]);
    sentence_forward(model, sentences[i], mode, &dropout_rng, tape);
    const SoftmaxXent sx = softmax_cross_entropy(
        tape.logits, static_cast<std::size_t>(labels[i]));
    ce_sum += sx.loss;
    if (per_example_ce) (*per_example_ce)[i] = sx.loss;
    const Array dlogits = softmax_cross_entropy_backward(
        sx.probs, static_cast<std::size_t>(labels[i]), inv_batch);
    backward_from_logits(model, tape, dlogits);
  }
  std::vector<Parameter*> l2_params = model.non_embedding_parameters();
  if (cfg.l2_on_embeddings)
    for (Parameter* p : model.embedding_parameters()) l2_params.push_back(p);
  const real l2_term = l2_regularize(l2_params, cfg.l2_lambda);
  model.table.mask_padding_row_grads();
  if (l2_term_out) *l2_term_out = l2_term;
  return ce_sum * inv_batch + l2_term;
}

/// Mini-batch supervised training with AdaGrad, dev-set model selection and
/// early stopping. The model is left holding the best-dev parameters.
inline TrainReport train_supervised(MvcnnModel& model,
                                    const EncodedDataset& train,
                                    const EncodedDataset* dev,
                                    const EncodedDataset* test,
                                    const TrainConfig& cfg) {
  check(!train.token_ids.empty(), "train_supervised: empty training set");
  check(static_cast<std::size_t>(train.num_classes) <= model.cfg.num_classes,
        "train_supervised: training labels exceed the model class count");
  const auto t0 = std::chrono::steady_clock::now();
  model.cfg.dropout_keep_prob = cfg.dropout_keep_prob;

  const std::size_t n = train.token_ids.size();
  std::vector<Parameter*> params = model.parameters();

  TrainReport report;
  real best_dev = real(-1);
  std::size_t epochs_since_best = 0;
  std::vector<Array> best_values;
  const auto snapshot = [&]() {
    best_values.clear();
    for (Parameter* p : params) best_values.push_back(p->value);
  };

  std::vector<real> example_ce(n);
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(mix64(mix64(cfg.seed, 21), epoch));
    std::vector<Batch> batches =
        build_batches(train, cfg.batch_size, shuffle_rng);

    real l2_sum = 0;
    std::vector<real> batch_ce;
    for (const Batch& batch : batches) {
      std::vector<std::vector<int>> sentences;
      std::vector<std::uint64_t> streams;
      sentences.reserve(batch.token_ids.size());
      for (std::size_t i = 0; i < batch.token_ids.size(); ++i) {
        const auto& row = batch.token_ids[i];
        sentences.emplace_back(row.begin(),
                               row.begin() + batch.true_lengths[i]);
        // the dropout stream follows the example, not the epoch, so a
        // zero-lr run reports bit-identical losses every epoch
        streams.push_back(mix64(mix64(cfg.seed, 22), batch.example_ids[i]));
      }
      batch_ce.assign(batch.token_ids.size(), real(0));
      real l2_term = 0;
      const real objective = supervised_batch_objective(
          model, sentences, batch.labels, streams, cfg, RunMode::Train,
          &batch_ce, &l2_term);
      check(std::isfinite(objective) && objective < real(1e6),
            "train_supervised: loss exploded; aborting");
      for (std::size_t i = 0; i < batch.example_ids.size(); ++i)
        example_ce[batch.example_ids[i]] = batch_ce[i];
      l2_sum += l2_term;
      for (Parameter* p : params) adagrad_step(*p, cfg.lr, cfg.adagrad_eps);
    }

    // The epoch loss reduces the per-example cross-entropies in example-id
    // order, so the reported value does not depend on the epoch's shuffle.
    real ce_total = 0;
    for (std::size_t i = 0; i < n; ++i) ce_total += example_ce[i];
    const real epoch_loss = ce_total / static_cast<real>(n) +
                            l2_sum / static_cast<real>(batches.size());
    report.train_loss.push_back(epoch_loss);

    if (dev) {
      const real acc = evaluate(model, *dev);
      report.dev_accuracy.push_back(acc);
      if (acc > best_dev) {
        best_dev = acc;
        report.best_epoch = epoch + 1;
        epochs_since_best = 0;
        snapshot();
      } else {
        ++epochs_since_best;
        if (epochs_since_best >= cfg.patience) break;
      }
    } else {
      report.best_epoch = epoch + 1;
    }
  }

  if (dev && !best_values.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i]->value = best_values[i];
  }
  if (test) report.test_accuracy = evaluate(model, *test);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace mvcnn
