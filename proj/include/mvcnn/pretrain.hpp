#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mvcnn/network.hpp"
#include "mvcnn/ops.hpp"
#include "mvcnn/optim.hpp"
#include "mvcnn/rng.hpp"

namespace mvcnn {

struct PretrainConfig {
  std::size_t context_halfwidth = 3;  // t
  std::size_t noise_k = 10;
  std::size_t epochs = 1;
  real lr = real(0.01);
  real adagrad_eps = real(1e-6);
  double noise_alpha = 0.75;
  real init_range = real(0.1);
  std::uint64_t seed = 1;
};

/// Word tables used only during pretraining: context inputs to the average
/// layer and the NCE output vectors with per-word biases. Both are separate
/// from the multichannel input and are discarded afterwards; only the
/// fine-tuned multichannel representations carry over.
struct PretrainTables {
  Parameter context;      // |V| x d
  Parameter output;       // |V| x d
  Parameter output_bias;  // |V|
};

inline PretrainTables make_pretrain_tables(std::size_t vocab_size,
                                           std::size_t dim, Rng& rng,
                                           real init_range = real(0.1)) {
  PretrainTables t{Parameter("pretrain.context", {vocab_size, dim}),
                   Parameter("pretrain.output", {vocab_size, dim}),
                   Parameter("pretrain.output_bias", {vocab_size})};
  for (Parameter* p : {&t.context, &t.output})
    for (std::size_t i = 0; i < p->value.size(); ++i)
      p->value[i] = static_cast<real>(rng.uniform(-init_range, init_range));
  return t;
}

/// Unigram noise distribution P_n(w) proportional to count(w)^alpha.
struct NoiseDistribution {
  std::vector<real> probs;
  std::vector<real> cumulative;

  static NoiseDistribution from_counts(const std::vector<double>& counts,
                                       double alpha) {
    check(!counts.empty(), "noise distribution: empty counts");
    NoiseDistribution nd;
    nd.probs.resize(counts.size());
    double z = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      check(counts[i] >= 0, "noise distribution: negative count");
      nd.probs[i] =
          counts[i] > 0 ? static_cast<real>(std::pow(counts[i], alpha)) : real(0);
      z += nd.probs[i];
    }
    check(z > 0, "noise distribution: no word has positive count");
    nd.cumulative.resize(counts.size());
    real acc = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      nd.probs[i] /= static_cast<real>(z);
      acc += nd.probs[i];
      nd.cumulative[i] = acc;
    }
    nd.cumulative.back() = real(1);
    return nd;
  }

  real prob(int id) const { return probs[static_cast<std::size_t>(id)]; }

  int sample(Rng& rng) const {
    const real u = static_cast<real>(rng.uniform());
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<int>(it - cumulative.begin());
  }
};

/// Counts come from the encoded corpus; the padding id never receives mass.
inline NoiseDistribution build_noise_distribution(
    const std::vector<std::vector<int>>& corpus, std::size_t vocab_size,
    double alpha = 0.75) {
  check(!corpus.empty(), "build_noise_distribution: empty corpus");
  std::vector<double> counts(vocab_size, 0.0);
  for (const auto& sent : corpus)
    for (int id : sent)
      if (id > 0) counts[static_cast<std::size_t>(id)] += 1.0;
  return NoiseDistribution::from_counts(counts, alpha);
}

/// Element-wise mean of the sentence representation and the 2t (or fewer,
/// at sentence boundaries) context-word vectors.
inline Array average_prediction(const Array& rep,
                                const std::vector<Array>& context) {
  Array pred = rep;
  for (const Array& c : context) {
    check_same_shape(c, rep, "average_prediction");
    add_scaled(pred, c, real(1));
  }
  const real inv = real(1) / static_cast<real>(context.size() + 1);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] *= inv;
  return pred;
}

namespace detail {

inline real log_sigmoid(real x) {
  // stable in both tails
  return x >= real(0) ? -std::log1p(std::exp(-x))
                      : x - std::log1p(std::exp(x));
}

inline real sigmoid(real x) {
  if (x >= real(0)) return real(1) / (real(1) + std::exp(-x));
  const real e = std::exp(x);
  return e / (real(1) + e);
}

}  // namespace detail

/// NCE loss for one true word against k noise samples. With score
/// s(w) = output_vec(w) . pred + bias(w) and delta(w) = s(w) - ln(k P_n(w)):
///   loss = -ln sigmoid(delta(target)) - sum_j ln sigmoid(-delta(noise_j)).
/// When the gradient sinks are non-null, gradients accumulate into them.
inline real nce_loss(const Array& pred, int target,
                     std::span<const int> noise, const Array& output_vectors,
                     const Array& output_bias, const NoiseDistribution& pn,
                     Array* dpred = nullptr, Array* d_output_vectors = nullptr,
                     Array* d_output_bias = nullptr) {
  const std::size_t d = pred.size();
  const std::size_t vocab = output_bias.size();
  check(output_vectors.rows() == vocab && output_vectors.cols() == d,
        "nce_loss: output table shape mismatch");
  const real k = static_cast<real>(noise.size());
  check(!noise.empty(), "nce_loss: need at least one noise sample");

  const auto delta = [&](int w) {
    check(w >= 0 && static_cast<std::size_t>(w) < vocab,
          "nce_loss: word outside the vocabulary");
    const real* v = output_vectors.data() + static_cast<std::size_t>(w) * d;
    real s = output_bias[static_cast<std::size_t>(w)];
    for (std::size_t i = 0; i < d; ++i) s += v[i] * pred[i];
    const real p = pn.prob(w);
    check(p > real(0), "nce_loss: word has zero noise probability");
    return s - std::log(k * p);
  };

  const auto backprop = [&](int w, real ddelta) {
    if (!dpred && !d_output_vectors && !d_output_bias) return;
    const real* v = output_vectors.data() + static_cast<std::size_t>(w) * d;
    if (dpred)
      for (std::size_t i = 0; i < d; ++i) (*dpred)[i] += ddelta * v[i];
    if (d_output_vectors) {
      real* dv =
          d_output_vectors->data() + static_cast<std::size_t>(w) * d;
      for (std::size_t i = 0; i < d; ++i) dv[i] += ddelta * pred[i];
    }
    if (d_output_bias) (*d_output_bias)[static_cast<std::size_t>(w)] += ddelta;
  };

  const real dt = delta(target);
  real loss = -detail::log_sigmoid(dt);
  backprop(target, detail::sigmoid(dt) - real(1));
  for (int w : noise) {
    const real dn = delta(w);
    loss += -detail::log_sigmoid(-dn);
    backprop(w, detail::sigmoid(dn));
  }
  return loss;
}

/// One pretraining example: predict the word at `pos` from the sentence
/// representation averaged with its surrounding context words. Computes the
/// loss; with `with_grads` it also backpropagates through the NCE layer, the
/// average, the fully connected layer, the convolution stack and the
/// multichannel input.
inline real pretrain_example_loss(MvcnnModel& model, PretrainTables& tables,
                                  std::span<const int> tokens, std::size_t pos,
                                  std::span<const int> noise,
                                  const NoiseDistribution& pn,
                                  std::size_t context_halfwidth,
                                  bool with_grads) {
  check(pos < tokens.size(), "pretrain_example_loss: position out of range");
  check(model.cfg.effective_hidden() == model.cfg.dim,
        "pretraining requires hidden_dim == dim so the sentence "
        "representation can average with word vectors");
  SentenceTape tape;
  forward_to_rep(model, tokens, tape);

  const std::size_t d = model.cfg.dim;
  std::vector<int> context_ids;
  const std::size_t lo =
      pos >= context_halfwidth ? pos - context_halfwidth : 0;
  const std::size_t hi =
      std::min(tokens.size(), pos + context_halfwidth + 1);
  for (std::size_t j = lo; j < hi; ++j)
    if (j != pos) context_ids.push_back(tokens[j]);

  std::vector<Array> context;
  context.reserve(context_ids.size());
  for (int id : context_ids) {
    Array v({d});
    const real* row =
        tables.context.value.data() + static_cast<std::size_t>(id) * d;
    for (std::size_t i = 0; i < d; ++i) v[i] = row[i];
    context.push_back(std::move(v));
  }
  const Array pred = average_prediction(tape.rep, context);

  if (!with_grads) {
    return nce_loss(pred, tokens[pos], noise, tables.output.value,
                    tables.output_bias.value, pn);
  }

  Array dpred({d});
  const real loss =
      nce_loss(pred, tokens[pos], noise, tables.output.value,
               tables.output_bias.value, pn, &dpred, &tables.output.gradient,
               &tables.output_bias.gradient);

  // the average splits its gradient equally over the 2t+1 inputs
  const real share = real(1) / static_cast<real>(context.size() + 1);
  for (int id : context_ids) {
    real* grow =
        tables.context.gradient.data() + static_cast<std::size_t>(id) * d;
    for (std::size_t i = 0; i < d; ++i) grow[i] += share * dpred[i];
  }
  Array drep({d});
  for (std::size_t i = 0; i < d; ++i) drep[i] = share * dpred[i];
  backward_from_rep(model, tape, drep);
  return loss;
}

struct PretrainTrace {
  std::vector<real> step_losses;
  std::vector<real> epoch_mean_losses;
};

/// Unsupervised pretraining over a corpus of encoded sentences. Every
/// position of every sentence is one NCE example; sentences are shuffled per
/// epoch, updates are applied immediately (one AdaGrad step per example).
inline PretrainTrace run_pretraining(
    const std::vector<std::vector<int>>& corpus, MvcnnModel& model,
    PretrainTables& tables, const NoiseDistribution& pn,
    const PretrainConfig& cfg) {
  check(!corpus.empty(), "run_pretraining: empty corpus");
  for (const auto& sent : corpus)
    check(!sent.empty(), "run_pretraining: empty sentence in corpus");
  check(cfg.context_halfwidth >= 1, "run_pretraining: t must be >= 1");
  check(cfg.noise_k >= 1, "run_pretraining: noise_k must be >= 1");

  std::vector<Parameter*> updated = model.pretrain_parameters();
  updated.push_back(&tables.context);
  updated.push_back(&tables.output);
  updated.push_back(&tables.output_bias);

  Rng noise_rng(mix64(cfg.seed, 13));
  PretrainTrace trace;
  std::vector<int> noise(cfg.noise_k);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(mix64(mix64(cfg.seed, 11), epoch));
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);

    real epoch_sum = 0;
    std::size_t steps = 0;
    for (std::size_t oi : order) {
      const std::vector<int>& tokens = corpus[oi];
      for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
        for (std::size_t j = 0; j < cfg.noise_k; ++j) {
          int w = pn.sample(noise_rng);
          // a draw equal to the target is redrawn a bounded number of times
          for (int attempt = 0; w == tokens[pos] && attempt < 100; ++attempt)
            w = pn.sample(noise_rng);
          noise[j] = w;
        }
        for (Parameter* p : updated) p->zero_grad();
        const real loss = pretrain_example_loss(
            model, tables, tokens, pos, noise, pn, cfg.context_halfwidth,
            /*with_grads=*/true);
        check(std::isfinite(loss), "run_pretraining: non-finite loss");
        model.table.mask_padding_row_grads();
        for (Parameter* p : updated)
          adagrad_step(*p, cfg.lr, cfg.adagrad_eps);
        trace.step_losses.push_back(loss);
        epoch_sum += loss;
        ++steps;
      }
    }
    trace.epoch_mean_losses.push_back(epoch_sum / static_cast<real>(steps));
  }
  return trace;
}

}  // namespace mvcnn
