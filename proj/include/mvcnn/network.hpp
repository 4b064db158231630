#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mvcnn/array.hpp"
#include "mvcnn/embeddings.hpp"
#include "mvcnn/ops.hpp"
#include "mvcnn/optim.hpp"
#include "mvcnn/rng.hpp"

namespace mvcnn {

struct NetworkConfig {
  std::size_t channels = 1;   // c
  std::size_t dim = 50;       // d
  std::size_t layers = 1;     // L
  std::vector<std::size_t> filter_sizes = {3, 5, 7, 9};
  std::size_t kernels_per_size = 5;
  std::size_t k_top = 4;
  std::size_t hidden_dim = 0;  // 0 means d
  std::size_t num_classes = 2;
  real dropout_keep_prob = real(0.8);

  std::size_t effective_hidden() const { return hidden_dim ? hidden_dim : dim; }
  std::size_t maps_per_layer() const {
    return filter_sizes.size() * kernels_per_size;
  }
  std::size_t top_flat_size() const { return maps_per_layer() * k_top; }

  void validate() const {
    check(channels >= 1, "config: channels must be >= 1");
    check(dim >= 1, "config: dim must be >= 1");
    check(layers >= 1, "config: layers must be >= 1");
    check(!filter_sizes.empty(), "config: filter_sizes must be nonempty");
    for (std::size_t i = 0; i < filter_sizes.size(); ++i) {
      check(filter_sizes[i] >= 1, "config: filter sizes must be positive");
      check(i == 0 || filter_sizes[i] > filter_sizes[i - 1],
            "config: filter_sizes must be strictly increasing");
    }
    check(kernels_per_size >= 1, "config: kernels_per_size must be >= 1");
    check(k_top >= 1, "config: k_top must be >= 1");
    check(num_classes >= 2, "config: num_classes must be >= 2");
    check(dropout_keep_prob > real(0) && dropout_keep_prob <= real(1),
          "config: dropout_keep_prob must be in (0, 1]");
  }
};

/// Pooled length at layer i (1-based) of L for a sentence of length s:
/// max(k_top, ceil((L - i) / L * s)). The top layer always pools to k_top.
inline std::size_t dynamic_k(std::size_t i, std::size_t num_layers,
                             std::size_t s, std::size_t k_top) {
  check(i >= 1 && i <= num_layers, "dynamic_k: layer index out of range");
  check(s >= 1, "dynamic_k: sentence length must be >= 1");
  const std::size_t scaled =
      ((num_layers - i) * s + num_layers - 1) / num_layers;  // ceiling
  return std::max(k_top, scaled);
}

namespace detail {

// out[i] += sum over the length-l window ending at position i of w .* map,
// out-of-range map columns reading as zero. out has length s + l - 1.
inline void wide_conv_accum(const real* map, std::size_t rows, std::size_t s,
                            const real* w, std::size_t l, real* out) {
  for (std::size_t i = 0; i < s + l - 1; ++i) {
    const std::size_t t_lo = (i + 1 >= l) ? 0 : l - 1 - i;
    const std::size_t t_hi = std::min(l, s + l - 1 - i);
    real acc = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const real* mr = map + r * s;
      const real* wr = w + r * l;
      for (std::size_t t = t_lo; t < t_hi; ++t)
        acc += wr[t] * mr[i + t + 1 - l];
    }
    out[i] += acc;
  }
}

// Adjoint of wide_conv_accum: scatter `up` (length s + l - 1) back into the
// map and filter gradients. Null pointers skip the corresponding gradient.
inline void wide_conv_backward_accum(const real* map, std::size_t rows,
                                     std::size_t s, const real* w,
                                     std::size_t l, const real* up, real* dmap,
                                     real* dw) {
  for (std::size_t i = 0; i < s + l - 1; ++i) {
    const real u = up[i];
    if (u == real(0)) continue;
    const std::size_t t_lo = (i + 1 >= l) ? 0 : l - 1 - i;
    const std::size_t t_hi = std::min(l, s + l - 1 - i);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t t = t_lo; t < t_hi; ++t) {
        const std::size_t c = i + t + 1 - l;
        if (dw) dw[r * l + t] += u * map[r * s + c];
        if (dmap) dmap[r * s + c] += u * w[r * l + t];
      }
    }
  }
}

}  // namespace detail

/// Wide convolution of a rows x s map with a rows x l filter: output length
/// s + l - 1, boundary columns treated as zero vectors. No activation.
inline Array wide_conv(const Array& map, const Array& filter) {
  check(map.rank() == 2 && filter.rank() == 2, "wide_conv: rank-2 inputs");
  check(map.rows() == filter.rows(), "wide_conv: row mismatch");
  const std::size_t s = map.cols();
  const std::size_t l = filter.cols();
  Array out({1, s + l - 1});
  detail::wide_conv_accum(map.data(), map.rows(), s, filter.data(), l,
                          out.data());
  return out;
}

inline void wide_conv_backward(const Array& map, const Array& filter,
                               const Array& upstream, Array* dmap,
                               Array* dfilter) {
  check(upstream.size() == map.cols() + filter.cols() - 1,
        "wide_conv_backward: upstream length mismatch");
  if (dmap) check_same_shape(*dmap, map, "wide_conv_backward");
  if (dfilter) check_same_shape(*dfilter, filter, "wide_conv_backward");
  detail::wide_conv_backward_accum(
      map.data(), map.rows(), map.cols(), filter.data(), filter.cols(),
      upstream.data(), dmap ? dmap->data() : nullptr,
      dfilter ? dfilter->data() : nullptr);
}

/// k largest values per row, kept in original order; rows shorter than k are
/// right-padded with zeros so downstream shapes stay fixed. Ties select the
/// earliest position.
struct KMaxResult {
  Array pooled;  // rows x k
  std::vector<std::vector<std::size_t>> positions;  // per row, <= k entries
};

inline KMaxResult kmax_pool(const Array& map, std::size_t k) {
  check(k >= 1, "kmax_pool: k must be >= 1");
  check(map.rank() == 2, "kmax_pool: rank-2 input");
  const std::size_t rows = map.rows();
  const std::size_t m = map.cols();
  KMaxResult res;
  res.pooled = Array({rows, k});
  res.positions.resize(rows);
  std::vector<std::size_t> idx(m);
  for (std::size_t r = 0; r < rows; ++r) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const real* row = map.data() + r * m;
    const std::size_t take = std::min(k, m);
    std::partial_sort(idx.begin(), idx.begin() + take, idx.end(),
                      [row](std::size_t a, std::size_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;  // earliest position wins ties
                      });
    std::vector<std::size_t> sel(idx.begin(), idx.begin() + take);
    std::sort(sel.begin(), sel.end());  // restore left-to-right order
    for (std::size_t t = 0; t < take; ++t)
      res.pooled(r, t) = row[sel[t]];
    res.positions[r] = std::move(sel);
  }
  return res;
}

// Upstream gradient flows only to the selected positions; padded slots
// correspond to constant zeros and receive nothing.
inline void kmax_pool_backward(const KMaxResult& res, const Array& upstream,
                               Array& dmap) {
  check_same_shape(upstream, res.pooled, "kmax_pool_backward");
  for (std::size_t r = 0; r < res.positions.size(); ++r)
    for (std::size_t t = 0; t < res.positions[r].size(); ++t)
      dmap(r, res.positions[r][t]) += upstream(r, t);
}

/// The feature maps at one network level. Layer 0 holds c maps of d x s;
/// every later layer holds single-row maps.
struct FeatureMapStack {
  std::vector<Array> maps;
  std::size_t layer_index = 0;
};

/// All convolution weights of one layer. Weights for size l form a rank-4
/// tensor indexed (kernel j, input map k, row, offset); one bias per
/// (size, kernel).
struct FilterBank {
  std::vector<std::size_t> filter_sizes;
  std::size_t kernels = 0;
  std::size_t input_maps = 0;
  std::size_t rows = 0;  // d at layer 1, otherwise 1
  std::vector<Parameter> weights;  // per size: {kernels, input_maps, rows, l}
  std::vector<Parameter> biases;   // per size: {kernels}

  std::size_t slice_offset(std::size_t size_idx, std::size_t kernel,
                           std::size_t input_map) const {
    const std::size_t l = filter_sizes[size_idx];
    return ((kernel * input_maps + input_map) * rows) * l;
  }
};

inline FilterBank make_filter_bank(const NetworkConfig& cfg,
                                   std::size_t layer_index_one_based,
                                   std::size_t input_maps, Rng& rng) {
  FilterBank bank;
  bank.filter_sizes = cfg.filter_sizes;
  bank.kernels = cfg.kernels_per_size;
  bank.input_maps = input_maps;
  bank.rows = layer_index_one_based == 1 ? cfg.dim : 1;
  for (std::size_t si = 0; si < cfg.filter_sizes.size(); ++si) {
    const std::size_t l = cfg.filter_sizes[si];
    const std::string base = "conv" + std::to_string(layer_index_one_based) +
                             ".size" + std::to_string(l);
    Parameter w(base + ".w", {bank.kernels, input_maps, bank.rows, l});
    const real fan_in = static_cast<real>(input_maps * bank.rows * l);
    const real fan_out = static_cast<real>(bank.kernels * l);
    const real bound = std::sqrt(real(6) / (fan_in + fan_out));
    for (std::size_t i = 0; i < w.value.size(); ++i)
      w.value[i] = static_cast<real>(rng.uniform(-bound, bound));
    bank.weights.push_back(std::move(w));
    bank.biases.emplace_back(base + ".b",
                             std::vector<std::size_t>{bank.kernels});
  }
  return bank;
}

/// tanh( sum over input maps of wide_conv + bias ) for every (size, kernel).
/// Output maps are ordered size-major, kernel-minor; a size-l map over
/// length-m input has length m + l - 1.
inline FeatureMapStack conv_layer_forward(const FeatureMapStack& stack,
                                          const FilterBank& bank) {
  check(!stack.maps.empty(), "conv_layer_forward: empty input stack");
  check(stack.maps.size() == bank.input_maps,
        "conv_layer_forward: bank expects a different input map count");
  const std::size_t m = stack.maps[0].cols();
  for (const Array& f : stack.maps) {
    check(f.rows() == bank.rows && f.cols() == m,
          "conv_layer_forward: input maps disagree with the bank shape");
  }
  FeatureMapStack out;
  out.layer_index = stack.layer_index + 1;
  for (std::size_t si = 0; si < bank.filter_sizes.size(); ++si) {
    const std::size_t l = bank.filter_sizes[si];
    for (std::size_t j = 0; j < bank.kernels; ++j) {
      Array pre({1, m + l - 1});
      for (std::size_t k = 0; k < bank.input_maps; ++k) {
        const real* w =
            bank.weights[si].value.data() + bank.slice_offset(si, j, k);
        detail::wide_conv_accum(stack.maps[k].data(), bank.rows, m, w, l,
                                pre.data());
      }
      const real b = bank.biases[si].value[j];
      for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += b;
      out.maps.push_back(tanh_map(pre));
    }
  }
  return out;
}

/// Adjoint of conv_layer_forward. `out_maps` are the tanh outputs recorded
/// during the forward pass; gradients accumulate into the bank parameters
/// and into `dinput` (same shapes as the input stack's maps).
inline void conv_layer_backward(const FeatureMapStack& stack, FilterBank& bank,
                                const std::vector<Array>& out_maps,
                                const std::vector<Array>& upstreams,
                                std::vector<Array>& dinput) {
  check(out_maps.size() == upstreams.size(),
        "conv_layer_backward: upstream count mismatch");
  check(dinput.size() == stack.maps.size(),
        "conv_layer_backward: dinput count mismatch");
  const std::size_t m = stack.maps[0].cols();
  std::size_t mi = 0;
  for (std::size_t si = 0; si < bank.filter_sizes.size(); ++si) {
    const std::size_t l = bank.filter_sizes[si];
    for (std::size_t j = 0; j < bank.kernels; ++j, ++mi) {
      const Array dpre = tanh_backward(out_maps[mi], upstreams[mi]);
      real bsum = 0;
      for (std::size_t i = 0; i < dpre.size(); ++i) bsum += dpre[i];
      bank.biases[si].gradient[j] += bsum;
      for (std::size_t k = 0; k < bank.input_maps; ++k) {
        const std::size_t off = bank.slice_offset(si, j, k);
        detail::wide_conv_backward_accum(
            stack.maps[k].data(), bank.rows, m,
            bank.weights[si].value.data() + off, l, dpre.data(),
            dinput[k].data(), bank.weights[si].gradient.data() + off);
      }
    }
  }
}

enum class RunMode { Train, Eval };

/// Everything the MVCNN forward pass records so the hand-derived backward
/// pass can replay it.
struct SentenceTape {
  std::vector<int> tokens;
  FeatureMapStack input;
  std::vector<std::vector<Array>> conv_out;   // per layer, pre-pool tanh maps
  std::vector<std::vector<KMaxResult>> pools; // per layer, per map
  std::vector<FeatureMapStack> pooled;        // per layer
  Array flat;
  Array rep;
  Array mask;
  Array rep_dropped;
  Array logits;
  Array probs;
  bool has_rep = false;
  bool has_classifier = false;
};

struct MvcnnModel {
  NetworkConfig cfg;
  MultichannelTable table;
  std::vector<FilterBank> banks;
  Parameter fc_w, fc_b, out_w, out_b;

  std::vector<Parameter*> embedding_parameters() {
    std::vector<Parameter*> ps;
    for (Parameter& ch : table.channels) ps.push_back(&ch);
    return ps;
  }

  std::vector<Parameter*> non_embedding_parameters() {
    std::vector<Parameter*> ps;
    for (FilterBank& bank : banks) {
      for (std::size_t si = 0; si < bank.weights.size(); ++si) {
        ps.push_back(&bank.weights[si]);
        ps.push_back(&bank.biases[si]);
      }
    }
    ps.push_back(&fc_w);
    ps.push_back(&fc_b);
    ps.push_back(&out_w);
    ps.push_back(&out_b);
    return ps;
  }

  /// Fixed order: embedding channels, conv banks bottom-up, fc, output.
  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> ps = embedding_parameters();
    for (Parameter* p : non_embedding_parameters()) ps.push_back(p);
    return ps;
  }

  /// Parameters updated during pretraining: everything except the
  /// classification layer, which pretraining never touches.
  std::vector<Parameter*> pretrain_parameters() {
    std::vector<Parameter*> ps = embedding_parameters();
    for (FilterBank& bank : banks) {
      for (std::size_t si = 0; si < bank.weights.size(); ++si) {
        ps.push_back(&bank.weights[si]);
        ps.push_back(&bank.biases[si]);
      }
    }
    ps.push_back(&fc_w);
    ps.push_back(&fc_b);
    return ps;
  }

  void zero_grads() {
    for (Parameter* p : parameters()) p->zero_grad();
  }
};

inline MvcnnModel build_model(const NetworkConfig& cfg, MultichannelTable table,
                              Rng& rng) {
  cfg.validate();
  check(table.dim == cfg.dim, "build_model: table dimension != config dim");
  check(table.channel_count() == cfg.channels,
        "build_model: table channel count != config channels");
  MvcnnModel model;
  model.cfg = cfg;
  model.table = std::move(table);
  std::size_t input_maps = cfg.channels;
  for (std::size_t li = 1; li <= cfg.layers; ++li) {
    model.banks.push_back(make_filter_bank(cfg, li, input_maps, rng));
    input_maps = cfg.maps_per_layer();
  }
  const std::size_t flat = cfg.top_flat_size();
  const std::size_t hidden = cfg.effective_hidden();
  const auto glorot = [&rng](Parameter& p, std::size_t fan_in,
                             std::size_t fan_out) {
    const real bound =
        std::sqrt(real(6) / static_cast<real>(fan_in + fan_out));
    for (std::size_t i = 0; i < p.value.size(); ++i)
      p.value[i] = static_cast<real>(rng.uniform(-bound, bound));
  };
  model.fc_w = Parameter("fc.w", {hidden, flat});
  model.fc_b = Parameter("fc.b", {hidden});
  model.out_w = Parameter("out.w", {cfg.num_classes, hidden});
  model.out_b = Parameter("out.b", {cfg.num_classes});
  glorot(model.fc_w, flat, hidden);
  glorot(model.out_w, hidden, cfg.num_classes);
  return model;
}

/// Layer-0 stack: one d x s map per channel, columns gathered from the
/// token rows of each channel table.
inline FeatureMapStack input_stack(const MvcnnModel& model,
                                   std::span<const int> tokens) {
  check(!tokens.empty(), "input_stack: empty token list");
  const std::size_t d = model.cfg.dim;
  const std::size_t s = tokens.size();
  for (int t : tokens)
    check(t > 0 && static_cast<std::size_t>(t) < model.table.vocab_size(),
          "input_stack: token id out of range (padding must not be fed)");
  FeatureMapStack stack;
  stack.layer_index = 0;
  for (const Parameter& ch : model.table.channels) {
    Array map({d, s});
    for (std::size_t pos = 0; pos < s; ++pos) {
      const real* row = ch.value.data() + static_cast<std::size_t>(tokens[pos]) * d;
      for (std::size_t r = 0; r < d; ++r) map(r, pos) = row[r];
    }
    stack.maps.push_back(std::move(map));
  }
  return stack;
}

/// Run convolution + dynamic k-max pooling through all layers, the fully
/// connected layer, and record everything on the tape. Stops at the sentence
/// representation (pretraining consumes exactly this).
inline void forward_to_rep(const MvcnnModel& model, std::span<const int> tokens,
                           SentenceTape& tape) {
  const NetworkConfig& cfg = model.cfg;
  const std::size_t s = tokens.size();
  tape = SentenceTape{};
  tape.tokens.assign(tokens.begin(), tokens.end());
  tape.input = input_stack(model, tokens);

  const FeatureMapStack* current = &tape.input;
  for (std::size_t li = 0; li < cfg.layers; ++li) {
    FeatureMapStack conv = conv_layer_forward(*current, model.banks[li]);
    const std::size_t k = dynamic_k(li + 1, cfg.layers, s, cfg.k_top);
    FeatureMapStack pooledStack;
    pooledStack.layer_index = conv.layer_index;
    std::vector<KMaxResult> pools;
    pools.reserve(conv.maps.size());
    for (const Array& mp : conv.maps) {
      KMaxResult kr = kmax_pool(mp, k);
      pooledStack.maps.push_back(kr.pooled);
      pools.push_back(std::move(kr));
    }
    // shape law: every pooled map in the stack shares length k_i
    for (const Array& mp : pooledStack.maps)
      check(mp.cols() == k, "forward: pooled map length != k_i");
    tape.conv_out.push_back(std::move(conv.maps));
    tape.pools.push_back(std::move(pools));
    tape.pooled.push_back(std::move(pooledStack));
    current = &tape.pooled.back();
  }

  const std::size_t flat_size = cfg.top_flat_size();
  tape.flat = Array({flat_size});
  std::size_t off = 0;
  for (const Array& mp : tape.pooled.back().maps) {
    for (std::size_t i = 0; i < mp.size(); ++i) tape.flat[off + i] = mp[i];
    off += mp.size();
  }
  check(off == flat_size, "forward: flattened size mismatch");
  tape.rep = tanh_map(affine(model.fc_w.value, tape.flat, model.fc_b.value));
  tape.has_rep = true;
}

struct ForwardResult {
  Array sentence_rep;
  Array class_probs;
};

/// Full supervised pass: representation, dropout before the classifier
/// (identity in Eval mode), logistic-regression probabilities.
inline ForwardResult sentence_forward(const MvcnnModel& model,
                                      std::span<const int> tokens, RunMode mode,
                                      Rng* dropout_rng, SentenceTape& tape) {
  forward_to_rep(model, tokens, tape);
  const std::size_t hidden = model.cfg.effective_hidden();
  if (mode == RunMode::Train && model.cfg.dropout_keep_prob < real(1)) {
    check(dropout_rng != nullptr, "sentence_forward: train mode needs an rng");
    tape.mask = dropout_mask({hidden}, model.cfg.dropout_keep_prob,
                             *dropout_rng);
  } else {
    tape.mask = ones_mask({hidden});
  }
  tape.rep_dropped = hadamard(tape.rep, tape.mask);
  tape.logits = affine(model.out_w.value, tape.rep_dropped, model.out_b.value);
  tape.probs = softmax(tape.logits);
  tape.has_classifier = true;
  return {tape.rep, tape.probs};
}

/// Backward from a gradient on the sentence representation (the pretraining
/// entry point). Accumulates into fc, banks and the touched embedding rows.
inline void backward_from_rep(MvcnnModel& model, const SentenceTape& tape,
                              const Array& drep) {
  check(tape.has_rep, "backward_from_rep: no recorded forward pass");
  const Array dfc_pre = tanh_backward(tape.rep, drep);
  AffineGrads fc = affine_backward(model.fc_w.value, tape.flat, dfc_pre);
  add_scaled(model.fc_w.gradient, fc.dw, real(1));
  add_scaled(model.fc_b.gradient, fc.db, real(1));

  // un-flatten into per-map upstreams for the top pooled stack
  const std::size_t layers = model.cfg.layers;
  std::vector<Array> dpooled;
  {
    std::size_t off = 0;
    for (const Array& mp : tape.pooled.back().maps) {
      Array d(mp.shape());
      for (std::size_t i = 0; i < mp.size(); ++i) d[i] = fc.dx[off + i];
      off += mp.size();
      dpooled.push_back(std::move(d));
    }
  }

  for (std::size_t li = layers; li-- > 0;) {
    // route pooled gradients back through the k-max selection
    std::vector<Array> dconv;
    dconv.reserve(tape.conv_out[li].size());
    for (const Array& mp : tape.conv_out[li]) dconv.push_back(Array(mp.shape()));
    for (std::size_t m = 0; m < dconv.size(); ++m)
      kmax_pool_backward(tape.pools[li][m], dpooled[m], dconv[m]);

    const FeatureMapStack& in =
        li == 0 ? tape.input : tape.pooled[li - 1];
    std::vector<Array> dinput;
    dinput.reserve(in.maps.size());
    for (const Array& mp : in.maps) dinput.push_back(Array(mp.shape()));
    conv_layer_backward(in, model.banks[li], tape.conv_out[li], dconv, dinput);

    if (li == 0) {
      // scatter map gradients into the touched embedding rows
      const std::size_t d = model.cfg.dim;
      const std::size_t s = tape.tokens.size();
      for (std::size_t ch = 0; ch < model.table.channel_count(); ++ch) {
        Array& grad = model.table.channels[ch].gradient;
        const Array& dmap = dinput[ch];
        for (std::size_t pos = 0; pos < s; ++pos) {
          real* grow =
              grad.data() + static_cast<std::size_t>(tape.tokens[pos]) * d;
          for (std::size_t r = 0; r < d; ++r) grow[r] += dmap(r, pos);
        }
      }
    } else {
      dpooled = std::move(dinput);
    }
  }
}

/// Backward from a gradient on the logits (e.g. probs - onehot): classifier
/// layer, dropout mask, then the shared representation path.
inline void backward_from_logits(MvcnnModel& model, const SentenceTape& tape,
                                 const Array& dlogits) {
  check(tape.has_classifier, "backward_from_logits: no recorded forward pass");
  AffineGrads out =
      affine_backward(model.out_w.value, tape.rep_dropped, dlogits);
  add_scaled(model.out_w.gradient, out.dw, real(1));
  add_scaled(model.out_b.gradient, out.db, real(1));
  const Array drep = hadamard(out.dx, tape.mask);
  backward_from_rep(model, tape, drep);
}

/// Network-level op rules for the generic gradient-check property tests.
inline std::vector<OpRule> network_op_rules() {
  std::vector<OpRule> rules;

  rules.push_back(OpRule{
      "wide_conv",
      [](Rng& rng) {
        const std::size_t rows = 1 + rng.below(4);
        const std::size_t s = 1 + rng.below(7);
        const std::size_t l = 1 + rng.below(5);
        return std::vector<Array>{detail::random_array({rows, s}, rng),
                                  detail::random_array({rows, l}, rng)};
      },
      [](const std::vector<Array>& in) { return wide_conv(in[0], in[1]); },
      [](const std::vector<Array>& in, const Array&, const Array& up) {
        Array dmap(in[0].shape());
        Array dfilter(in[1].shape());
        wide_conv_backward(in[0], in[1], up, &dmap, &dfilter);
        return std::vector<Array>{std::move(dmap), std::move(dfilter)};
      }});

  rules.push_back(OpRule{
      "kmax_pool_k3",
      [](Rng& rng) {
        const std::size_t rows = 1 + rng.below(3);
        const std::size_t m = 1 + rng.below(9);
        return std::vector<Array>{detail::random_array({rows, m}, rng)};
      },
      [](const std::vector<Array>& in) { return kmax_pool(in[0], 3).pooled; },
      [](const std::vector<Array>& in, const Array&, const Array& up) {
        KMaxResult res = kmax_pool(in[0], 3);
        Array dmap(in[0].shape());
        kmax_pool_backward(res, up, dmap);
        return std::vector<Array>{std::move(dmap)};
      }});

  return rules;
}

}  // namespace mvcnn
