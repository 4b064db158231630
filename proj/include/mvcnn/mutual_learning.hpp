#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mvcnn/array.hpp"
#include "mvcnn/embeddings.hpp"

namespace mvcnn {

/// A learned d x d linear map from one embedding space to another, with the
/// mean squared residual on the training intersection.
struct ProjectionMatrix {
  std::string source;
  std::string target;
  std::size_t source_index = 0;
  std::size_t target_index = 0;
  Array m;  // d x d
  real train_residual = 0;
};

namespace detail {

// Cholesky solve of G X = B for symmetric positive definite G (d x d).
// Throws when G is numerically singular, which happens with ridge = 0 and an
// intersection that does not span the space.
inline Array spd_solve(const Array& g, const Array& b) {
  const std::size_t d = g.rows();
  Array l({d, d});
  real max_diag = 0;
  for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, g(i, i));
  const real tol = std::max(max_diag, real(1)) * real(1e-12);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      real s = g(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= tol)
          throw std::invalid_argument(
              "projection: normal system is singular; the intersection does "
              "not span the space (use ridge > 0)");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  Array x(b.shape());
  const std::size_t cols = b.cols();
  std::vector<real> y(d);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t i = 0; i < d; ++i) {
      real s = b(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = d; ii > 0; --ii) {
      const std::size_t i = ii - 1;
      real s = y[i];
      for (std::size_t k = i + 1; k < d; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

}  // namespace detail

/// Default Frobenius penalty, scaled with the intersection size so the
/// regularization pressure per training word stays constant.
inline real default_projection_ridge(std::size_t intersection_size) {
  return real(1e-3) * static_cast<real>(intersection_size);
}

/// Fit M minimizing sum_w ||M w_src - w_tgt||^2 + ridge ||M||_F^2 over the
/// vocabulary intersection, in closed form via the normal equations.
inline ProjectionMatrix train_projection(const EmbeddingVersion& src,
                                         const EmbeddingVersion& tgt,
                                         real ridge) {
  check(src.dim == tgt.dim, "train_projection: dimension mismatch");
  check(ridge >= real(0), "train_projection: ridge must be nonnegative");
  const std::size_t d = src.dim;

  std::vector<std::size_t> isrc, itgt;
  for (std::size_t i = 0; i < src.words.size(); ++i) {
    auto it = tgt.index.find(src.words[i]);
    if (it != tgt.index.end()) {
      isrc.push_back(i);
      itgt.push_back(it->second);
    }
  }
  check(!isrc.empty(), "train_projection: empty vocabulary intersection of '" +
                           src.name + "' and '" + tgt.name + "'");

  // G = sum ws ws^T + ridge I,  B^T with B = sum wt ws^T; M solves M G = B.
  Array g({d, d});
  Array bt({d, d});
  for (std::size_t n = 0; n < isrc.size(); ++n) {
    const std::vector<real>& ws = src.vectors[isrc[n]];
    const std::vector<real>& wt = tgt.vectors[itgt[n]];
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        g(i, j) += ws[i] * ws[j];
        bt(i, j) += ws[i] * wt[j];
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) g(i, i) += ridge;

  const Array mt = detail::spd_solve(g, bt);
  ProjectionMatrix proj;
  proj.source = src.name;
  proj.target = tgt.name;
  proj.m = Array({d, d});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) proj.m(i, j) = mt(j, i);

  real sq = 0;
  for (std::size_t n = 0; n < isrc.size(); ++n) {
    const std::vector<real>& ws = src.vectors[isrc[n]];
    const std::vector<real>& wt = tgt.vectors[itgt[n]];
    for (std::size_t i = 0; i < d; ++i) {
      real pred = 0;
      for (std::size_t j = 0; j < d; ++j) pred += proj.m(i, j) * ws[j];
      const real e = pred - wt[i];
      sq += e * e;
    }
  }
  proj.train_residual = sq / static_cast<real>(isrc.size() * d);
  return proj;
}

/// One directed projection per ordered version pair: c(c-1) matrices.
/// Pass ridge < 0 to use the per-pair default.
inline std::vector<ProjectionMatrix> train_all_projections(
    const std::vector<EmbeddingVersion>& versions, real ridge = real(-1)) {
  check(versions.size() >= 2, "train_all_projections: need >= 2 versions");
  std::vector<ProjectionMatrix> all;
  for (std::size_t i = 0; i < versions.size(); ++i) {
    for (std::size_t j = 0; j < versions.size(); ++j) {
      if (i == j) continue;
      std::size_t inter = 0;
      for (const std::string& w : versions[i].words)
        if (versions[j].contains(w)) ++inter;
      const real r =
          ridge < real(0) ? default_projection_ridge(inter) : ridge;
      ProjectionMatrix p = train_projection(versions[i], versions[j], r);
      p.source_index = i;
      p.target_index = j;
      all.push_back(std::move(p));
    }
  }
  return all;
}

/// Impute a word's vector in the target space as the element-wise average of
/// its projections from every version that knows it.
inline std::vector<real> impute(const std::string& word, std::size_t target,
                                const std::vector<EmbeddingVersion>& versions,
                                const std::vector<ProjectionMatrix>& projections) {
  check(target < versions.size(), "impute: bad target index");
  const std::size_t d = versions[target].dim;
  std::vector<real> acc(d, real(0));
  std::size_t sources = 0;
  for (const ProjectionMatrix& p : projections) {
    if (p.target_index != target || p.source_index == target) continue;
    const std::vector<real>* wv = versions[p.source_index].find(word);
    if (!wv) continue;
    for (std::size_t i = 0; i < d; ++i) {
      real pred = 0;
      for (std::size_t j = 0; j < d; ++j) pred += p.m(i, j) * (*wv)[j];
      acc[i] += pred;
    }
    ++sources;
  }
  check(sources > 0,
        "impute: word '" + word + "' is unknown in every source version");
  for (real& v : acc) v /= static_cast<real>(sources);
  return acc;
}

/// Extend every version to the union vocabulary by imputation. Idempotent:
/// once vocabularies agree there is nothing left to impute.
inline CompletedVersions complete_all(
    const std::vector<EmbeddingVersion>& versions, real ridge = real(-1)) {
  check(versions.size() >= 2, "complete_all: need >= 2 versions");
  const std::vector<ProjectionMatrix> projections =
      train_all_projections(versions, ridge);

  std::vector<std::string> union_vocab;
  std::unordered_map<std::string, bool> seen;
  for (const auto& v : versions) {
    for (const std::string& w : v.words) {
      if (!seen.count(w)) {
        seen.emplace(w, true);
        union_vocab.push_back(w);
      }
    }
  }

  CompletedVersions out;
  out.versions = versions;
  out.provenance.resize(versions.size());
  for (std::size_t i = 0; i < versions.size(); ++i) {
    for (const std::string& w : versions[i].words)
      out.provenance[i].emplace(w, WordOrigin::Pretrained);
    for (const std::string& w : union_vocab) {
      if (out.versions[i].contains(w)) continue;
      out.versions[i].add(w, impute(w, i, versions, projections));
      out.provenance[i].emplace(w, WordOrigin::Imputed);
    }
  }
  return out;
}

/// Write the same text format load_embeddings reads.
inline void save_embeddings(const EmbeddingVersion& v, std::ostream& out) {
  out << std::setprecision(std::numeric_limits<real>::max_digits10);
  for (std::size_t i = 0; i < v.words.size(); ++i) {
    out << v.words[i];
    for (real x : v.vectors[i]) out << ' ' << x;
    out << '\n';
  }
}

}  // namespace mvcnn
