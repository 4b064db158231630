#include <gtest/gtest.h>

#include <sstream>

#include "testutil.hpp"

using namespace mvcnn;
using testutil::conditioned_matrix;
using testutil::cosine;

namespace {

// source version with random vectors, target = A * source on the shared part
struct LinearPair {
  EmbeddingVersion src;
  EmbeddingVersion tgt;
  Array a;
};

LinearPair make_linear_pair(std::size_t d, std::size_t shared,
                            std::size_t holdout, std::uint64_t seed) {
  Rng rng(seed);
  LinearPair p;
  p.a = conditioned_matrix(d, real(10), rng);
  p.src.name = "src";
  p.src.dim = d;
  p.tgt.name = "tgt";
  p.tgt.dim = d;
  for (std::size_t n = 0; n < shared + holdout; ++n) {
    std::vector<real> ws(d);
    for (std::size_t i = 0; i < d; ++i)
      ws[i] = static_cast<real>(rng.uniform(-1, 1));
    std::vector<real> wt(d, real(0));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) wt[i] += p.a(i, j) * ws[j];
    const std::string word = "w" + std::to_string(n);
    p.src.add(word, ws);
    if (n < shared) p.tgt.add(word, wt);  // held-out words stay src-only
  }
  return p;
}

}  // namespace

TEST(TrainProjection, RecoversLinearMap) {
  const std::size_t d = 10;
  const LinearPair p = make_linear_pair(d, 500, 0, 42);
  const ProjectionMatrix m = train_projection(p.src, p.tgt, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      EXPECT_NEAR(m.m(i, j), p.a(i, j), 1e-6);
  EXPECT_LT(m.train_residual, 1e-10);
}

TEST(TrainProjection, IdentityRecovery) {
  EmbeddingVersion v;
  v.name = "v";
  v.dim = 3;
  Rng rng(7);
  for (int n = 0; n < 10; ++n) {
    std::vector<real> w(3);
    for (auto& x : w) x = static_cast<real>(rng.uniform(-1, 1));
    v.add("w" + std::to_string(n), w);
  }
  const ProjectionMatrix m = train_projection(v, v, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(m.m(i, j), i == j ? 1.0 : 0.0, 1e-8);
}

TEST(TrainProjection, SingularSystemReported) {
  EmbeddingVersion a, b;
  a.name = "a";
  a.dim = 2;
  b.name = "b";
  b.dim = 2;
  a.add("w", {1, 2});
  b.add("w", {3, 4});
  try {
    train_projection(a, b, 0.0);
    FAIL() << "expected singular-system error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
}

TEST(TrainProjection, EmptyIntersectionReported) {
  EmbeddingVersion a, b;
  a.name = "a";
  a.dim = 1;
  b.name = "b";
  b.dim = 1;
  a.add("x", {1});
  b.add("y", {1});
  EXPECT_THROW(train_projection(a, b, 0.0), std::invalid_argument);
}

TEST(TrainAllProjections, CountsDirectedPairs) {
  const LinearPair p = make_linear_pair(3, 20, 0, 1);
  EXPECT_EQ(train_all_projections({p.src, p.tgt}).size(), 2u);

  std::vector<EmbeddingVersion> five;
  Rng rng(2);
  for (int i = 0; i < 5; ++i) {
    EmbeddingVersion v;
    v.name = "v" + std::to_string(i);
    v.dim = 2;
    for (int n = 0; n < 8; ++n) {
      std::vector<real> w{static_cast<real>(rng.uniform(-1, 1)),
                          static_cast<real>(rng.uniform(-1, 1))};
      v.add("w" + std::to_string(n), w);
    }
    five.push_back(std::move(v));
  }
  EXPECT_EQ(train_all_projections(five).size(), 20u);  // c(c-1)
}

TEST(TrainAllProjections, DisjointPairNamesThePair) {
  EmbeddingVersion a, b;
  a.name = "alpha";
  a.dim = 1;
  b.name = "beta";
  b.dim = 1;
  a.add("x", {1});
  b.add("y", {1});
  try {
    train_all_projections({a, b});
    FAIL() << "expected empty-intersection error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("alpha"), std::string::npos);
    EXPECT_NE(msg.find("beta"), std::string::npos);
  }
}

namespace {

ProjectionMatrix identity_projection(std::size_t src, std::size_t tgt,
                                     std::size_t d) {
  ProjectionMatrix p;
  p.source_index = src;
  p.target_index = tgt;
  p.m = Array({d, d});
  for (std::size_t i = 0; i < d; ++i) p.m(i, i) = real(1);
  return p;
}

}  // namespace

TEST(Impute, SingleSourceIdentity) {
  EmbeddingVersion src, tgt;
  src.name = "s";
  src.dim = 2;
  tgt.name = "t";
  tgt.dim = 2;
  src.add("w", {1, 2});
  const auto v = impute("w", 1, {src, tgt}, {identity_projection(0, 1, 2)});
  EXPECT_EQ(v, (std::vector<real>{1, 2}));
}

TEST(Impute, TwoSourcesAverage) {
  EmbeddingVersion a, b, tgt;
  a.name = "a";
  a.dim = 2;
  b.name = "b";
  b.dim = 2;
  tgt.name = "t";
  tgt.dim = 2;
  a.add("w", {0, 2});
  b.add("w", {2, 0});
  const auto v = impute(
      "w", 2, {a, b, tgt},
      {identity_projection(0, 2, 2), identity_projection(1, 2, 2)});
  EXPECT_EQ(v, (std::vector<real>{1, 1}));
}

TEST(Impute, UnknownEverywhereIsAnError) {
  EmbeddingVersion a, tgt;
  a.name = "a";
  a.dim = 2;
  tgt.name = "t";
  tgt.dim = 2;
  a.add("x", {1, 1});
  EXPECT_THROW(impute("w", 1, {a, tgt}, {identity_projection(0, 1, 2)}),
               std::invalid_argument);
}

TEST(Impute, HoldoutReconstruction) {
  const std::size_t d = 10;
  const LinearPair p = make_linear_pair(d, 500, 50, 77);
  const std::vector<EmbeddingVersion> versions{p.src, p.tgt};
  const auto projections = train_all_projections(versions, 0.0);
  for (std::size_t n = 500; n < 550; ++n) {
    const std::string word = "w" + std::to_string(n);
    const std::vector<real>& ws = *p.src.find(word);
    std::vector<real> truth(d, real(0));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) truth[i] += p.a(i, j) * ws[j];
    const std::vector<real> got = impute(word, 1, versions, projections);
    EXPECT_GT(cosine(got, truth), 0.99);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(got[i], truth[i], 1e-6);
  }
}

// each imputed coordinate lies inside the min/max of the projected sources
TEST(Impute, AveragingBound) {
  Rng rng(5);
  const std::size_t d = 3;
  EmbeddingVersion s1, s2, tgt;
  s1.name = "s1";
  s1.dim = d;
  s2.name = "s2";
  s2.dim = d;
  tgt.name = "t";
  tgt.dim = d;
  for (int trial = 0; trial < 200; ++trial) {
    const std::string w = "w" + std::to_string(trial);
    std::vector<real> v1(d), v2(d);
    for (std::size_t i = 0; i < d; ++i) {
      v1[i] = static_cast<real>(rng.uniform(-2, 2));
      v2[i] = static_cast<real>(rng.uniform(-2, 2));
    }
    s1.add(w, v1);
    s2.add(w, v2);
    const auto got =
        impute(w, 2, {s1, s2, tgt},
               {identity_projection(0, 2, d), identity_projection(1, 2, d)});
    for (std::size_t i = 0; i < d; ++i) {
      EXPECT_GE(got[i], std::min(v1[i], v2[i]) - 1e-12);
      EXPECT_LE(got[i], std::max(v1[i], v2[i]) + 1e-12);
    }
  }
}

namespace {

std::vector<EmbeddingVersion> abc_fixture() {
  EmbeddingVersion v1, v2;
  v1.name = "v1";
  v1.dim = 2;
  v2.name = "v2";
  v2.dim = 2;
  v1.add("a", {1, 0});
  v1.add("b", {0, 1});
  v2.add("b", {2, 0});
  v2.add("c", {0, 2});
  return {v1, v2};
}

}  // namespace

TEST(CompleteAll, ExtendsToUnionVocabulary) {
  const CompletedVersions out = complete_all(abc_fixture(), 1e-6);
  for (const EmbeddingVersion& v : out.versions) {
    EXPECT_EQ(v.words.size(), 3u);
    EXPECT_TRUE(v.contains("a"));
    EXPECT_TRUE(v.contains("b"));
    EXPECT_TRUE(v.contains("c"));
  }
  EXPECT_EQ(out.provenance[0].at("c"), WordOrigin::Imputed);
  EXPECT_EQ(out.provenance[1].at("a"), WordOrigin::Imputed);
  EXPECT_EQ(out.provenance[0].at("a"), WordOrigin::Pretrained);
}

TEST(CompleteAll, IdenticalVocabulariesUnchanged) {
  EmbeddingVersion v1, v2;
  v1.name = "v1";
  v1.dim = 1;
  v2.name = "v2";
  v2.dim = 1;
  for (const char* w : {"a", "b", "c"}) {
    v1.add(w, {1});
    v2.add(w, {2});
  }
  const CompletedVersions out = complete_all({v1, v2}, 1e-6);
  EXPECT_EQ(out.versions[0].vectors, v1.vectors);
  EXPECT_EQ(out.versions[1].vectors, v2.vectors);
  for (const auto& prov : out.provenance)
    for (const auto& [word, origin] : prov)
      EXPECT_EQ(origin, WordOrigin::Pretrained);
}

TEST(CompleteAll, Idempotent) {
  const CompletedVersions once = complete_all(abc_fixture(), 1e-6);
  const CompletedVersions twice = complete_all(once.versions, 1e-6);
  ASSERT_EQ(once.versions.size(), twice.versions.size());
  for (std::size_t i = 0; i < once.versions.size(); ++i) {
    EXPECT_EQ(once.versions[i].words, twice.versions[i].words);
    EXPECT_EQ(once.versions[i].vectors, twice.versions[i].vectors);
  }
}

TEST(SaveEmbeddings, RoundTrips) {
  const CompletedVersions out = complete_all(abc_fixture(), 1e-6);
  std::ostringstream os;
  save_embeddings(out.versions[0], os);
  std::istringstream is(os.str());
  const EmbeddingVersion back = load_embeddings(is, "v1");
  EXPECT_EQ(back.words, out.versions[0].words);
  for (std::size_t i = 0; i < back.vectors.size(); ++i)
    for (std::size_t j = 0; j < back.vectors[i].size(); ++j)
      EXPECT_DOUBLE_EQ(back.vectors[i][j], out.versions[0].vectors[i][j]);
}
