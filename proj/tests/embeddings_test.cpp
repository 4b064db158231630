#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "testutil.hpp"

using namespace mvcnn;

namespace {

EmbeddingVersion version_from(const std::string& text,
                              const std::string& name = "v") {
  std::istringstream in(text);
  return load_embeddings(in, name);
}

}  // namespace

TEST(LoadEmbeddings, TwoLines) {
  const EmbeddingVersion v = version_from("a 1 2\nb 3 4\n");
  EXPECT_EQ(v.dim, 2u);
  ASSERT_EQ(v.words.size(), 2u);
  EXPECT_EQ(*v.find("a"), (std::vector<real>{1, 2}));
  EXPECT_EQ(*v.find("b"), (std::vector<real>{3, 4}));
}

TEST(LoadEmbeddings, HeaderLine) {
  const EmbeddingVersion v = version_from("2 3\na 1 2 3\nb 4 5 6\n");
  EXPECT_EQ(v.dim, 3u);
  EXPECT_EQ(v.words.size(), 2u);
}

TEST(LoadEmbeddings, DimensionMismatchNamesLine) {
  try {
    version_from("a 1 2\nb 1 2 3\n");
    FAIL() << "expected dimension mismatch";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadEmbeddings, UnparsableReal) {
  try {
    version_from("a 1 x\n");
    FAIL() << "expected parse error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }
}

TEST(LoadEmbeddings, DuplicateFirstWins) {
  const EmbeddingVersion v = version_from("a 1 2\na 9 9\n");
  EXPECT_EQ(v.words.size(), 1u);
  EXPECT_EQ(v.duplicate_warnings, 1u);
  EXPECT_EQ(*v.find("a"), (std::vector<real>{1, 2}));
}

TEST(LoadEmbeddings, CrLfAccepted) {
  const EmbeddingVersion v = version_from("a 1 2\r\nb 3 4\r\n");
  EXPECT_EQ(v.words.size(), 2u);
  EXPECT_EQ(v.dim, 2u);
}

namespace {

const std::vector<std::string> kFixtureVocab{"a", "b", "c", "d"};

std::vector<EmbeddingVersion> fixture_versions() {
  return {version_from("a 1 0\nb 0 1\n", "v1"),
          version_from("b 2 0\nc 0 2\n", "v2")};
}

}  // namespace

TEST(CoverageStats, Fixture) {
  const CoverageStats s = coverage_stats(fixture_versions(), kFixtureVocab);
  EXPECT_EQ(s.vocab_size, 4u);
  EXPECT_EQ(s.full_hit, 1u);     // b
  EXPECT_EQ(s.partial_hit, 2u);  // a, c
  EXPECT_EQ(s.no_hit, 1u);       // d
  EXPECT_EQ(s.per_version_unknown, (std::vector<std::size_t>{2, 2}));
}

TEST(CoverageStats, FullCoverage) {
  const auto v = version_from("a 1\nb 2\nc 3\nd 4\n");
  const CoverageStats s = coverage_stats({v, v}, kFixtureVocab);
  EXPECT_EQ(s.full_hit, 4u);
  EXPECT_EQ(s.partial_hit, 0u);
  EXPECT_EQ(s.no_hit, 0u);
}

TEST(CoverageStats, SingleEmptyishVersion) {
  const auto v = version_from("zzz 1\n");
  const CoverageStats s = coverage_stats({v}, kFixtureVocab);
  EXPECT_EQ(s.no_hit, 4u);
  EXPECT_EQ(s.full_hit, 0u);
  EXPECT_EQ(s.per_version_unknown[0], 4u);
}

TEST(CoverageStats, RejectsEmptyVocab) {
  EXPECT_THROW(coverage_stats(fixture_versions(), {}), std::invalid_argument);
}

TEST(CoverageStats, PartitionPropertyOnFuzzedSets) {
  Rng rng(12345);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t universe = 1 + rng.below(30);
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < universe; ++i)
      vocab.push_back("w" + std::to_string(i));
    const std::size_t num_versions = 1 + rng.below(5);
    std::vector<EmbeddingVersion> versions(num_versions);
    for (std::size_t vi = 0; vi < num_versions; ++vi) {
      versions[vi].name = "v" + std::to_string(vi);
      versions[vi].dim = 1;
      for (const std::string& w : vocab)
        if (rng.uniform() < 0.5) versions[vi].add(w, {real(1)});
    }
    const CoverageStats s = coverage_stats(versions, vocab);
    EXPECT_EQ(s.full_hit + s.partial_hit + s.no_hit, s.vocab_size);
    for (std::size_t vi = 0; vi < num_versions; ++vi)
      EXPECT_EQ(s.per_version_unknown[vi],
                vocab.size() - versions[vi].words.size());
  }
}

TEST(CoverageStats, PermutationInvariantExceptUnknownOrder) {
  auto versions = fixture_versions();
  const CoverageStats a = coverage_stats(versions, kFixtureVocab);
  std::swap(versions[0], versions[1]);
  const CoverageStats b = coverage_stats(versions, kFixtureVocab);
  EXPECT_EQ(a.full_hit, b.full_hit);
  EXPECT_EQ(a.partial_hit, b.partial_hit);
  EXPECT_EQ(a.no_hit, b.no_hit);
  EXPECT_EQ(a.per_version_unknown[0], b.per_version_unknown[1]);
  EXPECT_EQ(a.per_version_unknown[1], b.per_version_unknown[0]);
}

TEST(InitMultichannel, PretrainedRowsCopied) {
  Rng rng(1);
  const auto versions = fixture_versions();
  const MultichannelTable t =
      init_multichannel(kFixtureVocab, versions, nullptr, rng);
  EXPECT_EQ(t.vocab_size(), 5u);  // + padding
  EXPECT_EQ(t.channel_count(), 2u);
  const int b = t.id_of("b");
  ASSERT_GT(b, 0);
  EXPECT_EQ(t.channels[0].value(b, 0), 0.0);
  EXPECT_EQ(t.channels[0].value(b, 1), 1.0);
  EXPECT_EQ(t.channels[1].value(b, 0), 2.0);
  EXPECT_EQ(t.presence[0][b], WordOrigin::Pretrained);
  EXPECT_EQ(t.presence[1][b], WordOrigin::Pretrained);
}

TEST(InitMultichannel, UnknownRowsAreBoundedRandom) {
  Rng rng(2);
  const MultichannelTable t =
      init_multichannel(kFixtureVocab, fixture_versions(), nullptr, rng, 0.1);
  const int d = t.id_of("d");
  ASSERT_GT(d, 0);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    EXPECT_EQ(t.presence[ch][d], WordOrigin::Random);
    for (std::size_t j = 0; j < t.dim; ++j)
      EXPECT_LE(std::abs(t.channels[ch].value(d, j)), 0.1);
  }
}

TEST(InitMultichannel, ImputedVectorUsedWhenProvided) {
  Rng rng(3);
  const auto versions = fixture_versions();
  CompletedVersions completed;
  completed.versions = versions;
  completed.provenance.resize(2);
  completed.versions[1].add("a", {real(7), real(8)});
  completed.provenance[1].emplace("a", WordOrigin::Imputed);
  const MultichannelTable t =
      init_multichannel(kFixtureVocab, versions, &completed, rng);
  const int a = t.id_of("a");
  EXPECT_EQ(t.presence[0][a], WordOrigin::Pretrained);
  EXPECT_EQ(t.presence[1][a], WordOrigin::Imputed);
  EXPECT_EQ(t.channels[1].value(a, 0), 7.0);
  EXPECT_EQ(t.channels[1].value(a, 1), 8.0);
}

TEST(InitMultichannel, PaddingRowIsZeroAndMasked) {
  Rng rng(4);
  MultichannelTable t =
      init_multichannel(kFixtureVocab, fixture_versions(), nullptr, rng);
  for (std::size_t ch = 0; ch < t.channel_count(); ++ch)
    for (std::size_t j = 0; j < t.dim; ++j)
      EXPECT_EQ(t.channels[ch].value(0, j), 0.0);
  // a gradient written onto the padding row is cleared by the mask, so an
  // optimizer step cannot move it
  t.channels[0].gradient(0, 0) = 5.0;
  t.mask_padding_row_grads();
  adagrad_step(t.channels[0], 0.1);
  EXPECT_EQ(t.channels[0].value(0, 0), 0.0);
}

TEST(InitMultichannel, DimensionMismatchRejected) {
  Rng rng(5);
  auto versions = fixture_versions();
  versions.push_back(version_from("q 1 2 3\n", "v3"));
  EXPECT_THROW(init_multichannel(kFixtureVocab, versions, nullptr, rng),
               std::invalid_argument);
}
