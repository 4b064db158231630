#include <gtest/gtest.h>

#include <sstream>

#include "testutil.hpp"

using namespace mvcnn;

TEST(NormalizeTweet, PaperExample) {
  EXPECT_EQ(normalize_tweet("@thomasss cooooooool http://x.com"),
            "username cool url");
}

TEST(NormalizeTweet, RunsOfTwoUntouched) {
  EXPECT_EQ(normalize_tweet("aa bb"), "aa bb");
}

TEST(NormalizeTweet, EmptyString) { EXPECT_EQ(normalize_tweet(""), ""); }

TEST(NormalizeTweet, UrlVariants) {
  EXPECT_EQ(normalize_tweet("see https://a.b and www.c.d"),
            "see url and url");
}

TEST(NormalizeTweet, CaseInsensitiveRunsThenLowercase) {
  // collapsing happens before lowercasing; mixed-case runs of one letter
  // still count as one run so a second pass changes nothing
  EXPECT_EQ(normalize_tweet("CoOOOol"), "cool");
  EXPECT_EQ(normalize_tweet("WOW111!!!"), "wow111!!!");
}

TEST(NormalizeTweet, IdempotentOnFuzzedStrings) {
  Rng rng(99);
  const std::string alphabet =
      "abcdefgXYZ@:/.!?123   \t\nooOOaaAA@www.http://";
  for (int trial = 0; trial < 10000; ++trial) {
    std::string s;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i)
      s.push_back(alphabet[rng.below(alphabet.size())]);
    const std::string once = normalize_tweet(s);
    EXPECT_EQ(normalize_tweet(once), once) << "input: " << s;
  }
}

TEST(Tokenize, Basic) {
  const std::vector<std::string> expect{"the", "cat", "sat"};
  EXPECT_EQ(tokenize("the cat sat"), expect);
}

TEST(Tokenize, CollapsesWhitespace) {
  const std::vector<std::string> expect{"a", "b"};
  EXPECT_EQ(tokenize("  a   b "), expect);
}

TEST(Tokenize, MixedWhitespaceKinds) {
  const std::vector<std::string> expect{"a", "b", "c"};
  EXPECT_EQ(tokenize("a\tb\nc"), expect);
  EXPECT_EQ(tokenize("a \t b \r\n c"), expect);
}

TEST(LoadTsv, SingleLine) {
  std::istringstream in("1\tgood movie\n");
  const Dataset ds = load_tsv(in);
  ASSERT_EQ(ds.examples.size(), 1u);
  EXPECT_EQ(ds.examples[0].label, 1);
  const std::vector<std::string> expect{"good", "movie"};
  EXPECT_EQ(ds.examples[0].tokens, expect);
  EXPECT_EQ(ds.num_classes, 2);
}

TEST(LoadTsv, MissingTabNamesLine) {
  std::istringstream in("1\tok text\nbroken line\n");
  try {
    load_tsv(in);
    FAIL() << "expected parse error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadTsv, NumClassesIsMaxPlusOne) {
  std::istringstream in("0\ta\n2\tb\n0\tc\n");
  EXPECT_EQ(load_tsv(in).num_classes, 3);
}

TEST(LoadTsv, RejectsEmptyText) {
  std::istringstream in("0\t \n");
  EXPECT_THROW(load_tsv(in), std::invalid_argument);
}

TEST(LoadTsv, DeclaredClassBound) {
  std::istringstream in("5\tx\n");
  EXPECT_THROW(load_tsv(in, false, 3), std::invalid_argument);
}

namespace {

EncodedDataset tiny_encoded(std::size_t n) {
  EncodedDataset ds;
  ds.num_classes = 2;
  Rng rng(17);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> ids;
    const std::size_t len = 2 + rng.below(4);
    for (std::size_t j = 0; j < len; ++j)
      ids.push_back(1 + static_cast<int>(rng.below(9)));
    ds.token_ids.push_back(std::move(ids));
    ds.labels.push_back(static_cast<int>(i % 2));
  }
  return ds;
}

}  // namespace

TEST(BuildBatches, SevenIntoThrees) {
  const EncodedDataset ds = tiny_encoded(7);
  Rng rng(1);
  const std::vector<Batch> batches = build_batches(ds, 3, rng);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches[0].token_ids.size(), 3u);
  EXPECT_EQ(batches[1].token_ids.size(), 3u);
  EXPECT_EQ(batches[2].token_ids.size(), 1u);
}

TEST(BuildBatches, PadsToBatchMax) {
  EncodedDataset ds;
  ds.num_classes = 2;
  ds.token_ids = {{1, 2}, {3, 4, 5, 6, 7}};
  ds.labels = {0, 1};
  Rng rng(2);
  const std::vector<Batch> batches = build_batches(ds, 2, rng);
  ASSERT_EQ(batches.size(), 1u);
  for (const auto& row : batches[0].token_ids) EXPECT_EQ(row.size(), 5u);
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t len = batches[0].true_lengths[i];
    for (std::size_t j = len; j < 5; ++j)
      EXPECT_EQ(batches[0].token_ids[i][j], 0);
  }
}

TEST(BuildBatches, SameSeedSameOrder) {
  const EncodedDataset ds = tiny_encoded(20);
  Rng rng1(7);
  Rng rng2(7);
  const auto a = build_batches(ds, 6, rng1);
  const auto b = build_batches(ds, 6, rng2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(a[i].example_ids, b[i].example_ids);
}

TEST(BuildBatches, RejectsEmptyDataset) {
  EncodedDataset ds;
  Rng rng(1);
  EXPECT_THROW(build_batches(ds, 3, rng), std::invalid_argument);
}

// de-padding every row reproduces the original token lists exactly
TEST(BuildBatches, RoundTripThroughPadding) {
  const EncodedDataset ds = tiny_encoded(33);
  Rng rng(8);
  const std::vector<Batch> batches = build_batches(ds, 5, rng);
  std::vector<std::vector<int>> recovered(ds.token_ids.size());
  for (const Batch& b : batches) {
    for (std::size_t i = 0; i < b.token_ids.size(); ++i) {
      const auto& row = b.token_ids[i];
      recovered[b.example_ids[i]] =
          std::vector<int>(row.begin(), row.begin() + b.true_lengths[i]);
    }
  }
  EXPECT_EQ(recovered, ds.token_ids);
}

TEST(EncodeDataset, UnknownWordsMapToPadding) {
  Dataset ds;
  ds.num_classes = 2;
  ds.examples.push_back({1, {"known", "unknown"}});
  const std::unordered_map<std::string, int> index{{"known", 3}};
  const EncodedDataset enc = encode_dataset(ds, index);
  const std::vector<int> expect{3, 0};
  EXPECT_EQ(enc.token_ids[0], expect);
}
