#include "defsim/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "defsim/hashing.hpp"
#include "defsim/error.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace defsim;
using defsim::testing::data_path;
using defsim::testing::oracle_fnv1a64;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected defsim::Error";
  return ErrorCode::kIo;
}

Corpus small_corpus() {
  return Corpus("small", {{"a", "Smart cities use ICT.", DefinitionKind::kIndividual, ""},
                          {"b", "Sensors collect data about people.", DefinitionKind::kIndividual, ""},
                          {"c", "Smart cities use ICT.", DefinitionKind::kComposite, ""}});
}

std::string dumped(const EmbeddingSet& s) {
  std::ostringstream out;
  save_embeddings(out, s);
  return out.str();
}

}  // namespace

// Frozen from the independent byte-wise FNV-1a in support/oracles.hpp.
TEST(LocalEmbed, OracleBuckets) {
  EXPECT_EQ(oracle_fnv1a64("aaa") % 8, 2u);
  EXPECT_EQ(oracle_fnv1a64("x") % 8, 7u);
  EXPECT_EQ(oracle_fnv1a64("y") % 8, 4u);
  EXPECT_EQ(oracle_fnv1a64("smart") % 256, 210u);
  EXPECT_EQ(oracle_fnv1a64("city") % 256, 162u);
  EXPECT_EQ(fnv1a64("aaa"), oracle_fnv1a64("aaa"));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
}

TEST(LocalEmbed, RepeatedTokenIsOneHot) {
  const auto v = local_deterministic_embed("aaa aaa", 8);
  ASSERT_EQ(v.dim(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(v.values()[i], i == 2 ? 1.0 : 0.0) << i;
  EXPECT_EQ(v.model_id(), "fnv1a-bow-8");
}

TEST(LocalEmbed, TwoDistinctBucketsNormalizeToInverseSqrtTwo) {
  const auto v = local_deterministic_embed("x y", 8);
  const double expected = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(v.values()[i], (i == 7 || i == 4) ? expected : 0.0, 1e-15) << i;
  }
}

// Hand count for "smart city smart": bucket 210 -> 2, bucket 162 -> 1, norm sqrt(5).
TEST(LocalEmbed, ThreeWordHandComputed) {
  const auto v = local_deterministic_embed("Smart CITY, smart!", 256);
  EXPECT_NEAR(v.values()[210], 2.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(v.values()[162], 1.0 / std::sqrt(5.0), 1e-15);
  double rest = 0.0;
  for (std::size_t i = 0; i < 256; ++i) {
    if (i != 210 && i != 162) rest += std::abs(v.values()[i]);
  }
  EXPECT_EQ(rest, 0.0);
}

TEST(LocalEmbed, NoTokensIsZeroVector) {
  EXPECT_EQ(code_of([] { local_deterministic_embed("!!!", 8); }), ErrorCode::kZeroVector);
  EXPECT_EQ(code_of([] { local_deterministic_embed("\xc3\xa9\xc3\xa9", 8); }),
            ErrorCode::kZeroVector);
}

TEST(LocalEmbed, NonAsciiBytesSplitTokens) {
  EXPECT_EQ(local_deterministic_embed("caf\xc3\xa9x", 64), local_deterministic_embed("caf x", 64));
}

TEST(LocalEmbed, UnitNormProperty) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcdefgh XYZ 0123,.;!\t";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const std::size_t len = 1 + rng() % 80;
    for (std::size_t i = 0; i < len; ++i) text.push_back(alphabet[rng() % alphabet.size()]);
    text.push_back('q');
    const std::size_t dim = 1 + rng() % 300;
    const auto v = local_deterministic_embed(text, dim);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_LE(std::abs(euclidean_norm(v.values()) - v.norm()), 1e-9 * v.norm());
  }
}

TEST(EmbeddingVector, RejectsNonFiniteAndEmpty) {
  EXPECT_EQ(code_of([] { EmbeddingVector({1.0, std::nan("")}, "m"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { EmbeddingVector({std::numeric_limits<double>::infinity()}, "m"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { EmbeddingVector({}, "m"); }), ErrorCode::kDimensionMismatch);
}

TEST(EmbeddingVector, CachedNormMatches) {
  const EmbeddingVector v({3.0, 4.0}, "m");
  EXPECT_EQ(v.norm(), 5.0);
}

TEST(EmbeddingSet, EnforcesSharedDimAndModel) {
  EmbeddingSet s("m", 2);
  s.insert("a", EmbeddingVector({1.0, 0.0}, "m"));
  EXPECT_EQ(code_of([&] { s.insert("b", EmbeddingVector({1.0, 0.0, 0.0}, "m")); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { s.insert("b", EmbeddingVector({1.0, 0.0}, "other")); }),
            ErrorCode::kModelMismatch);
  EXPECT_EQ(code_of([&] { s.insert("a", EmbeddingVector({0.0, 1.0}, "m")); }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([&] { s.at("zzz"); }), ErrorCode::kMissingVector);
}

TEST(EmbedCorpus, LocalIsDeterministicByteForByte) {
  const auto ind = load_corpus(data_path("individual-60.jsonl"));
  const ProviderConfig config;
  const auto first = embed_corpus(ind, config);
  const auto second = embed_corpus(ind, config);
  EXPECT_EQ(first, second);
  EXPECT_EQ(dumped(first), dumped(second));
  EXPECT_EQ(first.size(), 60u);
  EXPECT_EQ(first.dim(), kDefaultLocalDim);
  EXPECT_EQ(first.ids().front(), "ind-1");
}

TEST(EmbedCorpus, IdenticalTextsGiveIdenticalVectors) {
  const auto set = embed_corpus(small_corpus(), ProviderConfig{});
  EXPECT_EQ(set.at("a"), set.at("c"));
  EXPECT_FALSE(set.at("a") == set.at("b"));
}

TEST(EmbedCorpus, PermutationDoesNotChangeVectors) {
  const auto c = small_corpus();
  std::vector<Definition> reversed(c.definitions().rbegin(), c.definitions().rend());
  const auto a = embed_corpus(c, ProviderConfig{});
  const auto b = embed_corpus(Corpus("rev", reversed), ProviderConfig{});
  for (const auto& id : c.ids()) EXPECT_EQ(a.at(id), b.at(id));
}

TEST(EmbedCorpus, LocalZeroVectorNamesDefinition) {
  const Corpus c("z", {{"ok", "fine words", DefinitionKind::kIndividual, ""},
                       {"bad", "?!", DefinitionKind::kIndividual, ""}});
  try {
    embed_corpus(c, ProviderConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
}

TEST(EmbedCorpus, FileProviderMissingVector) {
  defsim::testing::TempDir tmp;
  const auto ind = load_corpus(data_path("individual-60.jsonl"));
  const auto full = embed_corpus(ind, ProviderConfig{});
  auto ids = ind.ids();
  std::erase(ids, "ind-7");
  save_embeddings(tmp / "partial.json", full.subset(ids));

  ProviderConfig config;
  config.kind = ProviderKind::kFile;
  config.path = tmp / "partial.json";
  try {
    embed_corpus(ind, config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingVector);
    EXPECT_NE(std::string(e.what()).find("ind-7"), std::string::npos);
  }
}

TEST(EmbedCorpus, FileProviderMatchesSourceAndRejectsZero) {
  defsim::testing::TempDir tmp;
  const auto c = small_corpus();
  const auto local = embed_corpus(c, ProviderConfig{});
  save_embeddings(tmp / "e.json", local);
  ProviderConfig config;
  config.kind = ProviderKind::kFile;
  config.path = tmp / "e.json";
  EXPECT_EQ(embed_corpus(c, config), local);

  config.model_id = "something-else";
  EXPECT_EQ(code_of([&] { embed_corpus(c, config); }), ErrorCode::kModelMismatch);

  defsim::testing::write_file(tmp / "z.json",
                              R"({"model_id":"m","dim":2,"vectors":{"a":[0,0],"b":[1,0],"c":[0,1]}})");
  config.model_id.clear();
  config.path = tmp / "z.json";
  EXPECT_EQ(code_of([&] { embed_corpus(c, config); }), ErrorCode::kZeroVector);
}

TEST(EmbeddingFile, DeclaredDimMismatch) {
  std::string vec = "[";
  for (int i = 0; i < 767; ++i) vec += (i ? ",0.5" : "0.5");
  vec += "]";
  std::istringstream in(R"({"model_id":"all-mpnet-base-v2","dim":768,"vectors":{"ind-1":)" + vec +
                        "}}");
  EXPECT_EQ(code_of([&] { load_embeddings(in); }), ErrorCode::kDimensionMismatch);
}

TEST(EmbeddingFile, MalformedInputs) {
  const auto bad = [](const std::string& s) {
    std::istringstream in(s);
    return code_of([&] { load_embeddings(in); });
  };
  EXPECT_EQ(bad("not json"), ErrorCode::kMalformedFile);
  EXPECT_EQ(bad(R"({"dim":2,"vectors":{}})"), ErrorCode::kMalformedFile);
  EXPECT_EQ(bad(R"({"model_id":"m","dim":0,"vectors":{}})"), ErrorCode::kMalformedFile);
  EXPECT_EQ(bad(R"({"model_id":"m","dim":-2,"vectors":{}})"), ErrorCode::kMalformedFile);
  EXPECT_EQ(bad(R"({"model_id":"m","dim":1,"vectors":{"a":["x"]}})"), ErrorCode::kMalformedFile);
  EXPECT_EQ(bad(R"({"model_id":"m","dim":1,"vectors":{"a":5}})"), ErrorCode::kMalformedFile);
}

// Save/load is bit-exact for arbitrary finite doubles and keeps id order.
TEST(EmbeddingFile, RoundTripProperty) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-300, 300);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng() % 64;
    EmbeddingSet set("model-" + std::to_string(trial), dim);
    const std::size_t n = 1 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = std::ldexp(mantissa(rng), exponent(rng) / 10);
      if (trial % 7 == 0) v[0] = std::numeric_limits<double>::denorm_min();
      set.insert("z" + std::to_string(n - i), EmbeddingVector(std::move(v), set.model_id()));
    }
    std::istringstream in(dumped(set));
    const auto back = load_embeddings(in);
    ASSERT_EQ(back, set);
    EXPECT_EQ(dumped(back), dumped(set));
  }
}

TEST(EmbeddingCache, KeyIncludesTextHash) {
  EmbeddingCache cache;
  const Definition d{"a", "original text", DefinitionKind::kIndividual, ""};
  cache.store("m", d, EmbeddingVector({1.0, 2.0}, "m"));
  ASSERT_TRUE(cache.find("m", d).has_value());
  EXPECT_FALSE(cache.find("other", d).has_value());
  Definition edited = d;
  edited.text = "edited text";
  EXPECT_FALSE(cache.find("m", edited).has_value());

  std::stringstream buf;
  cache.save(buf);
  const auto loaded = EmbeddingCache::load(buf);
  EXPECT_EQ(loaded.size(), 1u);
  EXPECT_EQ(*loaded.find("m", d), EmbeddingVector({1.0, 2.0}, "m"));
}

TEST(EmbeddingCache, EmbedCorpusUsesAndFillsCache) {
  const auto c = small_corpus();
  ProviderConfig config;
  config.dim = 4;
  EmbeddingCache cache;
  const auto fresh = embed_corpus(c, config, &cache);
  EXPECT_EQ(cache.size(), 3u);

  // A planted entry is served instead of recomputing.
  cache.store(config.effective_model_id(), c.at("b"),
              EmbeddingVector({0.0, 0.0, 0.0, 9.0}, config.effective_model_id()));
  const auto cached = embed_corpus(c, config, &cache);
  EXPECT_EQ(cached.at("a"), fresh.at("a"));
  EXPECT_EQ(cached.at("b").values()[3], 9.0);
}

TEST(ProviderConfig, Validation) {
  ProviderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.kind = ProviderKind::kRemote;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  c.endpoint = "http://localhost:1";
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.effective_model_id(), "all-mpnet-base-v2");
  c.batch_size = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  c = ProviderConfig{};
  c.kind = ProviderKind::kFile;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(parse_provider_kind("local"), ProviderKind::kLocalDeterministic);
  EXPECT_EQ(code_of([] { parse_provider_kind("gpu"); }), ErrorCode::kInvalidArgument);
}
