#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "guessgame/entropy/conceptnet.hpp"
#include "guessgame/entropy/embedding.hpp"

using namespace gg;

namespace {

const std::filesystem::path kFixtures = GG_FIXTURE_DIR;

std::shared_ptr<const AssertionIndex> small_index() {
  return std::make_shared<AssertionIndex>(AssertionIndex::build({{"HasProperty", "knife", "sharp"},
                                                                 {"UsedFor", "knife", "cutting"},
                                                                 {"UsedFor", "spoon", "eating"},
                                                                 {"HasProperty", "pillow", "soft"},
                                                                 {"MadeOf", "spoon", "metal"},
                                                                 {"MadeOf", "knife", "metal"}}));
}

CandidateSet named(const AssertionIndex& idx, std::initializer_list<const char*> names) {
  std::vector<ObjectId> ids;
  for (const char* n : names) ids.push_back(*idx.object_id(n));
  return CandidateSet(ids);
}

std::shared_ptr<const Embedder> fixture_embedder() {
  return std::make_shared<TableEmbedder>(TableEmbedder::load(kFixtures / "embeddings_fixture.tsv"));
}

}  // namespace

TEST(Ingest, QuotedRowsParse) {
  std::istringstream in(
      "/a/1\t/r/HasProperty\t/c/en/knife\t/c/en/sharp\t{}\n"
      "/a/2\t/r/UsedFor\t/c/en/knife/n\t/c/en/cutting\t{}\n");
  auto r = ingest(in);
  ASSERT_EQ(r.index.assertions().size(), 2u);
  EXPECT_EQ(r.index.assertions()[0], (Assertion{"HasProperty", "knife", "sharp"}));
  EXPECT_EQ(r.index.assertions()[1], (Assertion{"UsedFor", "knife", "cutting"}));
}

TEST(Ingest, WhitelistFiltersAntonym) {
  std::istringstream in("/a/1\t/r/Antonym\t/c/en/sharp\t/c/en/dull\t{}\n");
  auto r = ingest(in);
  EXPECT_EQ(r.stats.filtered, 1);
  EXPECT_EQ(r.index.object_count(), 0u);
}

TEST(Ingest, LabelNormalization) {
  EXPECT_EQ(conceptnet::english_label("/c/en/ice_cream/n/wn/food"), "ice cream");
  EXPECT_EQ(conceptnet::english_label("/c/en/Knife"), "knife");
  EXPECT_FALSE(conceptnet::english_label("/c/fr/couteau"));
}

TEST(Ingest, FixtureCountsAndDiagnostics) {
  auto r = ingest_file(kFixtures / "conceptnet_20.csv");
  EXPECT_EQ(r.stats.rows, 20);
  EXPECT_EQ(r.stats.kept, 14);
  EXPECT_EQ(r.stats.filtered, 3);
  EXPECT_EQ(r.stats.duplicates, 1);
  EXPECT_EQ(r.stats.malformed, 2);
  ASSERT_EQ(r.stats.diagnostics.size(), 2u);
  EXPECT_EQ(r.stats.diagnostics[0].line, 10);
  EXPECT_EQ(r.stats.diagnostics[1].line, 17);
}

TEST(Ingest, GzipMatchesPlain) {
  auto plain = ingest_file(kFixtures / "conceptnet_20.csv");
  auto gz = ingest_file(kFixtures / "conceptnet_20.csv.gz");
  EXPECT_EQ(plain.index.assertions(), gz.index.assertions());
}

TEST(Ingest, IndexRoundTrip) {
  auto r = ingest_file(kFixtures / "conceptnet_20.csv");
  auto path = std::filesystem::temp_directory_path() / "gg_index_roundtrip.jsonl";
  save_index(r.index, path, default_relation_whitelist(), "x");
  auto back = load_index(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.assertions(), r.index.assertions());
  EXPECT_EQ(back.objects(), r.index.objects());
}

TEST(Index, DenseIdsInSortedOrder) {
  auto idx = small_index();
  EXPECT_EQ(idx->objects(), (std::vector<std::string>{"knife", "pillow", "spoon"}));
  EXPECT_EQ(*idx->object_id("knife"), 0u);
  EXPECT_TRUE(idx->has("HasProperty", 0, "sharp"));
  EXPECT_FALSE(idx->has("UsedFor", 0, "sharp"));
}

TEST(Cosine, ClosedForms) {
  EmbeddingVector x({1, 2, 3});
  EXPECT_NEAR(cosine(x, x), 1.0, 1e-15);
  EXPECT_NEAR(cosine(EmbeddingVector({1, 0}), EmbeddingVector({0, 1})), 0.0, 1e-15);
  EXPECT_NEAR(cosine(EmbeddingVector({1, 1, 0}), EmbeddingVector({1, 0, 0})), 0.70711, 5e-6);
  EXPECT_THROW(cosine(EmbeddingVector({0, 0}), EmbeddingVector({1, 0})), EmbedderError);
  EXPECT_THROW(cosine(EmbeddingVector({1}), EmbeddingVector({1, 0})), EmbedderError);
}

TEST(Match, SelfSimilarConceptMatches) {
  AssertionMatcher m(small_index(), std::make_shared<HashingEmbedder>());
  auto pairs = m.match("sharp", 0.60);
  EXPECT_NE(std::find(pairs.begin(), pairs.end(), RelationConcept{"HasProperty", "sharp"}), pairs.end());
}

TEST(Match, UnreachableThreshold) {
  AssertionMatcher m(small_index(), std::make_shared<HashingEmbedder>());
  EXPECT_TRUE(m.match("sharp", 1.01).empty());
}

TEST(Match, FixtureEmbeddingsSelectSharpAndCutting) {
  auto emb = fixture_embedder();
  EXPECT_NEAR(cosine(emb->embed_one("It is sharp"), emb->embed_one("sharp")), 0.71, 1e-5);
  EXPECT_NEAR(cosine(emb->embed_one("It is sharp"), emb->embed_one("cutting")), 0.65, 1e-5);
  EXPECT_NEAR(cosine(emb->embed_one("It is sharp"), emb->embed_one("soft")), 0.12, 1e-5);
  auto idx = std::make_shared<AssertionIndex>(AssertionIndex::build(
      {{"HasProperty", "knife", "sharp"}, {"UsedFor", "knife", "cutting"}, {"HasProperty", "pillow", "soft"}}));
  AssertionMatcher m(idx, emb);
  auto pairs = m.match("It is sharp", 0.60);
  EXPECT_EQ(pairs, (std::vector<RelationConcept>{{"HasProperty", "sharp"}, {"UsedFor", "cutting"}}));
}

TEST(Match, UnknownTextWithoutFallbackFails) {
  AssertionMatcher m(small_index(), fixture_embedder());
  EXPECT_THROW(m.match("something else", 0.6), EmbedderError);
}

TEST(Filter, YesSet) {
  auto idx = small_index();
  auto d = named(*idx, {"knife", "spoon", "pillow"});
  auto r = filter_candidates(d, {{"HasProperty", "sharp"}}, *idx);
  EXPECT_FALSE(r.skipped);
  EXPECT_EQ(r.candidates, named(*idx, {"knife"}));
}

TEST(Filter, EmptyMatchSkips) {
  auto idx = small_index();
  auto d = named(*idx, {"knife", "spoon"});
  auto r = filter_candidates(d, {}, *idx);
  EXPECT_TRUE(r.skipped);
  EXPECT_EQ(r.candidates, d);
}

TEST(Filter, EmptyIntersectionSkips) {
  auto idx = small_index();
  auto d = named(*idx, {"spoon"});
  auto r = filter_candidates(d, {{"HasProperty", "sharp"}}, *idx);
  EXPECT_TRUE(r.skipped);
  EXPECT_EQ(r.candidates, d);
}

TEST(Filter, UnionOfYesSets) {
  auto idx = small_index();
  auto d = named(*idx, {"knife", "spoon", "pillow"});
  auto r = filter_candidates(d, {{"HasProperty", "sharp"}, {"UsedFor", "eating"}}, *idx);
  EXPECT_EQ(r.candidates, named(*idx, {"knife", "spoon"}));
}

TEST(Filter, Idempotent) {
  auto idx = small_index();
  auto d = CandidateSet::all(*idx);
  std::vector<RelationConcept> m{{"MadeOf", "metal"}};
  auto once = filter_candidates(d, m, *idx).candidates;
  EXPECT_EQ(filter_candidates(once, m, *idx).candidates, once);
}

TEST(Filter, MatchesBruteForceScan) {
  auto r = ingest_file(kFixtures / "conceptnet_20.csv");
  const auto& idx = r.index;
  std::mt19937_64 rng(21);
  const auto& labels = idx.concept_labels();
  const std::vector<std::string> rels{"HasProperty", "UsedFor", "MadeOf", "IsA", "AtLocation", "PartOf", "CapableOf"};
  for (int i = 0; i < 200; ++i) {
    std::vector<RelationConcept> m;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 3); ++k)
      m.push_back({rels[rng() % rels.size()], labels[rng() % labels.size()]});
    auto d = CandidateSet::all(idx);
    std::set<std::string> brute;
    for (const auto& a : idx.assertions())
      for (const auto& rc : m)
        if (a.relation == rc.relation && a.concept_name == rc.concept_name) brute.insert(a.object);
    auto got = filter_candidates(d, m, idx);
    if (brute.empty()) {
      EXPECT_TRUE(got.skipped);
      continue;
    }
    std::set<std::string> names;
    for (auto id : got.candidates.members()) names.insert(idx.object_name(id));
    EXPECT_EQ(names, brute);
  }
}

TEST(EntropyIg, Values) {
  EXPECT_EQ(entropy_ig(8, 2), 2.0);
  EXPECT_EQ(entropy_ig(5, 5), 0.0);
  EXPECT_NEAR(entropy_ig(858, 100), 3.100978, 5e-6);
  EXPECT_NEAR(entropy_ig(858, 100), std::log2(8.58), 1e-14);
  EXPECT_THROW(entropy_ig(0, 0), InvariantError);
  EXPECT_THROW(entropy_ig(2, 3), InvariantError);
}

TEST(Candidates, RestrictedToVocabulary) {
  auto idx = small_index();
  auto d = CandidateSet::restricted(*idx, {"Knife", "unicorn", "spoon"});
  EXPECT_EQ(d, named(*idx, {"knife", "spoon"}));
}

TEST(Embedders, CachingReturnsSameVectors) {
  auto inner = std::make_shared<HashingEmbedder>(64);
  CachingEmbedder c(inner);
  auto a = c.embed_one("It is sharp");
  auto b = c.embed_one("It is sharp");
  EXPECT_TRUE(std::ranges::equal(a.values(), b.values()));
  EXPECT_EQ(c.cached(), 1u);
}
