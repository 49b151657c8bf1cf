#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <set>

#include "kge/error.h"
#include "kge/random.h"
#include "kge/sampling.h"

namespace kge {
namespace {

std::vector<std::size_t> mix_counts(std::vector<double> f, std::size_t b) {
  MixConfig m;
  m.fractions = std::move(f);
  m.batch_size = b;
  return m.counts();
}

TEST(Mix, ExactSplits) {
  EXPECT_EQ(mix_counts({0.5, 0.5}, 100), (std::vector<std::size_t>{50, 50}));
  EXPECT_EQ(mix_counts({0.5, 0.3, 0.2}, 10), (std::vector<std::size_t>{5, 3, 2}));
}

TEST(Mix, LargestRemainderTiesGoToDeclarationOrder) {
  EXPECT_EQ(mix_counts({1.0 / 3, 1.0 / 3, 1.0 / 3}, 10),
            (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(mix_counts({0.25, 0.25, 0.25, 0.25}, 6),
            (std::vector<std::size_t>{2, 2, 1, 1}));
}

TEST(Mix, AlwaysSumsToBatchSize) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 8);
    std::vector<double> f(n);
    double s = 0;
    for (auto& x : f) s += (x = uniform01(rng));
    for (auto& x : f) x /= s;
    const std::size_t b = 1 + uniform_index(rng, 2000);
    const auto c = mix_counts(f, b);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += c[i];
      EXPECT_LE(std::fabs(static_cast<double>(c[i]) - f[i] * b), 1.0);
    }
    EXPECT_EQ(total, b);
  }
}

TEST(Mix, RejectsBadFractions) {
  EXPECT_THROW(mix_counts({0.5, 0.4}, 10), ConfigError);
  EXPECT_THROW(mix_counts({1.5, -0.5}, 10), ConfigError);
}

TripleStore two_type_store(std::size_t users, std::size_t items) {
  Schema s;
  s.add_entity_type("user");
  s.add_entity_type("item");
  s.add_edge_type("user", "click", "item");
  s.add_edge_type("user", "checkout", "item");
  TripleStore st(s);
  for (std::size_t i = 0; i < users; ++i) st.vocab[0].intern("u" + std::to_string(i));
  for (std::size_t i = 0; i < items; ++i) st.vocab[1].intern("i" + std::to_string(i));
  return st;
}

TEST(Mix, ProportionalKeepsRareTypesInTheBatch) {
  auto st = two_type_store(10, 10);
  st.edges[0].assign(9999, Triple{0, 0, 0});
  st.edges[1].assign(1, Triple{0, 1, 0});
  const auto c = proportional_mix(st, 64).counts();
  EXPECT_EQ(c[1], 1u);
  EXPECT_EQ(c[0] + c[1], 64u);
}

TEST(Pool, SingleEntityIsAllZeros) {
  const auto st = two_type_store(1, 1);
  const auto pool = build_pool(st, 0, 50, 3);
  for (auto id : pool.ids) EXPECT_EQ(id, 0u);
}

TEST(Pool, FrequenciesLookUniform) {
  const auto st = two_type_store(10000, 1);
  const auto pool = build_pool(st, 0, 100000, 5);
  std::vector<int> freq(10000, 0);
  for (auto id : pool.ids) ++freq[id];
  double chi2 = 0;
  for (int f : freq) {
    EXPECT_LE(std::abs(f - 10), 10 * std::sqrt(10.0));
    chi2 += (f - 10.0) * (f - 10.0) / 10.0;
  }
  // 9999 degrees of freedom: mean 9999, sd ~141.
  EXPECT_LT(std::fabs(chi2 - 9999.0), 6 * 141.4);
}

TEST(Pool, SeededAndValidated) {
  const auto st = two_type_store(100, 0);
  EXPECT_EQ(build_pool(st, 0, 1000, 9).ids, build_pool(st, 0, 1000, 9).ids);
  EXPECT_NE(build_pool(st, 0, 1000, 9).ids, build_pool(st, 0, 1000, 10).ids);
  EXPECT_THROW(build_pool(st, 1, 10, 1), ConfigError);
  EXPECT_THROW(build_pool(st, 0, 0, 1), ConfigError);
}

TEST(EdgeStream, EachEpochVisitsEveryEdgeOnce) {
  std::vector<Triple> edges;
  for (EntityId i = 0; i < 37; ++i) edges.push_back({i, 0, i});
  EdgeStream stream(edges, 4);
  std::vector<Triple> out;
  stream.take(37, out);
  std::set<EntityId> heads;
  for (const auto& t : out) heads.insert(t.head);
  EXPECT_EQ(heads.size(), 37u);
  out.clear();
  stream.take(40, out);
  EXPECT_GE(stream.epoch(), 1u);
  EXPECT_EQ(out.size(), 40u);
}

TEST(Composer, CountsFollowTheMix) {
  auto st = two_type_store(5, 5);
  for (EntityId i = 0; i < 5; ++i) {
    st.edges[0].push_back({i, 0, i});
    st.edges[1].push_back({i, 1, (i + 1) % 5});
  }
  MixConfig mix{{0.7, 0.3}, 10, 0};
  BatchComposer composer(st, mix, 1);
  for (int round = 0; round < 5; ++round) {
    const auto groups = composer.next();
    EXPECT_EQ(groups[0].size(), 7u);
    EXPECT_EQ(groups[1].size(), 3u);
    for (const auto& t : groups[1]) EXPECT_EQ(t.edge_type, 1u);
  }
}

TEST(Composer, NonzeroShareOnEmptyTypeIsConfigError) {
  auto st = two_type_store(2, 2);
  st.edges[0].push_back({0, 0, 0});
  EXPECT_THROW(BatchComposer(st, MixConfig{{0.5, 0.5}, 4, 0}, 1), ConfigError);
  EXPECT_NO_THROW(BatchComposer(st, MixConfig{{1.0, 0.0}, 4, 0}, 1));
}

std::vector<NegativePool> pools_for(const TripleStore& st, std::size_t size) {
  std::vector<NegativePool> pools;
  for (EntityTypeId t = 0; t < st.schema.num_entity_types(); ++t) {
    pools.push_back(build_pool(st, t, size, 7));
  }
  return pools;
}

TEST(AttachNegatives, TwoPlusTwoPerPositive) {
  auto st = two_type_store(20, 20);
  std::vector<std::vector<Triple>> pos(2);
  for (EntityId i = 0; i < 6; ++i) pos[0].push_back({i, 0, i});
  for (EntityId i = 0; i < 3; ++i) pos[1].push_back({i, 1, i + 10});
  const auto pools = pools_for(st, 100);
  Rng rng(3);
  const auto batch = attach_negatives(st.schema, pos, pools, 2, 2, rng);
  EXPECT_EQ(batch.negatives_per_positive, 4u);
  EXPECT_EQ(batch.num_positives(), 9u);
  for (const auto& g : batch.groups) {
    EXPECT_EQ(g.negative_tails.size(), g.positives.size() * 4);
    for (std::size_t i = 0; i < g.positives.size(); ++i) {
      for (std::size_t k = 2; k < 4; ++k) {
        const auto tail = g.negative_tails[i * 4 + k];
        bool from_other = false;
        for (std::size_t j = 0; j < g.positives.size(); ++j) {
          if (j != i && g.positives[j].tail == tail) from_other = true;
        }
        EXPECT_TRUE(from_other);
      }
    }
  }
  EXPECT_EQ(batch.stats.in_batch_fallbacks, 0u);
}

TEST(AttachNegatives, PairSwapsTails) {
  auto st = two_type_store(2, 2);
  std::vector<std::vector<Triple>> pos(2);
  pos[0] = {{0, 0, 0}, {1, 0, 1}};
  const auto pools = pools_for(st, 10);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto batch = attach_negatives(st.schema, pos, pools, 0, 1, rng);
    ASSERT_EQ(batch.groups.size(), 1u);
    EXPECT_EQ(batch.groups[0].negative_tails, (std::vector<EntityId>{1, 0}));
  }
}

TEST(AttachNegatives, SinglePositiveFallsBackToUniform) {
  auto st = two_type_store(3, 3);
  std::vector<std::vector<Triple>> pos(2);
  pos[1] = {{0, 1, 2}};
  const auto pools = pools_for(st, 10);
  Rng rng(1);
  const auto batch = attach_negatives(st.schema, pos, pools, 1, 2, rng);
  EXPECT_EQ(batch.stats.in_batch_fallbacks, 2u);
  EXPECT_EQ(batch.groups[0].negative_tails.size(), 3u);
}

TEST(BatchSource, BackgroundMatchesInline) {
  auto make = [] {
    auto counter = std::make_shared<int>(0);
    return [counter] {
      TrainBatch b;
      b.negatives_per_positive = static_cast<std::size_t>((*counter)++);
      return b;
    };
  };
  BatchSource inline_source(make(), false);
  BatchSource background(make(), true, 2);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(inline_source.next().negatives_per_positive,
              background.next().negatives_per_positive);
  }
}

TEST(BatchSource, ProducerErrorsSurfaceOnNext) {
  int calls = 0;
  BatchSource src(
      [&calls]() -> TrainBatch {
        if (++calls > 2) throw ConfigError("producer broke");
        return TrainBatch{};
      },
      true, 1);
  src.next();
  src.next();
  EXPECT_THROW(src.next(), ConfigError);
}

}  // namespace
}  // namespace kge
