#include <set>

#include <gtest/gtest.h>

#include "linrep/parallel.hpp"
#include "linrep/rng.hpp"

using namespace linrep;

TEST(Rng, DerivedSeedsDependOnWholePath) {
  EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(8, {1, 2}));
  EXPECT_NE(derive_seed(7, {1}), derive_seed(7, {1, 0}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(derive_seed(1, {stream::kTrain, t}));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Rng, ChildStreamsReproduce) {
  Rng a = child_rng(3, {4, 5});
  Rng b = child_rng(3, {4, 5});
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(Parallel, EveryIndexOnceAndErrorsPropagate) {
  std::vector<int> hits(257, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
