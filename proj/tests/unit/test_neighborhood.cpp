#include <gtest/gtest.h>

#include "ctrex/experiment.hpp"
#include "ctrex/neighborhood.hpp"
#include "ctrex/synthetic.hpp"
#include "oracles.hpp"

using namespace ctrex;

namespace {

struct World {
  Dataset pool = make_blobs(500, 21);
  MlpModel model = train_model(pool, ModelKind::kLogistic, 2);
  VaeModel vae = train_default_vae(pool, 3);
};

const World& world() {
  static const World w;
  return w;
}

}  // namespace

TEST(Neighborhood, MatchesBruteForcePerClass) {
  const auto& w = world();
  std::vector<int> labels;
  for (const auto& r : w.pool.rows()) labels.push_back(w.model.predict_label(r));
  const auto test = make_blobs(40, 99);
  for (std::size_t a = 0; a < 20; ++a) {
    const auto& x = test.row(a);
    const auto set = sample_neighbors(x, w.pool, w.model, w.vae, 60);
    const int fact = w.model.predict_label(x);
    const auto want_fact = oracle::knn_by_label(x, w.pool, labels, fact, w.vae, 30);
    const auto want_contrast = oracle::knn_by_label(x, w.pool, labels, 1 - fact, w.vae, 30);
    std::vector<std::size_t> got_fact, got_contrast;
    for (const auto& m : set.members) (m.label == fact ? got_fact : got_contrast).push_back(m.pool_index);
    std::sort(got_fact.begin(), got_fact.end());
    std::sort(got_contrast.begin(), got_contrast.end());
    auto sorted = [](std::vector<std::size_t> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    EXPECT_EQ(got_fact, sorted(want_fact)) << "anchor " << a;
    EXPECT_EQ(got_contrast, sorted(want_contrast)) << "anchor " << a;
  }
}

TEST(Neighborhood, BalancedAndOrderedByDistance) {
  const auto& w = world();
  const auto set = sample_neighbors(w.pool.row(0), w.pool, w.model, w.vae, 100);
  EXPECT_EQ(set.fact_count, 50u);
  EXPECT_EQ(set.contrast_count, 50u);
  EXPECT_FALSE(set.has_shortfall());
  for (std::size_t i = 1; i < set.members.size(); ++i) {
    const auto& p = set.members[i - 1];
    const auto& q = set.members[i];
    EXPECT_TRUE(p.distance < q.distance || (p.distance == q.distance && p.pool_index < q.pool_index));
  }
  // The anchor itself is never its own neighbor.
  for (const auto& m : set.members) EXPECT_FALSE(m.instance == w.pool.row(0));
}

TEST(Neighborhood, ExhaustivePoolAndShortfall) {
  const auto& w = world();
  std::vector<std::size_t> pick;
  std::vector<int> labels;
  for (std::size_t i = 0; i < w.pool.size() && pick.size() < 4; ++i) {
    const int y = w.model.predict_label(w.pool.row(i));
    if (std::count(labels.begin(), labels.end(), y) < 2) {
      pick.push_back(i);
      labels.push_back(y);
    }
  }
  const auto tiny = w.pool.subset(pick);
  const auto x = make_blobs(3, 5).row(0);
  const auto all = sample_neighbors(x, tiny, w.model, w.vae, 4);
  EXPECT_EQ(all.size(), 4u);
  EXPECT_EQ(all.fact_count, 2u);
  const auto more = sample_neighbors(x, tiny, w.model, w.vae, 10);
  EXPECT_EQ(more.size(), 4u);
  EXPECT_TRUE(more.has_shortfall());
  EXPECT_EQ(more.fact_shortfall, 3u);
}

TEST(Neighborhood, NoContrastInPoolIsAnError) {
  const auto& w = world();
  std::vector<std::size_t> ones;
  for (std::size_t i = 0; i < w.pool.size(); ++i) {
    if (w.model.predict_label(w.pool.row(i)) == 1) ones.push_back(i);
  }
  const auto only = w.pool.subset(ones);
  EXPECT_THROW(sample_neighbors(only.row(0), only, w.model, w.vae, 10), NoContrastError);
}

TEST(Neighborhood, RejectsOddOrTinyK) {
  const auto& w = world();
  EXPECT_ANY_THROW(sample_neighbors(w.pool.row(0), w.pool, w.model, w.vae, 7));
  EXPECT_ANY_THROW(sample_neighbors(w.pool.row(0), w.pool, w.model, w.vae, 0));
}

TEST(Neighborhood, ResolveContrast) {
  EXPECT_EQ(resolve_contrast(2, 0, std::nullopt), 1);
  EXPECT_EQ(resolve_contrast(2, 1, std::nullopt), 0);
  EXPECT_EQ(resolve_contrast(3, 0, 2), 2);
  EXPECT_THROW(resolve_contrast(3, 0, std::nullopt), ModelError);
  EXPECT_THROW(resolve_contrast(2, 0, 5), ModelError);
  EXPECT_THROW(resolve_contrast(2, 0, 0), NoContrastError);
}
