#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"
#include "triadkit/choice.hpp"

namespace triadkit::choice {
namespace {

constexpr Timestamp D = kSecondsPerDay;

TEST(Choice, FractionalRanks) {
  EXPECT_EQ(fractional_ranks(std::vector<double>{10, 20}, false), (std::vector<double>{0, 1}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{10, 20}, true), (std::vector<double>{1, 0}));
  // ties share the average rank: ranks {1, 2.5, 2.5, 4} -> {0, .5, .5, 1}
  EXPECT_EQ(fractional_ranks(std::vector<double>{1, 5, 5, 9}, false),
            (std::vector<double>{0, 0.5, 0.5, 1}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{3, 3, 3}, true), (std::vector<double>{0.5, 0.5, 0.5}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{7}, true), (std::vector<double>{0}));
}

TEST(Choice, HandMetrics) {
  const std::vector<std::vector<std::size_t>> orderings = {{0, 1, 2}, {1, 0}};
  const std::vector<std::vector<char>> truth = {{1, 0, 0}, {1, 0}};
  const auto m = evaluate(orderings, truth);
  EXPECT_EQ(m.overall.n, 2u);
  EXPECT_EQ(m.overall.p_at_1, 0.5);
  EXPECT_EQ(m.overall.mean_rank, 1.5);
  EXPECT_EQ(m.overall.mrr, 0.75);
  EXPECT_EQ(m.per_k.at(3).p_at_1, 1.0);
  EXPECT_EQ(m.per_k.at(2).mean_rank, 2.0);
  // best-ranked of several true sellers
  EXPECT_EQ(true_rank(std::vector<std::size_t>{2, 0, 1}, std::vector<char>{1, 1, 0}), 2u);
}

TEST(Choice, PerfectRankerAndBounds) {
  std::vector<std::size_t> ranks(10, 1), ks(10, 4);
  const auto m = evaluate(ranks, ks);
  EXPECT_EQ(m.overall.p_at_1, 1.0);
  EXPECT_EQ(m.overall.mean_rank, 1.0);
  EXPECT_EQ(m.overall.mrr, 1.0);
}

ExtractedDecision decision_with(std::vector<double> prices, std::vector<double> msgs) {
  ExtractedDecision d;
  d.cluster_id = "c";
  d.prices = prices;
  d.features.resize(prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) {
    d.sellers.push_back("s" + std::to_string(i));
    d.features[i].fill(0);
    d.features[i][kMsgVolume] = msgs.empty() ? 0 : msgs[i];
  }
  d.is_true.assign(prices.size(), 0);
  d.is_true[0] = 1;
  return d;
}

TEST(Choice, Baselines) {
  const auto d = decision_with({5, 9, 7}, {});
  EXPECT_EQ(baseline_rank(Baseline::MinPrice, d, 1), (std::vector<std::size_t>{0, 2, 1}));
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(baseline_rank(Baseline::MostMsg, d, seed), baseline_rank(Baseline::Random, d, seed));
  const auto m = decision_with({5, 9, 7}, {1, 4, 0});
  EXPECT_EQ(baseline_rank(Baseline::MostMsg, m, 3), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Choice, RandomBaselineHitsOneOverK) {
  const auto d = decision_with({1, 1, 1, 1, 1}, {});
  const int trials = 10000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) hits += baseline_rank(Baseline::Random, d, 1000 + t)[0] == 0;
  const double p = double(hits) / trials;
  const double sigma = std::sqrt(0.2 * 0.8 / trials);
  EXPECT_NEAR(p, 0.2, 3 * sigma);
}

TEST(Choice, RankingDependsOnlyOnOrder) {
  std::vector<double> s = {0.3, -1.2, 2.5, 0.0, 0.31};
  std::vector<double> t;
  for (double x : s) t.push_back(std::exp(3 * x) + 7);
  EXPECT_EQ(rank_by_scores(s, 5), rank_by_scores(t, 5));
}

ChoiceRow row(std::string c, std::string b, std::string s, Timestamp t, double price = 10) {
  return {std::move(c), std::move(b), std::move(s), t, price, 98.0, 5, 3, 0};
}

TEST(Choice, BuildDecisionsBounds) {
  GraphBuilder gb(Window{0, 30 * D});
  const auto g = std::move(gb).build();
  std::vector<ChoiceRow> rows = {row("one", "b1", "s1", 3 * D)};
  for (int b = 0; b < 3; ++b) rows.push_back(row("two", "b" + std::to_string(b), b == 1 ? "s2" : "s1", 5 * D));
  rows.push_back(row("two", "x", "s2", 5 * D));
  rows.push_back(row("two", "x", "s1", 5 * D + 100));  // same buyer, same day: one decision
  rows.push_back(row("two", "early", "s1", 100));       // day 0: no prior snapshot
  for (int s = 0; s < 11; ++s) rows.push_back(row("big", "b", "s" + std::to_string(s), 4 * D));
  BuildStats st;
  const auto cl = build_decisions(rows, g, &st);
  ASSERT_EQ(cl.size(), 1u);
  EXPECT_EQ(st.dropped_too_few, 1u);
  EXPECT_EQ(st.dropped_too_many, 1u);
  EXPECT_EQ(st.dropped_first_day, 1u);
  EXPECT_EQ(cl[0].cluster_id, "two");
  ASSERT_EQ(cl[0].decisions.size(), 4u);
  for (const auto& d : cl[0].decisions) EXPECT_EQ(d.is_true.size(), 2u);
  const auto& x = cl[0].decisions.back();
  EXPECT_EQ(x.buyer_id, "x");
  EXPECT_EQ(x.is_true, (std::vector<char>{1, 1}));
  EXPECT_EQ(x.purchase_date, 5 * D);
}

// Buyer b (0), candidate sellers s0 (1) and s1 (2), message partners m0..m2.
TEST(Choice, FeaturesOnPriorDaySnapshot) {
  GraphBuilder gb(Window{0, 20 * D});
  const NodeId b = gb.intern("b"), s0 = gb.intern("s0"), s1 = gb.intern("s1");
  const NodeId m0 = gb.intern("m0"), m1 = gb.intern("m1"), m2 = gb.intern("m2");
  gb.trade(b, s0, 2 * D).trade(b, s0, 3 * D).message(b, s0, 4 * D).message(s0, b, 4 * D + 7);
  gb.contact(b, s0);
  for (NodeId m : {m0, m1, m2}) gb.message(b, m, D).message(m, s0, D);
  gb.message(m0, m1, D);
  // purchase on day 10; everything from day 10 on must be invisible
  gb.trade(b, s1, 10 * D).message(b, s1, 10 * D).message(b, s1, 15 * D);
  const auto g = std::move(gb).build();

  std::vector<ChoiceRow> rows = {row("c", "b", "s1", 10 * D, 20), row("c", "z", "s0", 10 * D, 10)};
  const auto cl = build_decisions(rows, g);
  ASSERT_EQ(cl.size(), 1u);
  const auto& dec = cl[0].decisions[0];
  ASSERT_EQ(dec.buyer_id, "b");
  EXPECT_EQ(feature_cutoff(g, dec.purchase_day), 10 * D - 1);
  const auto f = extract_features(cl[0], dec, g);
  ASSERT_EQ(f.size(), 2u);
  const auto& a = f[0];  // s0
  const auto& c = f[1];  // s1
  EXPECT_EQ(a[0], 0.0);  // cheaper
  EXPECT_EQ(c[0], 1.0);
  EXPECT_EQ(a[6], 2.0);
  EXPECT_EQ(a[7], 2.0);
  EXPECT_EQ(a[8], 1.0);
  EXPECT_DOUBLE_EQ(a[9], (10 * D - 1 - 3 * D) / double(D));
  EXPECT_DOUBLE_EQ(a[10], (10 * D - 1 - (4 * D + 7)) / double(D));
  EXPECT_EQ(a[11], 0.0);
  EXPECT_EQ(a[12], 2.0);
  EXPECT_EQ(a[14], 3.0);
  EXPECT_DOUBLE_EQ(a[18], 1.0 / 3.0);
  EXPECT_GT(a[20], 0.0);
  EXPECT_GT(a[21], 0.0);
  // s1 only becomes active on the purchase day: cold-start defaults.
  EXPECT_EQ(c[6], 0.0);
  EXPECT_EQ(c[7], 0.0);
  EXPECT_EQ(c[8], 0.0);
  EXPECT_EQ(c[9], 20.0);
  EXPECT_EQ(c[10], 20.0);
  EXPECT_EQ(c[11], 1.0);
  EXPECT_EQ(c[13], 0.0);
  EXPECT_EQ(c[20], 0.0);
  EXPECT_EQ(c[21], 0.0);
}

TEST(Choice, CandidateOrderDoesNotChangeFeatures) {
  GraphBuilder gb(Window{0, 20 * D});
  const NodeId b = gb.intern("b");
  std::vector<NodeId> s;
  for (int i = 0; i < 4; ++i) s.push_back(gb.intern("s" + std::to_string(i)));
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k <= i; ++k) gb.message(b, s[i], (1 + k) * D);
  const auto g = std::move(gb).build();
  std::vector<ChoiceRow> rows;
  for (int i = 0; i < 4; ++i) rows.push_back(row("c", i == 2 ? "b" : "o" + std::to_string(i), "s" + std::to_string(i), 8 * D, 10 + i % 2));
  auto rev = rows;
  std::reverse(rev.begin(), rev.end());
  const auto a = extract_features(build_decisions(rows, g), g);
  const auto r = extract_features(build_decisions(rev, g), g);
  ASSERT_EQ(a.size(), r.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].features, r[i].features);
}

std::vector<Group> separable_groups(std::uint64_t seed, std::size_t n, const FeatureVector& w) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> x(0, 1);
  std::vector<Group> gs;
  for (std::size_t i = 0; i < n; ++i) {
    Group g;
    const std::size_t k = 2 + i % 5;
    std::vector<double> score;
    for (std::size_t j = 0; j < k; ++j) {
      FeatureVector f;
      for (auto& v : f) v = x(rng);
      double s = 0;
      for (int t = 0; t < kNumFeatures; ++t) s += w[t] * f[t];
      score.push_back(s);
      g.x.push_back(f);
    }
    const auto best = std::max_element(score.begin(), score.end()) - score.begin();
    // keep a clear margin so a hinge learner can separate every group
    std::vector<double> sorted = score;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] < 0.5) {
      --i;
      continue;
    }
    g.is_true.assign(k, 0);
    g.is_true[best] = 1;
    gs.push_back(std::move(g));
  }
  return gs;
}

FeatureMask all_mask() {
  FeatureMask m;
  m.fill(true);
  return m;
}

TEST(Ranker, SeparableDataTrainsToPerfectPrecision) {
  FeatureVector w{};
  w[0] = 2;
  w[7] = -1;
  w[15] = 0.5;
  const auto groups = separable_groups(3, 300, w);
  const auto model = train_ranker(groups, all_mask(), {.lambda = 1e-6, .epochs = 200});
  std::size_t hits = 0;
  for (const auto& g : groups) {
    std::vector<double> s;
    for (const auto& x : g.x) s.push_back(model.score(x));
    hits += true_rank(rank_by_scores(s, 0), g.is_true) == 1;
  }
  EXPECT_EQ(hits, groups.size());
}

TEST(Ranker, StrongRegularisationShrinksWeights) {
  FeatureVector w{};
  w[3] = 1;
  const auto groups = separable_groups(4, 100, w);
  const auto model = train_ranker(groups, all_mask(), {.lambda = 1e6, .epochs = 5});
  for (double v : model.weights) EXPECT_NEAR(v, 0.0, 1e-4);
}

TEST(Ranker, DuplicatedGroupsGiveIdenticalModel) {
  FeatureVector w{};
  w[1] = 1;
  auto groups = separable_groups(5, 80, w);
  const auto a = train_ranker(groups, all_mask());
  auto doubled = groups;
  doubled.insert(doubled.end(), groups.begin(), groups.end());
  const auto b = train_ranker(doubled, all_mask());
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(train_ranker(groups, all_mask()).weights, a.weights);
}

TEST(Ranker, MaskedFeaturesStayZeroAndEmptySetThrows) {
  FeatureVector w{};
  w[0] = 1;
  const auto groups = separable_groups(6, 50, w);
  const auto& meta = subset_by_name("Only Meta").mask;
  const auto m = train_ranker(groups, meta);
  for (int i = 6; i < kNumFeatures; ++i) EXPECT_EQ(m.weights[i], 0.0);
  std::vector<Group> useless = {Group{{FeatureVector{}, FeatureVector{}}, {1, 1}}};
  EXPECT_THROW(train_ranker(useless, meta), std::invalid_argument);
  EXPECT_THROW(train_ranker({}, meta), std::invalid_argument);
}

TEST(Subsets, NamedMasks) {
  EXPECT_EQ(named_subsets().size(), 8u);
  for (bool b : subset_by_name("All Features").mask) EXPECT_TRUE(b);
  const auto& msgs = subset_by_name("Meta + Msgs").mask;
  int on = 0;
  for (bool b : msgs) on += b;
  EXPECT_EQ(on, 13);
  EXPECT_TRUE(msgs[kMsgVolume]);
  EXPECT_FALSE(msgs[6]);
  const auto& net = subset_by_name("Only Network").mask;
  EXPECT_FALSE(net[5]);
  EXPECT_TRUE(net[6]);
  EXPECT_THROW(subset_by_name("Nope"), std::invalid_argument);
}

TEST(Split, DeterministicRoughlyQuarter) {
  int test = 0;
  for (int i = 0; i < 4000; ++i) {
    const std::string id = "cluster" + std::to_string(i);
    EXPECT_EQ(is_test_cluster(id, 9), is_test_cluster(id, 9));
    test += is_test_cluster(id, 9);
  }
  EXPECT_NEAR(test / 4000.0, 0.25, 0.03);
}

TEST(ChoiceIO, RoundTripAndValidation) {
  testing::TempDir dir;
  std::vector<ChoiceRow> rows = {row("c", "b", "s", 12345, 9.5)};
  std::ostringstream o;
  write_choice_rows(rows, o);
  testing::write_file(dir / "cc.csv", o.str());
  const auto back = load_choice_rows(dir / "cc.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].purchase_date, 12345);
  EXPECT_EQ(back[0].price, 9.5);
  testing::write_file(dir / "bad.csv", o.str() + "c,b,s,1,9,98,1,1,2\n");
  EXPECT_THROW(load_choice_rows(dir / "bad.csv"), ValidationError);
}

}  // namespace
}  // namespace triadkit::choice
