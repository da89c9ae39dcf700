#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "support.hpp"
#include "triadkit/dataset_io.hpp"
#include "triadkit/syngen.hpp"

namespace triadkit::syngen {
namespace {

using testing::TempDir;
using testing::read_file;

SynthConfig small() {
  SynthConfig c;
  c.n_buyers = 400;
  c.n_sellers = 40;
  c.n_trust_clusters = 50;
  c.n_choice_clusters = 20;
  c.p_plant = 0.1;
  return c;
}

TEST(Syngen, SameSeedSameBytes) {
  TempDir a, b;
  write_dataset(generate(small()), a.path());
  write_dataset(generate(small()), b.path());
  for (const char* f : {"events.csv", "contacts.csv", "clusters.csv", "ratings.csv",
                        "choice_clusters.csv", "truth.json"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  auto other = small();
  other.seed = 2;
  TempDir c;
  write_dataset(generate(other), c.path());
  EXPECT_NE(read_file(a / "events.csv"), read_file(c / "events.csv"));
}

TEST(Syngen, OutputPassesIngestion) {
  TempDir d;
  const auto ds = generate(small());
  write_dataset(ds, d.path());
  const auto g = load_dataset(d / "events.csv", d / "contacts.csv", ds.graph.window());
  EXPECT_EQ(g.event_count(EdgeKind::Trade), ds.graph.event_count(EdgeKind::Trade));
  EXPECT_EQ(g.event_count(EdgeKind::Message), ds.graph.event_count(EdgeKind::Message));
  EXPECT_EQ(g.edges(EdgeKind::Contact).size(), ds.graph.edges(EdgeKind::Contact).size());
  EXPECT_GT(ds.planted_trades, 0u);
  // Trades flow buyer -> seller only (default buyer-buyer rate is 0).
  for (const auto& e : g.edges(EdgeKind::Trade)) {
    EXPECT_EQ(g.external_id(e.src)[0], 'b');
    EXPECT_EQ(g.external_id(e.dst)[0], 's');
  }
}

TEST(Syngen, SellerPopularityFollowsExponent) {
  SynthConfig c = small();
  c.n_buyers = 20000;
  c.n_sellers = 2000;
  c.p_plant = 0;
  c.n_choice_clusters = 0;
  c.n_trust_clusters = 0;
  const auto ds = generate(c);
  const auto& g = ds.graph;
  // Empirical share of trades per seller rank against rank^-exponent; KS distance on the CDF.
  std::vector<double> counts(c.n_sellers, 0.0);
  for (const auto& e : g.events())
    if (e.kind == EdgeKind::Trade) {
      const auto& id = g.external_id(e.dst);
      counts[std::stoul(id.substr(1))] += 1;
    }
  double total = 0, expected_total = 0;
  for (double x : counts) total += x;
  for (std::size_t k = 1; k <= c.n_sellers; ++k) expected_total += std::pow(double(k), -c.seller_exponent);
  double emp = 0, exp = 0, ks = 0;
  for (std::size_t k = 0; k < c.n_sellers; ++k) {
    emp += counts[k] / total;
    exp += std::pow(double(k + 1), -c.seller_exponent) / expected_total;
    ks = std::max(ks, std::abs(emp - exp));
  }
  EXPECT_LT(ks, 0.1);
}

TEST(Syngen, ConfigParsing) {
  const auto c = parse_config(
      "# comment\nseed = 7\nn_buyers=100\np_plant=0.25\nplant_mode=linear\n"
      "category_p_plant=1:0.5,3:0\nchoice_weights=8:1.5,1:-2\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.n_buyers, 100u);
  EXPECT_EQ(c.p_plant, 0.25);
  EXPECT_EQ(c.plant_mode, PlantMode::Linear);
  EXPECT_EQ(c.category_p_plant.at(1), 0.5);
  EXPECT_EQ(c.choice_weights[7], 1.5);
  EXPECT_EQ(c.choice_weights[0], -2.0);
  EXPECT_EQ(c.choice_weights[11], 0.0);
  const auto back = parse_config(to_config_text(c));
  EXPECT_EQ(to_config_text(back), to_config_text(c));

  try {
    parse_config("seed=1\nbogus=3\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_config("p_plant\n"), ValidationError);
  EXPECT_THROW(parse_config("n_buyers=abc\n"), ValidationError);
}

TEST(Syngen, RejectsInfeasibleConfigs) {
  auto c = small();
  c.p_plant = 1.5;
  EXPECT_THROW(validate(c), ValidationError);
  c = small();
  c.base_message_rate = 0;
  c.p_plant = 0.1;
  EXPECT_THROW(validate(c), ValidationError);
  c = small();
  c.n_sellers = 1;
  EXPECT_THROW(generate(c), ValidationError);
}

}  // namespace
}  // namespace triadkit::syngen
