#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "support.hpp"
#include "triadkit/analytics.hpp"
#include "triadkit/dataset_io.hpp"

namespace triadkit {
namespace {

using testing::RandomGraphShape;
using testing::TempDir;
using testing::random_graph;
using testing::write_file;

// Dense adjacency of the undirected projection, straight from the edge list.
std::vector<std::vector<char>> dense_undirected(const TemporalMultigraph& g, EdgeKind k,
                                                Timestamp cutoff) {
  const auto n = g.num_nodes();
  std::vector<std::vector<char>> a(n, std::vector<char>(n, 0));
  for (const auto& e : g.edges(k)) {
    if (k != EdgeKind::Contact) {
      auto ts = g.times_of(e);
      if (ts.empty() || ts.front() > cutoff) continue;
    }
    a[e.src][e.dst] = a[e.dst][e.src] = 1;
  }
  return a;
}

// Solves (I - d P^T - d/n 1 dangling^T) r = (1 - d)/n by Gaussian elimination.
std::vector<double> dense_pagerank(const TemporalMultigraph& g, EdgeKind k, double d) {
  const auto n = g.num_nodes();
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges(k)) {
    adj[e.src][e.dst] += 1;
    if (k == EdgeKind::Contact) adj[e.dst][e.src] += 1;
  }
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = 1.0;
    m[i][n] = (1.0 - d) / static_cast<double>(n);
  }
  for (std::size_t u = 0; u < n; ++u) {
    double out = 0;
    for (std::size_t v = 0; v < n; ++v) out += adj[u][v];
    for (std::size_t v = 0; v < n; ++v) {
      const double p = out > 0 ? adj[u][v] / out : 1.0 / static_cast<double>(n);
      m[v][u] -= d * p;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j <= n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = m[i][n] / m[i][i];
  return r;
}

TEST(GraphBuild, AggregatesEventsPerOrderedPair) {
  GraphBuilder b(Window{0, 1000});
  b.trade(0, 1, 30).trade(0, 1, 10).message(1, 0, 20).message(0, 1, 5).contact(2, 1).contact(1, 2);
  const auto g = std::move(b).build();
  EXPECT_EQ(g.num_nodes(), 3u);
  ASSERT_EQ(g.edges(EdgeKind::Trade).size(), 1u);
  const auto& t = g.edges(EdgeKind::Trade)[0];
  EXPECT_EQ(t.event_count(), 2u);
  EXPECT_EQ(t.first_time, 10);
  auto ts = g.times_of(t);
  EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end()));
  EXPECT_EQ(g.edges(EdgeKind::Message).size(), 2u);
  ASSERT_EQ(g.edges(EdgeKind::Contact).size(), 1u);
  EXPECT_EQ(g.edges(EdgeKind::Contact)[0].src, 1u);
  EXPECT_EQ(g.edges(EdgeKind::Contact)[0].dst, 2u);
  EXPECT_TRUE(g.find_edge(EdgeKind::Contact, 2, 1).has_value());
  EXPECT_FALSE(g.find_edge(EdgeKind::Trade, 1, 0).has_value());
}

TEST(GraphBuild, RejectsInvalidInput) {
  EXPECT_THROW(std::move(GraphBuilder(Window{0, 10}).message(1, 1, 5)).build(), ValidationError);
  EXPECT_THROW(std::move(GraphBuilder(Window{0, 10}).message(0, 1, 11)).build(), ValidationError);
  EXPECT_THROW(std::move(GraphBuilder(Window{0, 10}).trade(0, 1, 5, -1.0)).build(), ValidationError);
  EXPECT_THROW(std::move(GraphBuilder(Window{0, 10}).contact(3, 3)).build(), ValidationError);
  EXPECT_THROW(std::move(GraphBuilder(Window{10, 0})).build(), ValidationError);
}

TEST(GraphView, HidesEventsAfterCutoff) {
  GraphBuilder b(Window{0, 100});
  b.message(0, 1, 10).message(0, 1, 50).message(1, 2, 60).contact(0, 2);
  const auto g = std::move(b).build();
  const auto v = snapshot_at(g, 40);
  const auto* e = v.find_edge(EdgeKind::Message, 0, 1);
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(v.event_count(*e), 1u);
  EXPECT_EQ(v.last_event_time(*e), 10);
  EXPECT_EQ(v.find_edge(EdgeKind::Message, 1, 2), nullptr);
  EXPECT_NE(v.find_edge(EdgeKind::Contact, 2, 0), nullptr);
  EXPECT_THROW(snapshot_at(g, 101), std::out_of_range);
}

TEST(Analytics, MutualNeighborsAndClusteringMatchDenseOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_graph(RandomGraphShape{}, seed);
    const Timestamp cutoff = g.window().start + g.window().length() / 2;
    const GraphView view(g, cutoff);
    for (EdgeKind k : kAllKinds) {
      const auto a = dense_undirected(g, k, cutoff);
      const auto n = g.num_nodes();
      const auto proj = Projection::build(view, k);
      for (NodeId u = 0; u < n; ++u) {
        std::vector<NodeId> nb;
        for (NodeId v = 0; v < n; ++v)
          if (a[u][v]) nb.push_back(v);
        ASSERT_EQ(neighbors(view, k, u), nb);
        std::size_t links = 0;
        for (std::size_t i = 0; i < nb.size(); ++i)
          for (std::size_t j = i + 1; j < nb.size(); ++j) links += a[nb[i]][nb[j]];
        const double cc = nb.size() < 2 ? 0.0 : 2.0 * links / (nb.size() * (nb.size() - 1.0));
        EXPECT_DOUBLE_EQ(clustering_coefficient(view, k, u), cc);
        EXPECT_DOUBLE_EQ(proj.local_clustering(u), cc);
        for (NodeId v = u + 1; v < n; v += 3) {
          std::size_t mutual = 0;
          for (NodeId w = 0; w < n; ++w) mutual += a[u][w] && a[v][w];
          EXPECT_EQ(mutual_neighbors(view, k, u, v), mutual);
        }
      }
    }
  }
}

TEST(Analytics, MutualNeighborsErrors) {
  const auto g = random_graph(RandomGraphShape{}, 3);
  const auto v = full_view(g);
  EXPECT_THROW(mutual_neighbors(v, EdgeKind::Message, 2, 2), std::invalid_argument);
  EXPECT_THROW(mutual_neighbors(v, EdgeKind::Message, 0, 9999), std::out_of_range);
}

TEST(Analytics, PageRankMatchesLinearSolve) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomGraphShape shape;
    shape.nodes = 30;
    shape.events = 120;
    const auto g = random_graph(shape, seed);
    for (EdgeKind k : kAllKinds) {
      PageRankOptions opt;
      opt.tol = 1e-14;
      opt.max_iterations = 1000;
      const auto pr = pagerank(full_view(g), k, opt);
      const auto oracle = dense_pagerank(g, k, opt.damping);
      double sum = 0;
      for (std::size_t i = 0; i < pr.size(); ++i) {
        EXPECT_NEAR(pr[i], oracle[i], 1e-8) << "node " << i;
        EXPECT_GT(pr[i], 0.0);
        sum += pr[i];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Analytics, NetworkStatsByHand) {
  GraphBuilder b(Window{0, 100});
  b.trade(0, 1, 1).trade(0, 1, 2).trade(1, 0, 3).trade(2, 1, 4);
  b.message(0, 1, 1).message(1, 2, 1).message(2, 0, 1);
  b.contact(0, 1).contact(1, 2);
  b.reserve_nodes(5);
  const auto g = std::move(b).build();
  const auto t = network_stats(g, EdgeKind::Trade);
  EXPECT_EQ(t.nodes, 3u);
  EXPECT_EQ(t.edges, 3u);
  EXPECT_EQ(t.undirected_pairs, 2u);
  EXPECT_DOUBLE_EQ(t.avg_degree, 1.0);
  EXPECT_DOUBLE_EQ(t.avg_clustering, 0.0);
  const auto m = network_stats(g, EdgeKind::Message);
  EXPECT_DOUBLE_EQ(m.avg_clustering, 1.0);
  const auto c = network_stats(g, EdgeKind::Contact);
  EXPECT_EQ(c.edges, 2u);
  EXPECT_DOUBLE_EQ(c.avg_degree, 4.0 / 3.0);
}

TEST(Analytics, EmptyGraphStatsAreZero) {
  const auto g = GraphBuilder(Window{0, 0}).build();
  for (EdgeKind k : kAllKinds) {
    const auto s = network_stats(g, k);
    EXPECT_EQ(s.nodes, 0u);
    EXPECT_EQ(s.edges, 0u);
    EXPECT_EQ(s.avg_degree, 0.0);
  }
  EXPECT_TRUE(pagerank(full_view(g), EdgeKind::Trade).empty());
}

const char* kEventsHeader = "kind,src,dst,timestamp,product_id,category_id,price,quantity\n";

TEST(DatasetIO, RoundTripsThroughCsv) {
  TempDir dir;
  write_file(dir / "e.csv", std::string(kEventsHeader) +
                                "trade,alice,shop,100,p1,3,12.5,2\n"
                                "message,alice,bob,90,,,,\n"
                                "message,bob,alice,150,,,,\n");
  write_file(dir / "c.csv", "u,v\nbob,alice\nalice,bob\ncarol,alice\n");
  const auto g = load_dataset(dir / "e.csv", dir / "c.csv");
  EXPECT_EQ(g.num_nodes(), 4u);
  EXPECT_EQ(g.window(), (Window{90, 150}));
  EXPECT_EQ(g.edges(EdgeKind::Contact).size(), 2u);
  EXPECT_EQ(*g.find_node("alice"), 0u);
  const auto& tr = g.events_of(g.edges(EdgeKind::Trade)[0])[0];
  EXPECT_EQ(tr.trade.product_id, "p1");
  EXPECT_EQ(tr.trade.category_id, 3);
  EXPECT_EQ(tr.trade.price, 12.5);
  EXPECT_EQ(tr.trade.quantity, 2);

  std::ostringstream ev, ct, ids;
  write_events_csv(g, ev);
  write_contacts_csv(g, ct);
  write_id_map(g, ids);
  write_file(dir / "e2.csv", ev.str());
  write_file(dir / "c2.csv", ct.str());
  const auto g2 = load_dataset(dir / "e2.csv", dir / "c2.csv", g.window());
  std::ostringstream ev2;
  write_events_csv(g2, ev2);
  EXPECT_EQ(ev.str(), ev2.str());
  EXPECT_EQ(ids.str().substr(0, 25), "external_id,internal_id\na");
}

TEST(DatasetIO, ReportsOffendingLine) {
  TempDir dir;
  write_file(dir / "c.csv", "u,v\n");
  auto expect_line = [&](const std::string& body, std::size_t line) {
    write_file(dir / "e.csv", std::string(kEventsHeader) + body);
    try {
      load_dataset(dir / "e.csv", dir / "c.csv");
      ADD_FAILURE() << "no error for: " << body;
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  expect_line("message,a,b,1,,,,\nbogus,a,b,2,,,,\n", 3);
  expect_line("message,a,a,1,,,,\n", 2);
  expect_line("trade,a,b,1,p,0,-3,1\n", 2);
  expect_line("trade,a,b,1,p,0,3,0\n", 2);
  expect_line("message,a,b,1,p,,,\n", 2);
  expect_line("message,a,b,notatime,,,,\n", 2);
  expect_line("message,a,b,1\n", 2);

  write_file(dir / "e.csv", std::string(kEventsHeader) + "message,a,b,500,,,,\n");
  EXPECT_THROW(load_dataset(dir / "e.csv", dir / "c.csv", Window{0, 100}), ValidationError);
  write_file(dir / "e.csv", "kind,src\n");
  EXPECT_THROW(load_dataset(dir / "e.csv", dir / "c.csv"), ValidationError);
  EXPECT_THROW(load_dataset(dir / "missing.csv", dir / "c.csv"), ValidationError);
}

TEST(DatasetIO, EmptyFilesGiveEmptyGraph) {
  TempDir dir;
  write_file(dir / "e.csv", "");
  write_file(dir / "c.csv", "");
  const auto g = load_dataset(dir / "e.csv", dir / "c.csv");
  EXPECT_EQ(g.num_nodes(), 0u);
}

}  // namespace
}  // namespace triadkit
