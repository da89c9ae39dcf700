#include "triadkit/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace triadkit {

Projection Projection::build(const GraphView& view, EdgeKind kind) {
  const auto& g = view.graph();
  const std::size_t n = g.num_nodes();
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& e : g.edges(kind)) {
    if (!view.visible(e)) continue;
    pairs.emplace_back(e.src, e.dst);
    pairs.emplace_back(e.dst, e.src);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  Projection p;
  p.offsets_.assign(n + 1, 0);
  for (const auto& pr : pairs) ++p.offsets_[pr.first + 1];
  std::partial_sum(p.offsets_.begin(), p.offsets_.end(), p.offsets_.begin());
  p.nbrs_.reserve(pairs.size());
  for (const auto& pr : pairs) p.nbrs_.push_back(pr.second);
  return p;
}

bool Projection::adjacent(NodeId u, NodeId v) const {
  auto a = neighbors(u);
  return std::binary_search(a.begin(), a.end(), v);
}

std::uint64_t Projection::edges_among(std::span<const NodeId> sorted_nodes) const {
  std::uint64_t twice = 0;
  for (NodeId a : sorted_nodes) twice += intersection_size(neighbors(a), sorted_nodes);
  return twice / 2;
}

double Projection::local_clustering(NodeId n) const {
  const auto nb = neighbors(n);
  const double k = static_cast<double>(nb.size());
  if (nb.size() < 2) return 0.0;
  return static_cast<double>(edges_among(nb)) / (k * (k - 1.0) / 2.0);
}

std::size_t intersection_size(std::span<const NodeId> a, std::span<const NodeId> b) {
  if (a.size() > b.size()) std::swap(a, b);
  std::size_t count = 0;
  if (a.size() * 16 < b.size()) {
    for (NodeId x : a) count += std::binary_search(b.begin(), b.end(), x) ? 1 : 0;
    return count;
  }
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else { ++count; ++i; ++j; }
  }
  return count;
}

std::vector<NodeId> intersection(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<NodeId> neighbors(const GraphView& view, EdgeKind kind, NodeId n) {
  const auto& g = view.graph();
  if (n >= g.num_nodes()) throw std::out_of_range("unknown node");
  std::vector<NodeId> out;
  for (auto idx : g.out_edges(kind, n)) {
    const auto& e = g.edge(kind, idx);
    if (view.visible(e)) out.push_back(e.other(n));
  }
  if (is_directed(kind)) {
    for (auto idx : g.in_edges(kind, n)) {
      const auto& e = g.edge(kind, idx);
      if (view.visible(e)) out.push_back(e.other(n));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t mutual_neighbors(const GraphView& view, EdgeKind kind, NodeId u, NodeId v) {
  if (u == v) throw std::invalid_argument("mutual_neighbors requires distinct nodes");
  const auto nu = neighbors(view, kind, u);
  const auto nv = neighbors(view, kind, v);
  return intersection_size(nu, nv);
}

double clustering_coefficient(const GraphView& view, EdgeKind kind, NodeId n) {
  const auto nb = neighbors(view, kind, n);
  if (nb.size() < 2) return 0.0;
  std::uint64_t twice = 0;
  for (NodeId a : nb) twice += intersection_size(neighbors(view, kind, a), nb);
  const double k = static_cast<double>(nb.size());
  return static_cast<double>(twice / 2) / (k * (k - 1.0) / 2.0);
}

std::vector<double> pagerank(const GraphView& view, EdgeKind kind,
                             const PageRankOptions& options) {
  const std::vector<char> all(view.graph().num_nodes(), 1);
  return pagerank(view, kind, all, options);
}

std::vector<double> pagerank(const GraphView& view, EdgeKind kind, std::span<const char> active,
                             const PageRankOptions& options) {
  const auto& g = view.graph();
  const std::size_t n = g.num_nodes();
  if (active.size() != n) throw std::invalid_argument("active mask size mismatch");
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < n; ++v)
    if (active[v]) nodes.push_back(v);
  std::vector<double> rank(n, 0.0);
  if (nodes.empty()) return rank;

  // Pull formulation over visible edges: in-lists with source out-degrees.
  std::vector<std::vector<NodeId>> in_nbrs(n);
  std::vector<std::uint32_t> out_degree(n, 0);
  for (const auto& e : g.edges(kind)) {
    if (!view.visible(e) || !active[e.src] || !active[e.dst]) continue;
    in_nbrs[e.dst].push_back(e.src);
    ++out_degree[e.src];
    if (!is_directed(kind)) {
      in_nbrs[e.src].push_back(e.dst);
      ++out_degree[e.dst];
    }
  }

  const double d = options.damping;
  const double inv_n = 1.0 / static_cast<double>(nodes.size());
  std::vector<double> next(n, 0.0);
  for (NodeId v : nodes) rank[v] = inv_n;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double dangling = 0.0;
    for (NodeId v : nodes)
      if (out_degree[v] == 0) dangling += rank[v];
    const double base = (1.0 - d) * inv_n + d * dangling * inv_n;
    double total = 0.0;
    for (NodeId v : nodes) {
      double acc = 0.0;
      for (NodeId u : in_nbrs[v]) acc += rank[u] / out_degree[u];
      next[v] = base + d * acc;
      total += next[v];
    }
    double delta = 0.0;
    for (NodeId v : nodes) {
      next[v] /= total;
      delta += std::abs(next[v] - rank[v]);
    }
    rank.swap(next);
    if (delta < options.tol) break;
  }
  return rank;
}

NetworkStats network_stats(const TemporalMultigraph& g, EdgeKind kind) {
  NetworkStats s;
  const auto view = full_view(g);
  const auto proj = Projection::build(view, kind);
  s.edges = g.edges(kind).size();
  s.undirected_pairs = proj.num_edges();
  double cc_sum = 0.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (proj.degree(v) == 0) continue;
    ++s.nodes;
    cc_sum += proj.local_clustering(v);
  }
  if (s.nodes > 0) {
    const double per = is_directed(kind) ? 1.0 : 2.0;
    s.avg_degree = per * static_cast<double>(s.edges) / static_cast<double>(s.nodes);
    s.avg_clustering = cc_sum / static_cast<double>(s.nodes);
  }
  return s;
}

}  // namespace triadkit
