#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "triadkit/graph.hpp"

namespace triadkit {

/// Simple undirected projection of one layer as seen through a view:
/// sorted, deduplicated neighbor lists, edge multiplicity and direction dropped.
class Projection {
 public:
  static Projection build(const GraphView& view, EdgeKind kind);

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return nbrs_.size() / 2; }
  std::span<const NodeId> neighbors(NodeId n) const {
    return {nbrs_.data() + offsets_[n], offsets_[n + 1] - offsets_[n]};
  }
  std::size_t degree(NodeId n) const { return offsets_[n + 1] - offsets_[n]; }
  bool adjacent(NodeId u, NodeId v) const;

  /// Edges among the given sorted node set.
  std::uint64_t edges_among(std::span<const NodeId> sorted_nodes) const;
  double local_clustering(NodeId n) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> nbrs_;
};

std::size_t intersection_size(std::span<const NodeId> a, std::span<const NodeId> b);
std::vector<NodeId> intersection(std::span<const NodeId> a, std::span<const NodeId> b);

/// Sorted neighbors of n in the undirected projection of the layer.
std::vector<NodeId> neighbors(const GraphView& view, EdgeKind kind, NodeId n);

/// Throws std::out_of_range for unknown nodes, std::invalid_argument for u == v.
std::size_t mutual_neighbors(const GraphView& view, EdgeKind kind, NodeId u, NodeId v);

/// Local clustering coefficient on the undirected projection; 0 when degree < 2.
double clustering_coefficient(const GraphView& view, EdgeKind kind, NodeId n);

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;  // L1 change between iterations
  int max_iterations = 100;
};

/// Power iteration over all graph nodes with uniform teleport and uniform
/// redistribution of dangling mass. Contact edges count in both directions.
std::vector<double> pagerank(const GraphView& view, EdgeKind kind,
                             const PageRankOptions& options = {});

/// Same, restricted to nodes with active[v] != 0: teleport and dangling
/// mass are spread over active nodes only, edges touching inactive nodes
/// are ignored, and inactive nodes get rank 0.
std::vector<double> pagerank(const GraphView& view, EdgeKind kind, std::span<const char> active,
                             const PageRankOptions& options = {});

struct NetworkStats {
  std::size_t nodes = 0;             // nodes with at least one edge in the layer
  std::size_t edges = 0;             // aggregated edges (directed or undirected)
  std::size_t undirected_pairs = 0;  // distinct unordered pairs
  double avg_degree = 0.0;           // E/N for directed layers, 2E/N for contact
  double avg_clustering = 0.0;
};

NetworkStats network_stats(const TemporalMultigraph& g, EdgeKind kind);

}  // namespace triadkit
