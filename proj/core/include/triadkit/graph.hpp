#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "triadkit/types.hpp"

namespace triadkit {

struct TradeInfo {
  std::string product_id;
  std::int32_t category_id = 0;
  double price = 0.0;  // CNY
  std::int32_t quantity = 1;
};

/// One timestamped trade or message. Trade events flow buyer -> seller.
struct EdgeEvent {
  EdgeKind kind = EdgeKind::Message;
  NodeId src = 0;
  NodeId dst = 0;
  Timestamp time = 0;
  TradeInfo trade;  // meaningful for Trade only
};

/// All events of one kind between one ordered pair (or an unordered contact).
/// Events live in the owning graph, in [event_begin, event_end), sorted by time.
struct AggregatedEdge {
  EdgeKind kind = EdgeKind::Message;
  NodeId src = 0;  // contact: min endpoint
  NodeId dst = 0;  // contact: max endpoint
  std::uint32_t event_begin = 0;
  std::uint32_t event_end = 0;
  Timestamp first_time = 0;  // unused for Contact

  std::uint32_t event_count() const { return event_end - event_begin; }
  NodeId other(NodeId n) const { return n == src ? dst : src; }
};

using ContactPair = std::pair<NodeId, NodeId>;

/// Immutable three-layer temporal multigraph. Trade and message layers hold
/// directed aggregated edges; the contact layer holds undirected, timeless
/// edges. All queries are const and safe to share across threads.
class TemporalMultigraph {
 public:
  TemporalMultigraph() = default;

  /// Validates and aggregates. Throws ValidationError on self loops,
  /// out-of-range ids, out-of-window timestamps, or malformed trades.
  static TemporalMultigraph build(std::size_t num_nodes, Window window,
                                  std::vector<EdgeEvent> events,
                                  std::vector<ContactPair> contacts,
                                  std::vector<std::string> external_ids = {});

  std::size_t num_nodes() const { return num_nodes_; }
  const Window& window() const { return window_; }

  std::span<const AggregatedEdge> edges(EdgeKind kind) const {
    return layer(kind).edges;
  }
  const AggregatedEdge& edge(EdgeKind kind, std::uint32_t index) const {
    return layer(kind).edges[index];
  }

  /// Edge indices leaving n (directed layers) or incident to n (contact).
  std::span<const std::uint32_t> out_edges(EdgeKind kind, NodeId n) const;
  /// Edge indices entering n (directed layers) or incident to n (contact).
  std::span<const std::uint32_t> in_edges(EdgeKind kind, NodeId n) const;

  /// Lookup of the aggregated edge src->dst; contact lookups are unordered.
  std::optional<std::uint32_t> find_edge(EdgeKind kind, NodeId src, NodeId dst) const;

  std::span<const EdgeEvent> events_of(const AggregatedEdge& e) const {
    return {events_.data() + e.event_begin, e.event_count()};
  }
  std::span<const Timestamp> times_of(const AggregatedEdge& e) const {
    return {times_.data() + e.event_begin, e.event_count()};
  }
  /// All events, grouped by (kind, src, dst) and time-sorted within a group.
  std::span<const EdgeEvent> events() const { return events_; }
  std::size_t event_count(EdgeKind kind) const;

  std::vector<ContactPair> contact_pairs() const;

  const std::string& external_id(NodeId n) const { return external_ids_[n]; }
  std::span<const std::string> external_ids() const { return external_ids_; }
  std::optional<NodeId> find_node(std::string_view external) const;

 private:
  struct Layer {
    std::vector<AggregatedEdge> edges;
    std::vector<std::uint32_t> out_offsets, out_index;
    std::vector<std::uint32_t> in_offsets, in_index;
  };

  const Layer& layer(EdgeKind k) const { return layers_[static_cast<int>(k)]; }

  std::size_t num_nodes_ = 0;
  Window window_{};
  std::vector<EdgeEvent> events_;
  std::vector<Timestamp> times_;
  Layer layers_[3];
  std::vector<std::string> external_ids_;
  std::unordered_map<std::string, NodeId> id_lookup_;
};

/// Incremental construction helper used by loaders, generators and tests.
/// Nodes are either interned by external id or addressed directly by index.
class GraphBuilder {
 public:
  explicit GraphBuilder(Window window) : window_(window) {}

  NodeId intern(std::string_view external);

  GraphBuilder& trade(NodeId buyer, NodeId seller, Timestamp t, double price = 1.0,
                      std::int32_t category = 0, std::string product = "p0",
                      std::int32_t quantity = 1);
  GraphBuilder& message(NodeId src, NodeId dst, Timestamp t);
  GraphBuilder& contact(NodeId u, NodeId v);
  GraphBuilder& event(EdgeEvent e);
  /// Makes nodes [0, n) exist even without edges.
  GraphBuilder& reserve_nodes(std::size_t n);

  TemporalMultigraph build() &&;

 private:
  void touch(NodeId n);

  Window window_;
  std::size_t num_nodes_ = 0;
  std::vector<EdgeEvent> events_;
  std::vector<ContactPair> contacts_;
  std::vector<std::string> external_ids_;
  std::unordered_map<std::string, NodeId> interned_;
};

/// Read-only view hiding every event with timestamp > cutoff. Contact edges
/// are always visible. The view borrows the graph, which must outlive it.
class GraphView {
 public:
  GraphView(const TemporalMultigraph& g, Timestamp cutoff) : g_(&g), cutoff_(cutoff) {}

  const TemporalMultigraph& graph() const { return *g_; }
  Timestamp cutoff() const { return cutoff_; }

  bool visible(const AggregatedEdge& e) const {
    return e.kind == EdgeKind::Contact || e.first_time <= cutoff_;
  }
  /// Visible prefix of the edge's events.
  std::span<const EdgeEvent> events_of(const AggregatedEdge& e) const;
  std::size_t event_count(const AggregatedEdge& e) const;
  std::optional<Timestamp> last_event_time(const AggregatedEdge& e) const;

  /// Visible edge src->dst (contact: unordered), if any.
  const AggregatedEdge* find_edge(EdgeKind kind, NodeId src, NodeId dst) const;

 private:
  const TemporalMultigraph* g_;
  Timestamp cutoff_;
};

/// Throws std::out_of_range when the cutoff lies outside the window.
GraphView snapshot_at(const TemporalMultigraph& g, Timestamp cutoff);

inline GraphView full_view(const TemporalMultigraph& g) {
  return GraphView(g, g.window().end);
}

}  // namespace triadkit
