#include "triadkit/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace triadkit {

EdgeKind parse_edge_kind(std::string_view s) {
  if (s == "trade") return EdgeKind::Trade;
  if (s == "message") return EdgeKind::Message;
  if (s == "contact") return EdgeKind::Contact;
  throw std::invalid_argument("unknown edge kind: " + std::string(s));
}

namespace {

// CSR over edge indices keyed by one endpoint.
void build_index(std::size_t n, const std::vector<AggregatedEdge>& edges, bool by_src,
                 bool both, std::vector<std::uint32_t>& offsets,
                 std::vector<std::uint32_t>& index) {
  offsets.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++offsets[(by_src ? e.src : e.dst) + 1];
    if (both) ++offsets[(by_src ? e.dst : e.src) + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  index.resize(offsets.back());
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::uint32_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    index[cursor[by_src ? e.src : e.dst]++] = i;
    if (both) index[cursor[by_src ? e.dst : e.src]++] = i;
  }
  // Order each row by the opposite endpoint so lookups can binary search.
  for (std::size_t u = 0; u < n; ++u) {
    auto first = index.begin() + offsets[u];
    auto last = index.begin() + offsets[u + 1];
    std::sort(first, last, [&](std::uint32_t a, std::uint32_t b) {
      const NodeId oa = edges[a].other(static_cast<NodeId>(u));
      const NodeId ob = edges[b].other(static_cast<NodeId>(u));
      return oa != ob ? oa < ob : a < b;
    });
  }
}

}  // namespace

TemporalMultigraph TemporalMultigraph::build(std::size_t num_nodes, Window window,
                                             std::vector<EdgeEvent> events,
                                             std::vector<ContactPair> contacts,
                                             std::vector<std::string> external_ids) {
  if (window.end < window.start) throw ValidationError("window end precedes start");
  if (num_nodes >= static_cast<std::size_t>(kNoNode))
    throw ValidationError("too many nodes");

  for (const auto& e : events) {
    if (e.kind == EdgeKind::Contact) throw ValidationError("contact rows cannot be events");
    if (e.src >= num_nodes || e.dst >= num_nodes) throw ValidationError("event node id out of range");
    if (e.src == e.dst) throw ValidationError("self-loop event");
    if (!window.contains(e.time)) throw ValidationError("event timestamp outside window");
    if (e.kind == EdgeKind::Trade) {
      if (!(e.trade.price > 0.0)) throw ValidationError("trade price must be > 0");
      if (e.trade.quantity < 1) throw ValidationError("trade quantity must be >= 1");
    }
  }
  for (auto& [u, v] : contacts) {
    if (u >= num_nodes || v >= num_nodes) throw ValidationError("contact node id out of range");
    if (u == v) throw ValidationError("self-loop contact");
    if (u > v) std::swap(u, v);
  }
  std::sort(contacts.begin(), contacts.end());
  contacts.erase(std::unique(contacts.begin(), contacts.end()), contacts.end());

  if (!external_ids.empty() && external_ids.size() != num_nodes)
    throw ValidationError("external id table size mismatch");
  if (external_ids.empty()) {
    external_ids.reserve(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) external_ids.push_back(std::to_string(i));
  }

  std::stable_sort(events.begin(), events.end(), [](const EdgeEvent& a, const EdgeEvent& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    return a.time < b.time;
  });
  if (events.size() > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("too many events");

  TemporalMultigraph g;
  g.num_nodes_ = num_nodes;
  g.window_ = window;
  g.times_.reserve(events.size());
  for (const auto& e : events) g.times_.push_back(e.time);

  for (std::uint32_t i = 0; i < events.size();) {
    std::uint32_t j = i;
    while (j < events.size() && events[j].kind == events[i].kind &&
           events[j].src == events[i].src && events[j].dst == events[i].dst)
      ++j;
    AggregatedEdge agg;
    agg.kind = events[i].kind;
    agg.src = events[i].src;
    agg.dst = events[i].dst;
    agg.event_begin = i;
    agg.event_end = j;
    agg.first_time = events[i].time;
    g.layers_[static_cast<int>(agg.kind)].edges.push_back(agg);
    i = j;
  }
  auto& contact_layer = g.layers_[static_cast<int>(EdgeKind::Contact)];
  contact_layer.edges.reserve(contacts.size());
  for (const auto& [u, v] : contacts) {
    AggregatedEdge agg;
    agg.kind = EdgeKind::Contact;
    agg.src = u;
    agg.dst = v;
    contact_layer.edges.push_back(agg);
  }
  g.events_ = std::move(events);

  for (EdgeKind k : {EdgeKind::Trade, EdgeKind::Message}) {
    auto& L = g.layers_[static_cast<int>(k)];
    build_index(num_nodes, L.edges, true, false, L.out_offsets, L.out_index);
    build_index(num_nodes, L.edges, false, false, L.in_offsets, L.in_index);
  }
  build_index(num_nodes, contact_layer.edges, true, true, contact_layer.out_offsets,
              contact_layer.out_index);
  contact_layer.in_offsets = contact_layer.out_offsets;
  contact_layer.in_index = contact_layer.out_index;

  g.external_ids_ = std::move(external_ids);
  g.id_lookup_.reserve(g.external_ids_.size());
  for (NodeId i = 0; i < g.external_ids_.size(); ++i) {
    if (!g.id_lookup_.emplace(g.external_ids_[i], i).second)
      throw ValidationError("duplicate external id: " + g.external_ids_[i]);
  }
  return g;
}

std::span<const std::uint32_t> TemporalMultigraph::out_edges(EdgeKind kind, NodeId n) const {
  const auto& L = layer(kind);
  return {L.out_index.data() + L.out_offsets[n], L.out_offsets[n + 1] - L.out_offsets[n]};
}

std::span<const std::uint32_t> TemporalMultigraph::in_edges(EdgeKind kind, NodeId n) const {
  const auto& L = layer(kind);
  return {L.in_index.data() + L.in_offsets[n], L.in_offsets[n + 1] - L.in_offsets[n]};
}

std::optional<std::uint32_t> TemporalMultigraph::find_edge(EdgeKind kind, NodeId src,
                                                           NodeId dst) const {
  if (src >= num_nodes_ || dst >= num_nodes_) return std::nullopt;
  const auto& L = layer(kind);
  auto row = out_edges(kind, src);
  auto it = std::lower_bound(row.begin(), row.end(), dst, [&](std::uint32_t e, NodeId key) {
    return L.edges[e].other(src) < key;
  });
  if (it != row.end() && L.edges[*it].other(src) == dst) return *it;
  return std::nullopt;
}

std::size_t TemporalMultigraph::event_count(EdgeKind kind) const {
  std::size_t n = 0;
  for (const auto& e : edges(kind)) n += e.event_count();
  return n;
}

std::vector<ContactPair> TemporalMultigraph::contact_pairs() const {
  std::vector<ContactPair> out;
  out.reserve(edges(EdgeKind::Contact).size());
  for (const auto& e : edges(EdgeKind::Contact)) out.emplace_back(e.src, e.dst);
  return out;
}

std::optional<NodeId> TemporalMultigraph::find_node(std::string_view external) const {
  auto it = id_lookup_.find(std::string(external));
  if (it == id_lookup_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

NodeId GraphBuilder::intern(std::string_view external) {
  auto [it, inserted] = interned_.emplace(std::string(external), 0);
  if (inserted) {
    it->second = static_cast<NodeId>(num_nodes_);
    touch(it->second);
    external_ids_.resize(num_nodes_);
    external_ids_[it->second] = std::string(external);
  }
  return it->second;
}

void GraphBuilder::touch(NodeId n) {
  if (n >= num_nodes_) num_nodes_ = static_cast<std::size_t>(n) + 1;
}

GraphBuilder& GraphBuilder::trade(NodeId buyer, NodeId seller, Timestamp t, double price,
                                  std::int32_t category, std::string product,
                                  std::int32_t quantity) {
  EdgeEvent e;
  e.kind = EdgeKind::Trade;
  e.src = buyer;
  e.dst = seller;
  e.time = t;
  e.trade = TradeInfo{std::move(product), category, price, quantity};
  return event(std::move(e));
}

GraphBuilder& GraphBuilder::message(NodeId src, NodeId dst, Timestamp t) {
  EdgeEvent e;
  e.kind = EdgeKind::Message;
  e.src = src;
  e.dst = dst;
  e.time = t;
  return event(std::move(e));
}

GraphBuilder& GraphBuilder::contact(NodeId u, NodeId v) {
  touch(u);
  touch(v);
  contacts_.emplace_back(u, v);
  return *this;
}

GraphBuilder& GraphBuilder::event(EdgeEvent e) {
  touch(e.src);
  touch(e.dst);
  events_.push_back(std::move(e));
  return *this;
}

GraphBuilder& GraphBuilder::reserve_nodes(std::size_t n) {
  if (n > num_nodes_) num_nodes_ = n;
  return *this;
}

TemporalMultigraph GraphBuilder::build() && {
  std::vector<std::string> ids;
  if (!interned_.empty()) {
    ids = std::move(external_ids_);
    ids.resize(num_nodes_);
    // Nodes addressed by index alongside interned ones get their index as id.
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i].empty()) ids[i] = "#" + std::to_string(i);
  }
  return TemporalMultigraph::build(num_nodes_, window_, std::move(events_),
                                   std::move(contacts_), std::move(ids));
}

// ---------------------------------------------------------------------------

std::span<const EdgeEvent> GraphView::events_of(const AggregatedEdge& e) const {
  return g_->events_of(e).first(event_count(e));
}

std::size_t GraphView::event_count(const AggregatedEdge& e) const {
  auto times = g_->times_of(e);
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), cutoff_) -
                                  times.begin());
}

std::optional<Timestamp> GraphView::last_event_time(const AggregatedEdge& e) const {
  const std::size_t n = event_count(e);
  if (n == 0) return std::nullopt;
  return g_->times_of(e)[n - 1];
}

const AggregatedEdge* GraphView::find_edge(EdgeKind kind, NodeId src, NodeId dst) const {
  auto idx = g_->find_edge(kind, src, dst);
  if (!idx) return nullptr;
  const auto& e = g_->edge(kind, *idx);
  return visible(e) ? &e : nullptr;
}

GraphView snapshot_at(const TemporalMultigraph& g, Timestamp cutoff) {
  if (!g.window().contains(cutoff))
    throw std::out_of_range("snapshot cutoff outside observation window");
  return GraphView(g, cutoff);
}

}  // namespace triadkit
