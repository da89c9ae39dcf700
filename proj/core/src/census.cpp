#include "triadkit/census.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "triadkit/parallel.hpp"

namespace triadkit::census {

std::string_view leg_label(Leg leg, bool second) {
  static constexpr std::string_view first_labels[] = {"trade U->X", "trade X->U", "msg U->X",
                                                      "msg X->U"};
  static constexpr std::string_view second_labels[] = {"trade V->X", "trade X->V", "msg V->X",
                                                       "msg X->V"};
  return (second ? second_labels : first_labels)[static_cast<int>(leg)];
}

std::string_view role_label(Role r) {
  switch (r) {
    case Role::Buyer: return "B";
    case Role::Seller: return "S";
    case Role::Ambiguous: return "";
  }
  return "";
}

std::string_view closing_label(ClosingType t) {
  static constexpr std::string_view labels[] = {"t_o", "t_i", "m_o", "m_i"};
  return labels[static_cast<int>(t)];
}

Role role_of_x(ConfigId config) {
  bool buys = false, sells = false;
  for (Leg leg : {config.first, config.second}) {
    if (leg == Leg::TradeOut) buys = true;
    if (leg == Leg::TradeIn) sells = true;
  }
  if (buys && !sells) return Role::Buyer;
  if (sells && !buys) return Role::Seller;
  return Role::Ambiguous;
}

GenerativeBaseline generative_baseline(const TemporalMultigraph& g, NodeId node) {
  GenerativeBaseline b;
  b.node = node;
  const auto trades = g.out_edges(EdgeKind::Trade, node).size();
  const auto msgs = g.out_edges(EdgeKind::Message, node).size();
  if (trades + msgs > 0) {
    b.defined = true;
    b.p_t = static_cast<double>(trades) / static_cast<double>(trades + msgs);
  }
  return b;
}

std::vector<GenerativeBaseline> generative_baselines(const TemporalMultigraph& g) {
  std::vector<GenerativeBaseline> out;
  out.reserve(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) out.push_back(generative_baseline(g, v));
  return out;
}

namespace {

constexpr int kTradeIn = 0, kTradeOut = 1, kMsgIn = 2, kMsgOut = 3;

constexpr EdgeKind slot_kind(int slot) { return slot < 2 ? EdgeKind::Trade : EdgeKind::Message; }

// Trade/message projection. Row of node a lists neighbors b with the
// aggregated edge index for each Leg slot as seen from a (-1 if absent).
struct PairIndex {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> nbr;
  std::vector<std::array<std::int32_t, 4>> legs;

  static PairIndex build(const TemporalMultigraph& g) {
    struct Entry {
      NodeId a, b;
      std::int8_t slot;
      std::int32_t edge;
    };
    std::vector<Entry> entries;
    entries.reserve(2 * (g.edges(EdgeKind::Trade).size() + g.edges(EdgeKind::Message).size()));
    for (EdgeKind k : {EdgeKind::Trade, EdgeKind::Message}) {
      const int base = k == EdgeKind::Trade ? 0 : 2;
      const auto edges = g.edges(k);
      for (std::int32_t i = 0; i < static_cast<std::int32_t>(edges.size()); ++i) {
        const auto& e = edges[i];
        entries.push_back({e.src, e.dst, static_cast<std::int8_t>(base + 1), i});  // out
        entries.push_back({e.dst, e.src, static_cast<std::int8_t>(base + 0), i});  // in
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    PairIndex p;
    p.offsets.assign(g.num_nodes() + 1, 0);
    for (std::size_t i = 0; i < entries.size();) {
      std::size_t j = i;
      std::array<std::int32_t, 4> legs{-1, -1, -1, -1};
      while (j < entries.size() && entries[j].a == entries[i].a && entries[j].b == entries[i].b) {
        legs[entries[j].slot] = entries[j].edge;
        ++j;
      }
      p.nbr.push_back(entries[i].b);
      p.legs.push_back(legs);
      ++p.offsets[entries[i].a + 1];
      i = j;
    }
    std::partial_sum(p.offsets.begin(), p.offsets.end(), p.offsets.begin());
    return p;
  }
};

// Legs of one pair seen from either endpoint.
struct PairRef {
  const std::array<std::int32_t, 4>* legs;
  bool mirrored;
  std::int32_t get(int slot) const { return (*legs)[mirrored ? slot ^ 1 : slot]; }
};

struct Tally {
  std::array<std::uint64_t, kNumConfigs> instances{}, unique_x{}, closed{};
  std::array<std::array<std::uint64_t, 4>, kNumConfigs> closed_by{};
  std::vector<std::uint64_t> closed_o, trade_o, closed_i, trade_i;

  void ensure_creators(std::size_t n) {
    if (closed_o.empty()) {
      closed_o.assign(kNumConfigs * n, 0);
      trade_o.assign(kNumConfigs * n, 0);
      closed_i.assign(kNumConfigs * n, 0);
      trade_i.assign(kNumConfigs * n, 0);
    }
  }
};

class Counter {
 public:
  Counter(const TemporalMultigraph& g, const PairIndex& p) : g_(g), p_(p) {}

  Timestamp first_time(int slot, std::int32_t edge) const {
    return g_.edge(slot_kind(slot), static_cast<std::uint32_t>(edge)).first_time;
  }

  // Wedge instances with middle x, by prefix counts over time-sorted legs.
  void count_wedges(NodeId x, Tally& t, std::vector<std::pair<Timestamp, int>>& scratch) const {
    scratch.clear();
    std::array<std::int64_t, kNumConfigs> inst{};
    for (std::size_t q = p_.offsets[x]; q < p_.offsets[x + 1]; ++q) {
      const auto& legs = p_.legs[q];
      std::array<Timestamp, 4> times{};
      for (int s = 0; s < 4; ++s) {
        if (legs[s] < 0) continue;
        times[s] = first_time(s, legs[s]);
        scratch.emplace_back(times[s], s);
      }
      // Pairs of legs sharing the same other endpoint are not wedges.
      for (int a = 0; a < 4; ++a) {
        if (legs[a] < 0) continue;
        for (int b = 0; b < 4; ++b)
          if (b != a && legs[b] >= 0 && times[a] < times[b]) --inst[a * 4 + b];
      }
    }
    std::sort(scratch.begin(), scratch.end());
    std::array<std::int64_t, 4> earlier{};
    for (std::size_t i = 0; i < scratch.size();) {
      std::size_t j = i;
      while (j < scratch.size() && scratch[j].first == scratch[i].first) ++j;
      for (std::size_t k = i; k < j; ++k)
        for (int a = 0; a < 4; ++a) inst[a * 4 + scratch[k].second] += earlier[a];
      for (std::size_t k = i; k < j; ++k) ++earlier[scratch[k].second];
      i = j;
    }
    for (int c = 0; c < kNumConfigs; ++c) {
      if (inst[c] > 0) {
        t.instances[c] += static_cast<std::uint64_t>(inst[c]);
        ++t.unique_x[c];
      }
    }
  }

  // All (leg1, leg2) instances of middle x with ordered ends (u, v) that
  // close through the u-v pair.
  void close_wedges(NodeId u, NodeId v, PairRef xu, PairRef xv, PairRef uv, Tally& t) const {
    // Earliest closing event after each candidate t2, keyed by second leg.
    for (int leg2 = 0; leg2 < 4; ++leg2) {
      const auto e2 = xv.get(leg2);
      if (e2 < 0) continue;
      const Timestamp t2 = first_time(leg2, e2);

      int type = -1;
      Timestamp best = std::numeric_limits<Timestamp>::max();
      static constexpr int kClosingSlot[4] = {kTradeOut, kTradeIn, kMsgOut, kMsgIn};
      for (int ct = 0; ct < 4; ++ct) {
        const auto e = uv.get(kClosingSlot[ct]);
        if (e < 0) continue;
        const auto times =
            g_.times_of(g_.edge(slot_kind(kClosingSlot[ct]), static_cast<std::uint32_t>(e)));
        auto it = std::upper_bound(times.begin(), times.end(), t2);
        if (it != times.end() && *it < best) {
          best = *it;
          type = ct;
        }
      }
      if (type < 0) continue;

      for (int leg1 = 0; leg1 < 4; ++leg1) {
        const auto e1 = xu.get(leg1);
        if (e1 < 0 || !(first_time(leg1, e1) < t2)) continue;
        const int c = leg1 * 4 + leg2;
        ++t.closed[c];
        ++t.closed_by[c][type];
        const std::size_t n = g_.num_nodes();
        if (type == 0 || type == 2) {
          ++t.closed_o[c * n + u];
          if (type == 0) ++t.trade_o[c * n + u];
        } else {
          ++t.closed_i[c * n + v];
          if (type == 1) ++t.trade_i[c * n + v];
        }
      }
    }
  }

 private:
  const TemporalMultigraph& g_;
  const PairIndex& p_;
};

}  // namespace

CensusResult count_configurations(const TemporalMultigraph& g, const CensusOptions& options) {
  const std::size_t n = g.num_nodes();
  const PairIndex pairs = PairIndex::build(g);
  const Counter counter(g, pairs);
  const unsigned threads = std::max(1u, options.threads);
  std::vector<Tally> tallies(threads);

  constexpr std::size_t kChunk = 512;
  parallel_chunks(n, threads, kChunk, [&](unsigned w, std::size_t b, std::size_t e) {
    std::vector<std::pair<Timestamp, int>> scratch;
    for (std::size_t x = b; x < e; ++x) counter.count_wedges(static_cast<NodeId>(x), tallies[w], scratch);
  });

  // Degree-ordered orientation: each triangle is found once from its
  // lowest-ranked vertex and then expanded to all six (x; u, v) orderings.
  std::vector<std::uint32_t> rank(n);
  {
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      const auto da = pairs.offsets[a + 1] - pairs.offsets[a];
      const auto db = pairs.offsets[b + 1] - pairs.offsets[b];
      return da != db ? da < db : a < b;
    });
    for (std::uint32_t r = 0; r < n; ++r) rank[order[r]] = r;
  }
  std::vector<std::size_t> fwd_off(n + 1, 0);
  std::vector<NodeId> fwd_nbr;
  std::vector<std::size_t> fwd_pos;
  for (NodeId a = 0; a < n; ++a) {
    for (std::size_t q = pairs.offsets[a]; q < pairs.offsets[a + 1]; ++q) {
      if (rank[pairs.nbr[q]] > rank[a]) {
        fwd_nbr.push_back(pairs.nbr[q]);
        fwd_pos.push_back(q);
      }
    }
    fwd_off[a + 1] = fwd_nbr.size();
  }

  parallel_chunks(n, threads, kChunk, [&](unsigned w, std::size_t b, std::size_t e) {
    Tally& t = tallies[w];
    t.ensure_creators(n);
    for (std::size_t ui = b; ui < e; ++ui) {
      const NodeId a = static_cast<NodeId>(ui);
      for (std::size_t i = fwd_off[a]; i < fwd_off[a + 1]; ++i) {
        const NodeId bn = fwd_nbr[i];
        const auto* ab = &pairs.legs[fwd_pos[i]];
        // Intersect forward lists of a and b (both sorted by node id).
        std::size_t p = fwd_off[a], q = fwd_off[bn];
        while (p < fwd_off[a + 1] && q < fwd_off[bn + 1]) {
          if (fwd_nbr[p] < fwd_nbr[q]) { ++p; continue; }
          if (fwd_nbr[q] < fwd_nbr[p]) { ++q; continue; }
          const NodeId c = fwd_nbr[p];
          const auto* ac = &pairs.legs[fwd_pos[p]];
          const auto* bc = &pairs.legs[fwd_pos[q]];
          // Middle a.
          counter.close_wedges(bn, c, {ab, false}, {ac, false}, {bc, false}, t);
          counter.close_wedges(c, bn, {ac, false}, {ab, false}, {bc, true}, t);
          // Middle b.
          counter.close_wedges(a, c, {ab, true}, {bc, false}, {ac, false}, t);
          counter.close_wedges(c, a, {bc, false}, {ab, true}, {ac, true}, t);
          // Middle c.
          counter.close_wedges(a, bn, {ac, true}, {bc, true}, {ab, false}, t);
          counter.close_wedges(bn, a, {bc, true}, {ac, true}, {ab, true}, t);
          ++p;
          ++q;
        }
      }
    }
  });

  CensusResult result;
  result.num_nodes = n;
  Tally total;
  total.ensure_creators(n);
  for (auto& t : tallies) {
    for (int c = 0; c < kNumConfigs; ++c) {
      total.instances[c] += t.instances[c];
      total.unique_x[c] += t.unique_x[c];
      total.closed[c] += t.closed[c];
      for (int k = 0; k < 4; ++k) total.closed_by[c][k] += t.closed_by[c][k];
    }
    if (!t.closed_o.empty()) {
      for (std::size_t i = 0; i < total.closed_o.size(); ++i) {
        total.closed_o[i] += t.closed_o[i];
        total.trade_o[i] += t.trade_o[i];
        total.closed_i[i] += t.closed_i[i];
        total.trade_i[i] += t.trade_i[i];
      }
    }
    t = Tally{};
  }

  for (int c = 0; c < kNumConfigs; ++c) {
    auto& row = result.rows[c];
    row.config = ConfigId::from_index(c);
    row.x_role = role_of_x(row.config);
    row.instances = total.instances[c];
    row.unique_x = total.unique_x[c];
    row.closed = total.closed[c];
    row.closed_by = total.closed_by[c];
    if (row.instances > 0)
      row.p_close_x100 = 100.0 * static_cast<double>(row.closed) / static_cast<double>(row.instances);
    if (row.closed > 0) {
      const auto trades = row.closed_by[0] + row.closed_by[1];
      const auto msgs = row.closed_by[2] + row.closed_by[3];
      row.p_trade_given_close = static_cast<double>(trades) / static_cast<double>(row.closed);
      row.p_msg_given_close = static_cast<double>(msgs) / static_cast<double>(row.closed);
    }
  }
  result.closed_o_by_creator = std::move(total.closed_o);
  result.trade_o_by_creator = std::move(total.trade_o);
  result.closed_i_by_creator = std::move(total.closed_i);
  result.trade_i_by_creator = std::move(total.trade_i);
  return result;
}

namespace {

std::optional<double> z_score(double observed, double expected, double variance) {
  if (variance > 0.0) return (observed - expected) / std::sqrt(variance);
  if (observed == expected) return 0.0;
  return std::nullopt;
}

}  // namespace

std::array<SurpriseValues, kNumConfigs> surprise(const CensusResult& census,
                                                 std::span<const GenerativeBaseline> baselines) {
  const std::size_t n = census.num_nodes;
  if (baselines.size() < n) throw std::invalid_argument("baseline table smaller than graph");
  std::array<SurpriseValues, kNumConfigs> out{};
  if (census.closed_o_by_creator.size() < kNumConfigs * n) return out;
  for (int c = 0; c < kNumConfigs; ++c) {
    double var_o = 0.0, var_i = 0.0;
    auto& s = out[c];
    for (std::size_t v = 0; v < n; ++v) {
      const auto& b = baselines[v];
      if (!b.defined) continue;
      const std::size_t k = c * n + v;
      const double no = static_cast<double>(census.closed_o_by_creator[k]);
      const double ni = static_cast<double>(census.closed_i_by_creator[k]);
      s.expected_o += no * b.p_t;
      var_o += no * b.p_t * (1.0 - b.p_t);
      s.observed_o += static_cast<double>(census.trade_o_by_creator[k]);
      s.expected_i += ni * b.p_t;
      var_i += ni * b.p_t * (1.0 - b.p_t);
      s.observed_i += static_cast<double>(census.trade_i_by_creator[k]);
    }
    s.s_t_o = z_score(s.observed_o, s.expected_o, var_o);
    s.s_t_i = z_score(s.observed_i, s.expected_i, var_i);
  }
  return out;
}

std::array<CensusRow, kNumConfigs> config_census(const TemporalMultigraph& g,
                                                 const CensusOptions& options) {
  auto result = count_configurations(g, options);
  const auto baselines = generative_baselines(g);
  const auto s = surprise(result, baselines);
  for (int c = 0; c < kNumConfigs; ++c) {
    result.rows[c].s_t_o = s[c].s_t_o;
    result.rows[c].s_t_i = s[c].s_t_i;
  }
  return result.rows;
}

}  // namespace triadkit::census
