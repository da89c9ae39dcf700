#include "triadkit/infopass.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "triadkit/analytics.hpp"
#include "triadkit/csv.hpp"
#include "triadkit/parallel.hpp"
#include "triadkit/rng.hpp"

namespace triadkit::infopass {

Variant parse_variant(std::string_view s) {
  if (s == "standard") return Variant::Standard;
  if (s == "first-buy-req") return Variant::FirstBuyReq;
  if (s == "msg-req") return Variant::MsgReq;
  if (s == "random") return Variant::Random;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Standard: return "standard";
    case Variant::FirstBuyReq: return "first-buy-req";
    case Variant::MsgReq: return "msg-req";
    case Variant::Random: return "random";
  }
  return "?";
}

Axis parse_axis(std::string_view s) {
  if (s == "msg-strength") return Axis::MsgStrength;
  if (s == "time-diff-days") return Axis::TimeDiffDays;
  if (s == "price") return Axis::PriceCNY;
  if (s == "category") return Axis::Category;
  throw std::invalid_argument("unknown axis '" + std::string(s) + "'");
}

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::MsgStrength: return "msg-strength";
    case Axis::TimeDiffDays: return "time-diff-days";
    case Axis::PriceCNY: return "price";
    case Axis::Category: return "category";
  }
  return "?";
}

Dyad parse_dyad(std::string_view s) {
  if (s == "trade-vs-msg-volume") return Dyad::TradeVsMsgVolume;
  if (s == "msgs-vs-price") return Dyad::MsgsVsPrice;
  if (s == "msgs-vs-trade-date-offset") return Dyad::MsgsVsTradeDateOffset;
  throw std::invalid_argument("unknown dyad report '" + std::string(s) + "'");
}

std::string_view to_string(Dyad d) {
  switch (d) {
    case Dyad::TradeVsMsgVolume: return "trade-vs-msg-volume";
    case Dyad::MsgsVsPrice: return "msgs-vs-price";
    case Dyad::MsgsVsTradeDateOffset: return "msgs-vs-trade-date-offset";
  }
  return "?";
}

namespace {

struct Triple {
  NodeId b1, b2, s1;
  Timestamp t1, t2;
  bool success;
  bool b2_bought_before;  // B2 -> S1 trade at or before t2
  const AggregatedEdge* trade;    // B1 -> S1
  const AggregatedEdge* message;  // B1 -> B2
};

std::size_t count_in(std::span<const Timestamp> times, Timestamp lo, Timestamp hi) {
  // events with lo <= t <= hi
  if (hi < lo) return 0;
  auto a = std::lower_bound(times.begin(), times.end(), lo);
  auto b = std::upper_bound(a, times.end(), hi);
  return static_cast<std::size_t>(b - a);
}

std::size_t count_in(const TemporalMultigraph& g, const AggregatedEdge* e, Timestamp lo,
                     Timestamp hi) {
  return e ? count_in(g.times_of(*e), lo, hi) : 0;
}

const AggregatedEdge* lookup(const TemporalMultigraph& g, EdgeKind kind, NodeId s, NodeId d) {
  auto idx = g.find_edge(kind, s, d);
  return idx ? &g.edge(kind, *idx) : nullptr;
}

// Triples for one B1 are emitted grouped by message edge (hence by B2).
template <class Fn>
void for_each_triple(const TemporalMultigraph& g, const IPQuery& q, Fn&& fn) {
  parallel_chunks(g.num_nodes(), q.threads, 256, [&](unsigned w, std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const NodeId b1 = static_cast<NodeId>(n);
      const auto trades = g.out_edges(EdgeKind::Trade, b1);
      if (trades.empty()) continue;
      for (auto mi : g.out_edges(EdgeKind::Message, b1)) {
        const auto& me = g.edge(EdgeKind::Message, mi);
        const NodeId b2 = me.dst;
        const auto mtimes = g.times_of(me);
        for (auto ti : trades) {
          const auto& te = g.edge(EdgeKind::Trade, ti);
          const NodeId s1 = te.dst;
          if (s1 == b2) continue;
          const Timestamp t1 = te.first_time;
          auto it = std::upper_bound(mtimes.begin(), mtimes.end(), t1);
          if (it == mtimes.end()) continue;
          Triple tr{b1, b2, s1, t1, *it, false, false, &te, &me};
          if (const auto* follow = lookup(g, EdgeKind::Trade, b2, s1)) {
            const auto ft = g.times_of(*follow);
            tr.b2_bought_before = ft.front() <= tr.t2;
            auto nx = std::upper_bound(ft.begin(), ft.end(), tr.t2);
            tr.success = nx != ft.end() && *nx <= tr.t2 + q.delta_max;
          }
          if (q.variant == Variant::FirstBuyReq && tr.b2_bought_before) continue;
          fn(w, tr);
        }
      }
    }
  });
}

struct Tally {
  std::uint64_t num = 0, den = 0;
};
using KeyedTally = std::map<std::int64_t, Tally>;

KeyedTally merge(std::vector<KeyedTally>& parts) {
  KeyedTally out;
  for (auto& p : parts)
    for (auto& [k, t] : p) {
      out[k].num += t.num;
      out[k].den += t.den;
    }
  return out;
}

int price_bucket(double price) {
  return static_cast<int>(std::upper_bound(std::begin(kPriceEdges), std::end(kPriceEdges), price) -
                          std::begin(kPriceEdges));
}

std::pair<double, double> price_bounds(int bucket) {
  const double lo = bucket == 0 ? 0.0 : kPriceEdges[bucket - 1];
  const double hi = bucket < static_cast<int>(std::size(kPriceEdges))
                        ? kPriceEdges[bucket]
                        : std::numeric_limits<double>::infinity();
  return {lo, hi};
}

std::string price_label(int bucket) {
  auto [lo, hi] = price_bounds(bucket);
  return "[" + csv::format_double(lo) + "," + (std::isinf(hi) ? std::string("inf") : csv::format_double(hi)) + ")";
}

BucketedCurve to_curve(std::string name, const KeyedTally& t, std::size_t min_support,
                       bool price_keys) {
  BucketedCurve c;
  c.name = std::move(name);
  std::uint64_t num = 0, den = 0;
  for (const auto& [k, v] : t) {
    num += v.num;
    den += v.den;
    if (v.den < min_support || v.den == 0) {
      ++c.suppressed_buckets;
      c.suppressed_support += v.den;
      continue;
    }
    Bucket b;
    if (price_keys) {
      const int pb = static_cast<int>(k);
      b.label = price_label(pb);
      std::tie(b.lo, b.hi) = price_bounds(pb);
    } else {
      b.label = std::to_string(k);
      b.lo = static_cast<double>(k);
      b.hi = static_cast<double>(k + 1);
    }
    b.numerator = v.num;
    b.denominator = v.den;
    b.value = static_cast<double>(v.num) / static_cast<double>(v.den);
    c.buckets.push_back(std::move(b));
  }
  if (den > 0) c.overall = static_cast<double>(num) / static_cast<double>(den);
  return c;
}

}  // namespace

IPResult ip_success_rate(const TemporalMultigraph& g, const IPQuery& q) {
  if (q.variant == Variant::Random) {
    IPQuery std_q = q;
    std_q.variant = Variant::Standard;
    return ip_success_rate(randomize_sellers(g, q.seed), std_q);
  }
  const unsigned threads = std::max(1u, q.threads);
  struct Local {
    IPResult r;
    NodeId last_b1 = kNoNode, last_b2 = kNoNode;
    bool pair_success = false;
    void flush() {
      if (last_b1 != kNoNode) {
        ++r.pair_denominator;
        if (pair_success) ++r.pair_numerator;
      }
    }
  };
  std::vector<Local> locals(threads);
  for_each_triple(g, q, [&](unsigned w, const Triple& t) {
    auto& l = locals[w];
    if (t.b1 != l.last_b1 || t.b2 != l.last_b2) {
      l.flush();
      l.last_b1 = t.b1;
      l.last_b2 = t.b2;
      l.pair_success = false;
    }
    ++l.r.denominator;
    if (t.success) {
      ++l.r.numerator;
      l.pair_success = true;
    }
  });
  IPResult out;
  for (auto& l : locals) {
    l.flush();
    out.numerator += l.r.numerator;
    out.denominator += l.r.denominator;
    out.pair_numerator += l.r.pair_numerator;
    out.pair_denominator += l.r.pair_denominator;
  }
  return out;
}

BucketedCurve closure_rate_by(const TemporalMultigraph& g, Axis axis, const IPQuery& q) {
  if (q.variant == Variant::Random) {
    IPQuery std_q = q;
    std_q.variant = Variant::Standard;
    auto c = closure_rate_by(randomize_sellers(g, q.seed), axis, std_q);
    return c;
  }
  const unsigned threads = std::max(1u, q.threads);
  std::vector<KeyedTally> parts(threads);
  for_each_triple(g, q, [&](unsigned w, const Triple& t) {
    std::int64_t key = 0;
    switch (axis) {
      case Axis::MsgStrength: {
        const Timestamp lo = t.t1 - q.window_delta, hi = t.t1 + q.window_delta;
        key = static_cast<std::int64_t>(
            count_in(g.times_of(*t.message), lo, hi) +
            count_in(g, lookup(g, EdgeKind::Message, t.b2, t.b1), lo, hi));
        break;
      }
      case Axis::TimeDiffDays: key = (t.t2 - t.t1) / kSecondsPerDay; break;
      case Axis::PriceCNY: key = price_bucket(g.events_of(*t.trade).front().trade.price); break;
      case Axis::Category: key = g.events_of(*t.trade).front().trade.category_id; break;
    }
    auto& tally = parts[w][key];
    ++tally.den;
    if (t.success) ++tally.num;
  });
  std::string name = std::string("closure-rate-by-") + std::string(to_string(axis)) + "-" +
                     std::string(to_string(q.variant));
  return to_curve(std::move(name), merge(parts), q.min_support, axis == Axis::PriceCNY);
}

std::vector<BBARow> before_between_after(const TemporalMultigraph& g, int max_delta) {
  if (max_delta < 1) throw std::invalid_argument("max_delta must be >= 1");
  const Window& win = g.window();
  struct Acc {
    std::uint64_t n = 0;
    std::int64_t s[6] = {};   // before, between, after, w-b, w-a, b-a
    std::int64_t s2[6] = {};
  };
  std::vector<Acc> acc(static_cast<std::size_t>(max_delta) + 1);
  const auto msg = Projection::build(full_view(g), EdgeKind::Message);

  for (NodeId b1 = 0; b1 < g.num_nodes(); ++b1) {
    const auto t1s = g.out_edges(EdgeKind::Trade, b1);
    if (t1s.empty()) continue;
    for (NodeId b2 : msg.neighbors(b1)) {
      const auto t2s = g.out_edges(EdgeKind::Trade, b2);
      const AggregatedEdge* m12 = nullptr;
      const AggregatedEdge* m21 = nullptr;
      bool looked_up = false;
      // Merge the two seller lists (both sorted by seller id).
      std::size_t i = 0, j = 0;
      while (i < t1s.size() && j < t2s.size()) {
        const auto& e1 = g.edge(EdgeKind::Trade, t1s[i]);
        const auto& e2 = g.edge(EdgeKind::Trade, t2s[j]);
        if (e1.dst < e2.dst) { ++i; continue; }
        if (e2.dst < e1.dst) { ++j; continue; }
        ++i;
        ++j;
        const Timestamp t1 = e1.first_time;
        const std::int64_t delta = win.day_of(e2.first_time) - win.day_of(t1);
        if (delta < 1 || delta > max_delta) continue;
        const Timestamp d = delta * kSecondsPerDay;
        if (t1 - d < win.start || t1 + 2 * d > win.end) continue;
        if (!looked_up) {
          m12 = lookup(g, EdgeKind::Message, b1, b2);
          m21 = lookup(g, EdgeKind::Message, b2, b1);
          looked_up = true;
        }
        auto count = [&](Timestamp lo, Timestamp hi) {
          return static_cast<std::int64_t>(count_in(g, m12, lo, hi) + count_in(g, m21, lo, hi));
        };
        const std::int64_t before = count(t1 - d, t1);
        const std::int64_t between = count(t1 + 1, t1 + d);
        const std::int64_t after = count(t1 + d + 1, t1 + 2 * d);
        const std::int64_t v[6] = {before, between, after, between - before, between - after,
                                   before - after};
        auto& a = acc[delta];
        ++a.n;
        for (int k = 0; k < 6; ++k) {
          a.s[k] += v[k];
          a.s2[k] += v[k] * v[k];
        }
      }
    }
  }

  std::vector<BBARow> rows;
  for (int delta = 1; delta <= max_delta; ++delta) {
    const auto& a = acc[delta];
    BBARow r;
    r.delta_days = delta;
    r.instances = a.n;
    double mean[6] = {}, se[6] = {};
    if (a.n > 0) {
      const double n = static_cast<double>(a.n);
      for (int k = 0; k < 6; ++k) {
        mean[k] = static_cast<double>(a.s[k]) / n;
        if (a.n > 1) {
          const double var =
              (static_cast<double>(a.s2[k]) - n * mean[k] * mean[k]) / (n - 1.0);
          se[k] = std::sqrt(std::max(0.0, var) / n);
        }
      }
    }
    r.before = mean[0];
    r.between = mean[1];
    r.after = mean[2];
    r.se_before = se[0];
    r.se_between = se[1];
    r.se_after = se[2];
    r.se_between_minus_before = se[3];
    r.se_between_minus_after = se[4];
    r.se_before_minus_after = se[5];
    rows.push_back(r);
  }
  return rows;
}

MutualContactCurve mutual_contact_trade_curve(const TemporalMultigraph& g, Variant variant,
                                              std::size_t min_support) {
  const bool msg_req = variant == Variant::MsgReq;
  const auto contacts = Projection::build(full_view(g), EdgeKind::Contact);
  auto traded = [&](NodeId u, NodeId w) {
    return g.find_edge(EdgeKind::Trade, u, w) || g.find_edge(EdgeKind::Trade, w, u);
  };
  auto messaged = [&](NodeId u, NodeId w) {
    return g.find_edge(EdgeKind::Message, u, w) || g.find_edge(EdgeKind::Message, w, u);
  };

  KeyedTally tally;
  std::vector<std::uint32_t> count(g.num_nodes(), 0);
  std::vector<NodeId> touched;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    touched.clear();
    for (NodeId c : contacts.neighbors(u))
      for (NodeId w : contacts.neighbors(c)) {
        if (w <= u) continue;
        if (count[w]++ == 0) touched.push_back(w);
      }
    std::sort(touched.begin(), touched.end());
    for (NodeId w : touched) {
      const auto k = count[w];
      count[w] = 0;
      if (msg_req && !messaged(u, w)) continue;
      auto& t = tally[k];
      ++t.den;
      if (traded(u, w)) ++t.num;
    }
  }

  MutualContactCurve out;
  out.curve = to_curve(std::string("mutual-contacts-") + std::string(to_string(variant)), tally,
                       min_support, false);
  for (const auto& e : g.edges(EdgeKind::Contact)) {
    if (msg_req && !messaged(e.src, e.dst)) continue;
    ++out.contact_pairs;
    if (traded(e.src, e.dst)) ++out.contact_pairs_traded;
  }
  if (out.contact_pairs > 0)
    out.direct_contact_trade_rate =
        static_cast<double>(out.contact_pairs_traded) / static_cast<double>(out.contact_pairs);
  return out;
}

BucketedCurve dyad_report(const TemporalMultigraph& g, Dyad which, const DyadOptions& options) {
  KeyedTally tally;
  const Window& win = g.window();
  std::string name(to_string(which));

  if (which == Dyad::TradeVsMsgVolume) {
    if (options.require_trade) name += "-with-trade";
    for (const auto& me : g.edges(EdgeKind::Message)) {
      const auto* back = lookup(g, EdgeKind::Message, me.dst, me.src);
      if (back && me.src > me.dst) continue;  // pair handled from the other direction
      const std::uint64_t msgs = me.event_count() + (back ? back->event_count() : 0);
      const auto* t1 = lookup(g, EdgeKind::Trade, me.src, me.dst);
      const auto* t2 = lookup(g, EdgeKind::Trade, me.dst, me.src);
      const std::uint64_t trades = (t1 ? t1->event_count() : 0) + (t2 ? t2->event_count() : 0);
      if (options.require_trade && trades == 0) continue;
      auto& t = tally[static_cast<std::int64_t>(msgs)];
      ++t.den;
      t.num += trades;
    }
    return to_curve(std::move(name), tally, options.min_support, false);
  }

  const std::int64_t last_day = win.day_of(win.end);
  for (const auto& te : g.edges(EdgeKind::Trade)) {
    const auto* bs = lookup(g, EdgeKind::Message, te.src, te.dst);
    const auto* sb = lookup(g, EdgeKind::Message, te.dst, te.src);
    if (!bs && !sb) continue;
    for (const auto& ev : g.events_of(te)) {
      const std::int64_t day = win.day_of(ev.time);
      if (which == Dyad::MsgsVsPrice) {
        const Timestamp lo = win.day_start(day), hi = win.day_start(day + 1) - 1;
        auto& t = tally[price_bucket(ev.trade.price)];
        ++t.den;
        t.num += count_in(g, bs, lo, hi);
      } else {
        for (int off = -options.max_offset_days; off <= options.max_offset_days; ++off) {
          const std::int64_t d = day + off;
          if (d < 0 || d > last_day) continue;
          const Timestamp lo = win.day_start(d), hi = win.day_start(d + 1) - 1;
          auto& t = tally[off];
          ++t.den;
          t.num += count_in(g, bs, lo, hi) + count_in(g, sb, lo, hi);
        }
      }
    }
  }
  return to_curve(std::move(name), tally, options.min_support, which == Dyad::MsgsVsPrice);
}

namespace {

constexpr std::uint64_t pair_key(NodeId a, NodeId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

TemporalMultigraph rewire(const TemporalMultigraph& g, std::uint64_t seed,
                          std::vector<RewireStats>* stats) {
  std::vector<EdgeEvent> events;
  events.reserve(g.events().size());
  std::vector<ContactPair> contacts;
  if (stats) stats->clear();

  for (EdgeKind kind : kAllKinds) {
    const auto edges = g.edges(kind);
    const std::size_t m = edges.size();
    std::vector<std::pair<NodeId, NodeId>> ends(m);
    for (std::size_t i = 0; i < m; ++i) ends[i] = {edges[i].src, edges[i].dst};

    RewireStats st;
    st.kind = kind;
    st.edges = m;
    if (m < 2) {
      st.skipped = true;
    } else {
      const bool directed = is_directed(kind);
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(kind) + 1));
      std::uniform_int_distribution<std::size_t> pick(0, m - 1);
      std::unordered_set<std::uint64_t> present;
      present.reserve(2 * m);
      for (auto [a, b] : ends) present.insert(pair_key(a, b));
      const std::uint64_t target = 10ull * m;
      const std::uint64_t max_attempts = 100ull * target;
      while (st.swaps < target && st.attempts < max_attempts) {
        ++st.attempts;
        const std::size_t i = pick(rng), j = pick(rng);
        const bool flip = !directed && (rng() & 1u);
        if (i == j) continue;
        auto [a, b] = ends[i];
        auto [c, d] = ends[j];
        if (flip) std::swap(c, d);
        // (a,b),(c,d) -> (a,d),(c,b)
        if (a == d || c == b || a == c || b == d) continue;
        std::pair<NodeId, NodeId> n1{a, d}, n2{c, b};
        if (!directed) {
          if (n1.first > n1.second) std::swap(n1.first, n1.second);
          if (n2.first > n2.second) std::swap(n2.first, n2.second);
        }
        const auto k1 = pair_key(n1.first, n1.second), k2 = pair_key(n2.first, n2.second);
        if (k1 == k2 || present.count(k1) || present.count(k2)) continue;
        present.erase(pair_key(ends[i].first, ends[i].second));
        present.erase(pair_key(ends[j].first, ends[j].second));
        present.insert(k1);
        present.insert(k2);
        ends[i] = n1;
        ends[j] = n2;
        ++st.swaps;
      }
    }
    if (stats) stats->push_back(st);

    for (std::size_t i = 0; i < m; ++i) {
      if (kind == EdgeKind::Contact) {
        contacts.push_back(ends[i]);
        continue;
      }
      for (const auto& ev : g.events_of(edges[i])) {
        EdgeEvent moved = ev;
        moved.src = ends[i].first;
        moved.dst = ends[i].second;
        events.push_back(std::move(moved));
      }
    }
  }
  std::vector<std::string> ids(g.external_ids().begin(), g.external_ids().end());
  return TemporalMultigraph::build(g.num_nodes(), g.window(), std::move(events),
                                   std::move(contacts), std::move(ids));
}

TemporalMultigraph randomize_sellers(const TemporalMultigraph& g, std::uint64_t seed) {
  std::vector<NodeId> sellers;
  for (NodeId n = 0; n < g.num_nodes(); ++n)
    if (!g.in_edges(EdgeKind::Trade, n).empty()) sellers.push_back(n);
  if (sellers.size() < 2) throw std::invalid_argument("randomize_sellers needs >= 2 sellers");

  std::mt19937_64 rng(derive_seed(seed, 0x5e11e75ull));
  std::uniform_int_distribution<std::size_t> pick(0, sellers.size() - 1);
  std::vector<EdgeEvent> events(g.events().begin(), g.events().end());
  for (auto& ev : events) {
    if (ev.kind != EdgeKind::Trade) continue;
    NodeId s;
    do s = sellers[pick(rng)];
    while (s == ev.src);
    ev.dst = s;
  }
  std::vector<std::string> ids(g.external_ids().begin(), g.external_ids().end());
  return TemporalMultigraph::build(g.num_nodes(), g.window(), std::move(events), g.contact_pairs(),
                                   std::move(ids));
}

}  // namespace triadkit::infopass
