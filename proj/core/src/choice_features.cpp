#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>

#include "triadkit/analytics.hpp"
#include "triadkit/choice.hpp"
#include "triadkit/csv.hpp"
#include "triadkit/parallel.hpp"
#include "triadkit/trust.hpp"

namespace triadkit::choice {

namespace {

constexpr std::string_view kFeatureNames[kNumFeatures] = {
    "price_rank",         "rating_rank",         "hist_sold_rank",
    "log_hist_sold",      "inventory_sold",      "insurance",
    "bs_trade_volume",    "bs_msg_volume",       "bs_contact",
    "days_since_trade",   "days_since_msg",      "msg_rank",
    "buyer_trade_volume", "seller_trade_volume", "mutual_msg",
    "mutual_contact",     "seller_cc_msg",       "seller_cc_contact",
    "mutual_density_msg", "mutual_density_contact", "seller_pr_trade",
    "seller_pr_msg",      "seller_pr_contact",
};

const std::vector<std::string> kChoiceHeader = {
    "cluster_id", "buyer", "seller", "purchase_date", "price", "rating_percent",
    "historical_sold", "inventory_sold", "insurance"};

}  // namespace

std::string_view feature_name(int i) {
  if (i < 0 || i >= kNumFeatures) throw std::out_of_range("feature index");
  return kFeatureNames[i];
}

std::vector<ChoiceRow> load_choice_rows(const std::filesystem::path& path) {
  csv::Reader reader(path, kChoiceHeader);
  std::vector<ChoiceRow> rows;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    if (f.size() < kChoiceHeader.size()) throw ValidationError("expected 9 columns", line);
    ChoiceRow r;
    r.cluster_id = f[0];
    r.buyer = f[1];
    r.seller = f[2];
    if (r.buyer.empty() || r.seller.empty()) throw ValidationError("empty node id", line);
    r.purchase_date = csv::parse_int(f[3], line, "purchase_date");
    r.price = csv::parse_double(f[4], line, "price");
    r.rating = csv::parse_double(f[5], line, "rating_percent");
    r.historical_sold = csv::parse_double(f[6], line, "historical_sold");
    r.inventory_sold = csv::parse_double(f[7], line, "inventory_sold");
    r.insurance = csv::parse_double(f[8], line, "insurance");
    if (!(r.price > 0)) throw ValidationError("price must be > 0", line);
    if (!(r.rating >= 0 && r.rating <= 100)) throw ValidationError("rating outside [0,100]", line);
    if (r.insurance != 0 && r.insurance != 1) throw ValidationError("insurance must be 0 or 1", line);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_choice_rows(const std::vector<ChoiceRow>& rows, std::ostream& out) {
  out << "cluster_id,buyer,seller,purchase_date,price,rating_percent,historical_sold,"
         "inventory_sold,insurance\n";
  for (const auto& r : rows) {
    out << r.cluster_id << ',' << r.buyer << ',' << r.seller << ',' << r.purchase_date << ','
        << csv::format_double(r.price) << ',' << csv::format_double(r.rating) << ','
        << csv::format_double(r.historical_sold) << ',' << csv::format_double(r.inventory_sold)
        << ',' << csv::format_double(r.insurance) << '\n';
  }
}

Timestamp feature_cutoff(const TemporalMultigraph& g, std::int64_t purchase_day) {
  return g.window().day_start(purchase_day) - 1;
}

std::vector<double> fractional_ranks(std::span<const double> values, bool descending) {
  const std::size_t k = values.size();
  std::vector<double> out(k, 0.0);
  if (k < 2) return out;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? values[a] > values[b] : values[a] < values[b];
  });
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j < k && values[idx[j]] == values[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1..j
    for (std::size_t t = i; t < j; ++t)
      out[idx[t]] = (avg_rank - 1.0) / static_cast<double>(k - 1);
    i = j;
  }
  return out;
}

std::vector<BuyerSellerCluster> build_decisions(const std::vector<ChoiceRow>& rows,
                                                const TemporalMultigraph& g, BuildStats* stats) {
  BuildStats st;
  std::map<std::string, std::vector<const ChoiceRow*>> by_cluster;
  for (const auto& r : rows) by_cluster[r.cluster_id].push_back(&r);
  st.clusters_in = by_cluster.size();

  std::vector<BuyerSellerCluster> out;
  for (const auto& [cluster_id, crows] : by_cluster) {
    std::map<std::string, std::vector<const ChoiceRow*>> by_seller;
    for (const auto* r : crows) by_seller[r->seller].push_back(r);
    if (by_seller.size() < 2) {
      ++st.dropped_too_few;
      continue;
    }
    if (by_seller.size() > 10) {
      ++st.dropped_too_many;
      continue;
    }

    BuyerSellerCluster c;
    c.cluster_id = cluster_id;
    std::map<std::string, std::size_t> seller_pos;
    for (const auto& [seller, srows] : by_seller) {
      Candidate cand;
      cand.seller = seller;
      cand.node = g.find_node(seller).value_or(kNoNode);
      std::vector<double> prices;
      for (const auto* r : srows) {
        prices.push_back(r->price);
        cand.rating = std::max(cand.rating, r->rating);
        cand.historical_sold = std::max(cand.historical_sold, r->historical_sold);
        cand.inventory_sold = std::max(cand.inventory_sold, r->inventory_sold);
        cand.insurance = std::max(cand.insurance, r->insurance);
      }
      cand.price = trust::median(std::move(prices));
      seller_pos[seller] = c.candidates.size();
      c.candidates.push_back(std::move(cand));
    }

    struct Pending {
      Timestamp first = 0;
      std::string first_seller;
      std::vector<char> is_true;
    };
    std::map<std::pair<std::string, std::int64_t>, Pending> groups;
    for (const auto* r : crows) {
      const auto day = g.window().day_of(r->purchase_date);
      auto [it, inserted] = groups.try_emplace({r->buyer, day});
      auto& p = it->second;
      if (inserted) {
        p.first = r->purchase_date;
        p.first_seller = r->seller;
        p.is_true.assign(c.candidates.size(), 0);
      } else if (r->purchase_date < p.first) {
        p.first = r->purchase_date;
        p.first_seller = r->seller;
      }
      p.is_true[seller_pos[r->seller]] = 1;
    }
    for (auto& [key, p] : groups) {
      if (key.second < 1) {
        ++st.dropped_first_day;
        continue;
      }
      Decision d;
      d.buyer_id = key.first;
      d.buyer = g.find_node(key.first).value_or(kNoNode);
      d.purchase_date = p.first;
      d.purchase_day = key.second;
      d.is_true = std::move(p.is_true);
      const NodeId seller = c.candidates[seller_pos[p.first_seller]].node;
      if (d.buyer != kNoNode && seller != kNoNode) {
        if (auto e = g.find_edge(EdgeKind::Trade, d.buyer, seller)) {
          const auto evs = g.events_of(g.edge(EdgeKind::Trade, *e));
          d.category = evs.front().trade.category_id;
          for (const auto& ev : evs)
            if (ev.time == d.purchase_date) {
              d.category = ev.trade.category_id;
              break;
            }
        }
      }
      c.decisions.push_back(std::move(d));
    }
    std::sort(c.decisions.begin(), c.decisions.end(), [](const Decision& a, const Decision& b) {
      return a.purchase_date != b.purchase_date ? a.purchase_date < b.purchase_date
                                                : a.buyer_id < b.buyer_id;
    });
    st.decisions += c.decisions.size();
    if (!c.decisions.empty()) out.push_back(std::move(c));
  }
  if (stats) *stats = st;
  return out;
}

namespace {

// Nodes that exist as of the cutoff: a visible trade or message, or any
// contact. PageRank is taken over these only, so nodes whose first activity
// lies in the future cannot shift the scores.
std::vector<char> active_nodes(const GraphView& v) {
  const auto& g = v.graph();
  std::vector<char> active(g.num_nodes(), 0);
  for (EdgeKind k : kAllKinds)
    for (const auto& e : g.edges(k))
      if (v.visible(e)) active[e.src] = active[e.dst] = 1;
  return active;
}

// Everything a decision's network features need at one cutoff.
struct Snapshot {
  GraphView view;
  Projection msg;
  std::vector<double> pr_trade, pr_msg, pr_contact;
  const Projection* contact;

  Snapshot(const TemporalMultigraph& g, Timestamp cutoff, const Projection& c)
      : view(g, cutoff), msg(Projection::build(view, EdgeKind::Message)), contact(&c) {
    const auto active = active_nodes(view);
    pr_trade = pagerank(view, EdgeKind::Trade, active);
    pr_msg = pagerank(view, EdgeKind::Message, active);
    pr_contact = pagerank(view, EdgeKind::Contact, active);
  }
};

std::uint64_t node_trade_volume(const GraphView& v, NodeId n) {
  const auto& g = v.graph();
  std::uint64_t total = 0;
  for (auto i : g.out_edges(EdgeKind::Trade, n)) total += v.event_count(g.edge(EdgeKind::Trade, i));
  for (auto i : g.in_edges(EdgeKind::Trade, n)) total += v.event_count(g.edge(EdgeKind::Trade, i));
  return total;
}

void mutual_features(const Projection& p, NodeId b, NodeId s, double& mutual, double& density) {
  const auto m = intersection(p.neighbors(b), p.neighbors(s));
  mutual = static_cast<double>(m.size());
  density = 0.0;
  if (m.size() >= 2) {
    const double possible = static_cast<double>(m.size()) * (m.size() - 1.0) / 2.0;
    density = static_cast<double>(p.edges_among(m)) / possible;
  }
}

std::vector<FeatureVector> compute(const BuyerSellerCluster& c, const Decision& d,
                                   const Snapshot& snap) {
  const auto& g = snap.view.graph();
  const GraphView& v = snap.view;
  const Timestamp cutoff = v.cutoff();
  const double window_days = static_cast<double>(g.window().length()) / kSecondsPerDay;
  const std::size_t k = c.candidates.size();
  std::vector<FeatureVector> out(k);

  std::vector<double> price(k), rating(k), hist(k);
  for (std::size_t j = 0; j < k; ++j) {
    price[j] = c.candidates[j].price;
    rating[j] = c.candidates[j].rating;
    hist[j] = c.candidates[j].historical_sold;
  }
  const auto price_rank = fractional_ranks(price, false);
  const auto rating_rank = fractional_ranks(rating, true);
  const auto hist_rank = fractional_ranks(hist, true);

  const NodeId b = d.buyer;
  const double buyer_volume = b == kNoNode ? 0.0 : static_cast<double>(node_trade_volume(v, b));

  for (std::size_t j = 0; j < k; ++j) {
    const auto& cand = c.candidates[j];
    auto& f = out[j];
    f.fill(0.0);
    f[0] = price_rank[j];
    f[1] = rating_rank[j];
    f[2] = hist_rank[j];
    f[3] = std::log1p(cand.historical_sold);
    f[4] = cand.inventory_sold;
    f[5] = cand.insurance;
    f[9] = window_days;
    f[10] = window_days;
    f[12] = buyer_volume;

    const NodeId s = cand.node;
    if (s == kNoNode) continue;
    f[13] = static_cast<double>(node_trade_volume(v, s));
    f[16] = snap.msg.local_clustering(s);
    f[17] = snap.contact->local_clustering(s);
    f[20] = snap.pr_trade[s];
    f[21] = snap.pr_msg[s];
    f[22] = snap.pr_contact[s];
    if (b == kNoNode || b == s) continue;

    std::optional<Timestamp> last_trade, last_msg;
    auto fold = [](std::optional<Timestamp>& acc, std::optional<Timestamp> t) {
      if (t && (!acc || *t > *acc)) acc = t;
    };
    double trades = 0, msgs = 0;
    for (auto [src, dst] : {std::pair{b, s}, std::pair{s, b}}) {
      if (const auto* e = v.find_edge(EdgeKind::Trade, src, dst)) {
        trades += static_cast<double>(v.event_count(*e));
        fold(last_trade, v.last_event_time(*e));
      }
      if (const auto* e = v.find_edge(EdgeKind::Message, src, dst)) {
        msgs += static_cast<double>(v.event_count(*e));
        fold(last_msg, v.last_event_time(*e));
      }
    }
    f[6] = trades;
    f[7] = msgs;
    f[8] = g.find_edge(EdgeKind::Contact, b, s) ? 1.0 : 0.0;
    if (last_trade) f[9] = static_cast<double>(cutoff - *last_trade) / kSecondsPerDay;
    if (last_msg) f[10] = static_cast<double>(cutoff - *last_msg) / kSecondsPerDay;
    mutual_features(snap.msg, b, s, f[14], f[18]);
    mutual_features(*snap.contact, b, s, f[15], f[19]);
  }

  std::vector<double> msg_volume(k);
  for (std::size_t j = 0; j < k; ++j) msg_volume[j] = out[j][kMsgVolume];
  const auto msg_rank = fractional_ranks(msg_volume, true);
  for (std::size_t j = 0; j < k; ++j) out[j][11] = msg_rank[j];
  return out;
}

ExtractedDecision describe(const BuyerSellerCluster& c, const Decision& d) {
  ExtractedDecision e;
  e.cluster_id = c.cluster_id;
  e.category = d.category;
  e.buyer_id = d.buyer_id;
  e.purchase_date = d.purchase_date;
  e.is_true = d.is_true;
  for (const auto& cand : c.candidates) {
    e.sellers.push_back(cand.seller);
    e.prices.push_back(cand.price);
  }
  return e;
}

}  // namespace

std::vector<ExtractedDecision> extract_features(const std::vector<BuyerSellerCluster>& clusters,
                                                const TemporalMultigraph& g, unsigned threads) {
  std::vector<ExtractedDecision> out;
  std::map<std::int64_t, std::vector<std::pair<std::size_t, const Decision*>>> by_day;
  std::vector<const BuyerSellerCluster*> owner;
  for (const auto& c : clusters)
    for (const auto& d : c.decisions) {
      by_day[d.purchase_day].push_back({out.size(), &d});
      owner.push_back(&c);
      out.push_back(describe(c, d));
    }
  if (out.empty()) return out;

  const GraphView all = full_view(g);
  const Projection contact = Projection::build(all, EdgeKind::Contact);

  for (const auto& [day, items] : by_day) {
    const Snapshot snap(g, feature_cutoff(g, day), contact);
    parallel_chunks(items.size(), threads, 16, [&](unsigned, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const auto [slot, decision] = items[i];
        out[slot].features = compute(*owner[slot], *decision, snap);
      }
    });
  }
  return out;
}

std::vector<FeatureVector> extract_features(const BuyerSellerCluster& cluster,
                                            const Decision& decision,
                                            const TemporalMultigraph& g) {
  const GraphView all = full_view(g);
  const Projection contact = Projection::build(all, EdgeKind::Contact);
  const Snapshot snap(g, feature_cutoff(g, decision.purchase_day), contact);
  return compute(cluster, decision, snap);
}

void write_features_csv(const std::vector<ExtractedDecision>& decisions, std::ostream& out) {
  out << "cluster_id,buyer,seller,purchase_date,is_true";
  for (int i = 0; i < kNumFeatures; ++i) out << ',' << kFeatureNames[i];
  out << '\n';
  for (const auto& d : decisions) {
    for (std::size_t j = 0; j < d.sellers.size(); ++j) {
      out << d.cluster_id << ',' << d.buyer_id << ',' << d.sellers[j] << ',' << d.purchase_date
          << ',' << (d.is_true[j] ? 1 : 0);
      for (double x : d.features[j]) out << ',' << csv::format_double(x);
      out << '\n';
    }
  }
}

}  // namespace triadkit::choice
