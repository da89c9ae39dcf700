#include "triadkit/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <unordered_map>

#include "triadkit/csv.hpp"
#include "triadkit/dataset_io.hpp"
#include "triadkit/rng.hpp"

namespace triadkit::syngen {

choice::FeatureVector SynthConfig::default_choice_weights() {
  choice::FeatureVector w{};
  w[7] = 2.0;    // buyer-seller message volume
  w[11] = -1.0;  // message rank (0 = most messaged)
  w[0] = -0.3;   // price rank (0 = cheapest)
  w[1] = -0.2;   // rating rank (0 = best rated)
  return w;
}

namespace {

using Setter = std::function<void(SynthConfig&, const std::string&, std::size_t)>;

template <class T>
Setter integer(T SynthConfig::*field) {
  return [field](SynthConfig& c, const std::string& v, std::size_t line) {
    const auto x = csv::parse_int(v, line, "integer value");
    if constexpr (std::is_unsigned_v<T>) {
      if (x < 0) throw ValidationError("value must be >= 0", line);
    }
    c.*field = static_cast<T>(x);
  };
}

Setter real(double SynthConfig::*field) {
  return [field](SynthConfig& c, const std::string& v, std::size_t line) {
    c.*field = csv::parse_double(v, line, "real value");
  };
}

// "k:v,k:v" pairs.
std::vector<std::pair<std::int64_t, double>> parse_pairs(const std::string& v, std::size_t line) {
  std::vector<std::pair<std::int64_t, double>> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("expected key:value in '" + item + "'", line);
    out.emplace_back(csv::parse_int(item.substr(0, colon), line, "key"),
                     csv::parse_double(item.substr(colon + 1), line, "value"));
  }
  return out;
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"seed", integer(&SynthConfig::seed)},
      {"n_buyers", integer(&SynthConfig::n_buyers)},
      {"n_sellers", integer(&SynthConfig::n_sellers)},
      {"seller_exponent", real(&SynthConfig::seller_exponent)},
      {"window_days", integer(&SynthConfig::window_days)},
      {"t_start", integer(&SynthConfig::t_start)},
      {"n_categories", integer(&SynthConfig::n_categories)},
      {"friends_per_buyer", real(&SynthConfig::friends_per_buyer)},
      {"homophily", real(&SynthConfig::homophily)},
      {"n_communities", integer(&SynthConfig::n_communities)},
      {"contact_prob", real(&SynthConfig::contact_prob)},
      {"base_message_rate", real(&SynthConfig::base_message_rate)},
      {"trades_per_buyer", real(&SynthConfig::trades_per_buyer)},
      {"bs_message_prob", real(&SynthConfig::bs_message_prob)},
      {"bs_message_mean", real(&SynthConfig::bs_message_mean)},
      {"buyer_buyer_trade_prob", real(&SynthConfig::buyer_buyer_trade_prob)},
      {"p_plant", real(&SynthConfig::p_plant)},
      {"plant_mode",
       [](SynthConfig& c, const std::string& v, std::size_t line) {
         if (v == "constant") c.plant_mode = PlantMode::Constant;
         else if (v == "linear") c.plant_mode = PlantMode::Linear;
         else throw ValidationError("plant_mode must be constant or linear", line);
       }},
      {"category_p_plant",
       [](SynthConfig& c, const std::string& v, std::size_t line) {
         c.category_p_plant.clear();
         for (auto [k, p] : parse_pairs(v, line)) c.category_p_plant[static_cast<int>(k)] = p;
       }},
      {"burst_messages", integer(&SynthConfig::burst_messages)},
      {"n_trust_clusters", integer(&SynthConfig::n_trust_clusters)},
      {"trust_min_listings", integer(&SynthConfig::trust_min_listings)},
      {"trust_max_listings", integer(&SynthConfig::trust_max_listings)},
      {"trust_a", real(&SynthConfig::trust_a)},
      {"trust_b", real(&SynthConfig::trust_b)},
      {"trust_c", real(&SynthConfig::trust_c)},
      {"trust_noise", real(&SynthConfig::trust_noise)},
      {"n_choice_clusters", integer(&SynthConfig::n_choice_clusters)},
      {"choice_buyers_per_cluster", real(&SynthConfig::choice_buyers_per_cluster)},
      {"choice_msg_prob", real(&SynthConfig::choice_msg_prob)},
      {"choice_msg_candidate_prob", real(&SynthConfig::choice_msg_candidate_prob)},
      {"choice_weights",
       [](SynthConfig& c, const std::string& v, std::size_t line) {
         c.choice_weights.fill(0.0);
         for (auto [k, w] : parse_pairs(v, line)) {
           if (k < 1 || k > choice::kNumFeatures)
             throw ValidationError("choice weight index must be in 1..23", line);
           c.choice_weights[k - 1] = w;
         }
       }},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SynthConfig parse_config(const std::string& text) {
  SynthConfig cfg;
  std::stringstream ss(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ValidationError("expected key=value", line);
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    const auto& table = setters();
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& p) { return p.first == key; });
    if (it == table.end()) throw ValidationError("unknown config key '" + key + "'", line);
    it->second(cfg, value, line);
  }
  return cfg;
}

SynthConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const SynthConfig& c) {
  std::ostringstream o;
  auto d = [](double x) { return csv::format_double(x); };
  o << "seed=" << c.seed << "\n"
    << "n_buyers=" << c.n_buyers << "\n"
    << "n_sellers=" << c.n_sellers << "\n"
    << "seller_exponent=" << d(c.seller_exponent) << "\n"
    << "window_days=" << c.window_days << "\n"
    << "t_start=" << c.t_start << "\n"
    << "n_categories=" << c.n_categories << "\n"
    << "friends_per_buyer=" << d(c.friends_per_buyer) << "\n"
    << "homophily=" << d(c.homophily) << "\n"
    << "n_communities=" << c.n_communities << "\n"
    << "contact_prob=" << d(c.contact_prob) << "\n"
    << "base_message_rate=" << d(c.base_message_rate) << "\n"
    << "trades_per_buyer=" << d(c.trades_per_buyer) << "\n"
    << "bs_message_prob=" << d(c.bs_message_prob) << "\n"
    << "bs_message_mean=" << d(c.bs_message_mean) << "\n"
    << "buyer_buyer_trade_prob=" << d(c.buyer_buyer_trade_prob) << "\n"
    << "p_plant=" << d(c.p_plant) << "\n"
    << "plant_mode=" << (c.plant_mode == PlantMode::Linear ? "linear" : "constant") << "\n";
  o << "category_p_plant=";
  bool first = true;
  for (auto [k, p] : c.category_p_plant) {
    o << (first ? "" : ",") << k << ':' << d(p);
    first = false;
  }
  o << "\n"
    << "burst_messages=" << c.burst_messages << "\n"
    << "n_trust_clusters=" << c.n_trust_clusters << "\n"
    << "trust_min_listings=" << c.trust_min_listings << "\n"
    << "trust_max_listings=" << c.trust_max_listings << "\n"
    << "trust_a=" << d(c.trust_a) << "\n"
    << "trust_b=" << d(c.trust_b) << "\n"
    << "trust_c=" << d(c.trust_c) << "\n"
    << "trust_noise=" << d(c.trust_noise) << "\n"
    << "n_choice_clusters=" << c.n_choice_clusters << "\n"
    << "choice_buyers_per_cluster=" << d(c.choice_buyers_per_cluster) << "\n"
    << "choice_msg_prob=" << d(c.choice_msg_prob) << "\n"
    << "choice_msg_candidate_prob=" << d(c.choice_msg_candidate_prob) << "\n";
  o << "choice_weights=";
  first = true;
  for (int i = 0; i < choice::kNumFeatures; ++i) {
    if (c.choice_weights[i] == 0) continue;
    o << (first ? "" : ",") << i + 1 << ':' << d(c.choice_weights[i]);
    first = false;
  }
  o << "\n";
  return o.str();
}

void validate(const SynthConfig& c) {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0 && p <= 1)) throw ValidationError(std::string(what) + " must lie in [0,1]");
  };
  auto nonneg = [](double x, const char* what) {
    if (!(x >= 0) || !std::isfinite(x)) throw ValidationError(std::string(what) + " must be >= 0");
  };
  if (c.n_buyers < 2 || c.n_sellers < 2) throw ValidationError("n_buyers and n_sellers must be >= 2");
  if (c.window_days < 8) throw ValidationError("window_days must be >= 8");
  if (c.n_categories < 1 || c.n_communities < 1)
    throw ValidationError("n_categories and n_communities must be >= 1");
  prob(c.homophily, "homophily");
  prob(c.contact_prob, "contact_prob");
  prob(c.bs_message_prob, "bs_message_prob");
  prob(c.buyer_buyer_trade_prob, "buyer_buyer_trade_prob");
  prob(c.p_plant, "p_plant");
  prob(c.choice_msg_prob, "choice_msg_prob");
  prob(c.choice_msg_candidate_prob, "choice_msg_candidate_prob");
  for (auto [k, p] : c.category_p_plant) prob(p, "category_p_plant");
  nonneg(c.seller_exponent, "seller_exponent");
  nonneg(c.friends_per_buyer, "friends_per_buyer");
  nonneg(c.base_message_rate, "base_message_rate");
  nonneg(c.trades_per_buyer, "trades_per_buyer");
  nonneg(c.bs_message_mean, "bs_message_mean");
  nonneg(c.trust_noise, "trust_noise");
  nonneg(c.choice_buyers_per_cluster, "choice_buyers_per_cluster");
  if (c.burst_messages < 0) throw ValidationError("burst_messages must be >= 0");
  if (!(c.trust_b > 0)) throw ValidationError("trust_b must be > 0");
  if (c.trust_min_listings < 2 || c.trust_max_listings < c.trust_min_listings)
    throw ValidationError("trust listing bounds must satisfy 2 <= min <= max");
  bool any_plant = c.p_plant > 0;
  for (auto [k, p] : c.category_p_plant) any_plant = any_plant || p > 0;
  if (any_plant && (c.base_message_rate == 0 || c.friends_per_buyer == 0))
    throw ValidationError("information passing plant needs buyer-buyer messages");
}

namespace {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(derive_seed(seed, 0x5e7)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool coin(double p) { return uniform() < p; }
  template <class Int>
  Int range(Int lo, Int hi) {  // inclusive
    return std::uniform_int_distribution<Int>(lo, hi)(rng_);
  }
  int poisson(double mean) {
    if (mean <= 0) return 0;
    return std::poisson_distribution<int>(mean)(rng_);
  }
  double normal(double mu, double sd) {
    if (sd <= 0) return mu;
    return std::normal_distribution<double>(mu, sd)(rng_);
  }
  double exponential(double mean) { return std::exponential_distribution<double>(1.0 / mean)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

constexpr std::uint64_t key(NodeId a, NodeId b) { return (std::uint64_t{a} << 32) | b; }

std::string fmt_id(char prefix, std::size_t i) { return prefix + std::to_string(i); }

}  // namespace

SyntheticDataset generate(const SynthConfig& cfg) {
  validate(cfg);
  Gen gen(cfg.seed);
  const Window win{cfg.t_start, cfg.t_start + Timestamp{cfg.window_days} * kSecondsPerDay - 1};
  const std::size_t nb = cfg.n_buyers, ns = cfg.n_sellers;
  auto seller_node = [&](std::size_t j) { return static_cast<NodeId>(nb + j); };
  auto uniform_time = [&] { return gen.range<Timestamp>(win.start, win.end); };

  std::vector<EdgeEvent> events;
  std::vector<ContactPair> contacts;
  auto add_trade = [&](NodeId b, NodeId s, Timestamp t, double price, int cat, std::string product) {
    EdgeEvent e;
    e.kind = EdgeKind::Trade;
    e.src = b;
    e.dst = s;
    e.time = t;
    e.trade.price = std::max(0.01, std::round(price * 100.0) / 100.0);
    e.trade.category_id = cat;
    e.trade.product_id = std::move(product);
    e.trade.quantity = 1 + gen.poisson(0.3);
    events.push_back(std::move(e));
  };
  auto add_message = [&](NodeId a, NodeId b, Timestamp t) {
    EdgeEvent e;
    e.kind = EdgeKind::Message;
    e.src = a;
    e.dst = b;
    e.time = t;
    events.push_back(std::move(e));
  };

  // Buyer friendships with community homophily; messages only on friend pairs.
  std::vector<std::pair<NodeId, NodeId>> friends;
  const std::size_t ncomm = std::min(cfg.n_communities, nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const int m = gen.poisson(cfg.friends_per_buyer / 2.0);
    const std::size_t comm = i % ncomm;
    const std::size_t comm_size = (nb - comm + ncomm - 1) / ncomm;
    for (int f = 0; f < m; ++f) {
      std::size_t j = gen.coin(cfg.homophily) ? comm + ncomm * gen.range<std::size_t>(0, comm_size - 1)
                                              : gen.range<std::size_t>(0, nb - 1);
      if (j == i) continue;
      friends.emplace_back(static_cast<NodeId>(std::min(i, j)), static_cast<NodeId>(std::max(i, j)));
    }
  }
  std::sort(friends.begin(), friends.end());
  friends.erase(std::unique(friends.begin(), friends.end()), friends.end());

  std::vector<std::vector<NodeId>> friend_list(nb);
  std::unordered_map<std::uint64_t, std::vector<Timestamp>> pair_msgs;  // ordered pair
  for (auto [a, b] : friends) {
    friend_list[a].push_back(b);
    friend_list[b].push_back(a);
    if (gen.coin(cfg.contact_prob)) contacts.emplace_back(a, b);
    const int n = gen.poisson(cfg.base_message_rate * gen.exponential(1.0));
    for (int k = 0; k < n; ++k) {
      const Timestamp t = uniform_time();
      const bool forward = gen.coin(0.5);
      const NodeId s = forward ? a : b, d = forward ? b : a;
      add_message(s, d, t);
      pair_msgs[key(s, d)].push_back(t);
    }
  }
  for (auto& [k, v] : pair_msgs) std::sort(v.begin(), v.end());

  // Sellers: Zipf popularity, one main category each.
  std::vector<double> popularity(ns);
  for (std::size_t j = 0; j < ns; ++j) popularity[j] = std::pow(static_cast<double>(j + 1), -cfg.seller_exponent);
  std::discrete_distribution<std::size_t> pick_seller(popularity.begin(), popularity.end());
  auto seller_category = [&](std::size_t j) { return static_cast<int>(j % cfg.n_categories); };
  auto category_base = [](int cat) { return 1.5 * std::pow(2.0, cat % 8); };

  struct BgTrade {
    NodeId b, s;
    Timestamp t;
    int cat;
    double price;
  };
  std::vector<BgTrade> bg;
  for (std::size_t i = 0; i < nb; ++i) {
    const int n = gen.poisson(cfg.trades_per_buyer);
    for (int k = 0; k < n; ++k) {
      const std::size_t j = pick_seller(gen.engine());
      const int cat = seller_category(j);
      const double price = category_base(cat) * std::exp(gen.normal(0.0, 0.5));
      const Timestamp t = uniform_time();
      const NodeId b = static_cast<NodeId>(i), s = seller_node(j);
      add_trade(b, s, t, price, cat, "p" + std::to_string(cat) + "_" + std::to_string(j));
      bg.push_back({b, s, t, cat, price});
      if (gen.coin(cfg.bs_message_prob)) {
        const int m = 1 + gen.poisson(std::max(0.0, cfg.bs_message_mean - 1.0));
        for (int q = 0; q < m; ++q) {
          const double u = gen.uniform();
          const int off = u < 0.6 ? 0 : u < 0.9 ? gen.range(1, 3) : -gen.range(1, 3);
          const Timestamp tm = t + off * kSecondsPerDay + gen.range<Timestamp>(-10800, 10800);
          const bool from_buyer = gen.coin(0.7);
          if (!win.contains(tm)) continue;
          add_message(from_buyer ? b : s, from_buyer ? s : b, tm);
        }
      }
    }
    if (cfg.buyer_buyer_trade_prob > 0 && gen.coin(cfg.buyer_buyer_trade_prob) &&
        !friend_list[i].empty()) {
      const NodeId f = friend_list[i][gen.range<std::size_t>(0, friend_list[i].size() - 1)];
      add_trade(static_cast<NodeId>(i), f, uniform_time(), 5.0 * std::exp(gen.normal(0.0, 0.5)), 0,
                "pbb");
    }
  }

  // Information passing plant on each buyer's first purchase from a seller.
  SyntheticDataset ds;
  std::sort(bg.begin(), bg.end(), [](const BgTrade& x, const BgTrade& y) {
    return std::tie(x.b, x.s, x.t) < std::tie(y.b, y.s, y.t);
  });
  const Timestamp strength_window = 3 * kSecondsPerDay;
  for (std::size_t i = 0; i < bg.size(); ++i) {
    if (i > 0 && bg[i].b == bg[i - 1].b && bg[i].s == bg[i - 1].s) continue;
    const auto& tr = bg[i];
    auto ov = cfg.category_p_plant.find(tr.cat);
    const double p = ov != cfg.category_p_plant.end() ? ov->second : cfg.p_plant;
    if (p <= 0) continue;
    for (NodeId b2 : friend_list[tr.b]) {
      auto it = pair_msgs.find(key(tr.b, b2));
      if (it == pair_msgs.end()) continue;
      const auto& times = it->second;
      auto next = std::upper_bound(times.begin(), times.end(), tr.t);
      if (next == times.end()) continue;
      const Timestamp t2 = *next;
      double prob = p;
      if (cfg.plant_mode == PlantMode::Linear) {
        std::size_t m = 0;
        for (auto k : {key(tr.b, b2), key(b2, tr.b)}) {
          auto pm = pair_msgs.find(k);
          if (pm == pair_msgs.end()) continue;
          const auto& v = pm->second;
          m += static_cast<std::size_t>(
              std::upper_bound(v.begin(), v.end(), tr.t + strength_window) -
              std::lower_bound(v.begin(), v.end(), tr.t - strength_window));
        }
        prob = std::min(1.0, p * static_cast<double>(m));
      }
      if (!gen.coin(prob)) continue;
      const Timestamp t3 = t2 + gen.range<Timestamp>(1, 2 * kSecondsPerDay);
      if (t3 > win.end) continue;
      add_trade(b2, tr.s, t3, tr.price * std::exp(gen.normal(0.0, 0.05)), tr.cat,
                "p" + std::to_string(tr.cat) + "_" + std::to_string(tr.s - nb));
      ++ds.planted_trades;
      // Bursts stay inside (t2, t3) and inside the Between window of (t1, t3).
      const Timestamp between_end =
          tr.t + (win.day_of(t3) - win.day_of(tr.t)) * kSecondsPerDay;
      const Timestamp hi = std::min(t3, between_end);
      for (int k = 0; k < cfg.burst_messages && hi - t2 > 1; ++k) {
        const Timestamp tb = gen.range<Timestamp>(t2 + 1, hi - 1);
        const bool forward = gen.coin(0.5);
        add_message(forward ? tr.b : b2, forward ? b2 : tr.b, tb);
        ++ds.burst_messages;
      }
    }
  }

  // Seller ratings and price-of-trust listings.
  std::vector<double> seller_rating(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    const double r = std::clamp(100.0 - gen.exponential(1.5), 85.0, 100.0);
    seller_rating[j] = std::round(r * 10.0) / 10.0;
    ds.ratings[fmt_id('s', j)] = seller_rating[j];
  }
  auto planted_dev = [&](double r) { return cfg.trust_a * std::pow(r / 100.0, cfg.trust_b) + cfg.trust_c; };
  auto distinct_sellers = [&](std::size_t k) {
    std::vector<std::size_t> picked;
    k = std::min(k, ns);
    while (picked.size() < k) {
      // popularity-weighted until it stalls, then uniform
      std::size_t j = picked.size() < ns / 2 ? pick_seller(gen.engine()) : gen.range<std::size_t>(0, ns - 1);
      if (std::find(picked.begin(), picked.end(), j) == picked.end()) picked.push_back(j);
    }
    return picked;
  };
  for (std::size_t q = 0; q < cfg.n_trust_clusters; ++q) {
    const auto sellers = distinct_sellers(
        static_cast<std::size_t>(gen.range(cfg.trust_min_listings, cfg.trust_max_listings)));
    const double base = category_base(gen.range(0, cfg.n_categories - 1)) * std::exp(gen.normal(0.0, 0.3));
    for (std::size_t k = 0; k < sellers.size(); ++k) {
      const double d = planted_dev(seller_rating[sellers[k]]) + gen.normal(0.0, cfg.trust_noise);
      const double price = std::max(0.01, base * (1.0 + d / 100.0));
      ds.listings.push_back({"tc" + std::to_string(q), fmt_id('s', sellers[k]),
                             "i" + std::to_string(q) + "_" + std::to_string(k), price});
    }
  }
  {
    const double ratio = -cfg.trust_c / cfg.trust_a;
    ds.planted_trust_crossing = std::numeric_limits<double>::quiet_NaN();
    if (cfg.trust_a != 0 && ratio > 0) {
      const double r0 = 100.0 * std::pow(ratio, 1.0 / cfg.trust_b);
      if (r0 > 0 && r0 <= 100) ds.planted_trust_crossing = r0;
    }
  }

  // Consumer choice: candidates, pre-purchase contact, then softmax choice
  // on features of the graph as it stands before any choice trade.
  struct PendingDecision {
    std::size_t cluster;
    NodeId buyer;
    Timestamp when;
    std::int64_t day;
  };
  std::vector<choice::BuyerSellerCluster> clusters;
  std::vector<int> cluster_category;
  std::vector<PendingDecision> pending;
  std::vector<choice::ChoiceRow> rows;
  for (std::size_t q = 0; q < cfg.n_choice_clusters; ++q) {
    choice::BuyerSellerCluster c;
    c.cluster_id = "cc" + std::to_string(q);
    const int cat = gen.range(0, cfg.n_categories - 1);
    auto sellers = distinct_sellers(static_cast<std::size_t>(gen.range(2, 10)));
    std::sort(sellers.begin(), sellers.end(),
              [&](std::size_t x, std::size_t y) { return fmt_id('s', x) < fmt_id('s', y); });
    const double base = category_base(cat);
    for (std::size_t j : sellers) {
      choice::Candidate cand;
      cand.node = seller_node(j);
      cand.seller = fmt_id('s', j);
      cand.price = std::round(base * std::exp(gen.normal(0.0, 0.25)) * 100.0) / 100.0;
      cand.rating = seller_rating[j];
      cand.historical_sold = std::floor(std::exp(gen.normal(3.0, 1.2)));
      cand.inventory_sold = gen.poisson(20.0);
      cand.insurance = gen.coin(0.5) ? 1.0 : 0.0;
      c.candidates.push_back(cand);
    }
    // Day-0 purchases make every candidate visible in the cluster's rows;
    // first-day decisions have no prior snapshot and are never scored.
    for (const auto& cand : c.candidates) {
      const NodeId b = gen.range<NodeId>(0, static_cast<NodeId>(nb - 1));
      const Timestamp t = win.start + gen.range<Timestamp>(0, kSecondsPerDay - 1);
      add_trade(b, cand.node, t, cand.price, cat, c.cluster_id);
      rows.push_back({c.cluster_id, fmt_id('b', b), cand.seller, t, cand.price, cand.rating,
                      cand.historical_sold, cand.inventory_sold, cand.insurance});
    }
    const int n_dec = std::max(1, gen.poisson(cfg.choice_buyers_per_cluster));
    for (int k = 0; k < n_dec; ++k) {
      const NodeId b = gen.range<NodeId>(0, static_cast<NodeId>(nb - 1));
      const std::int64_t day = gen.range<std::int64_t>(7, cfg.window_days - 1);
      const Timestamp when = win.day_start(day) + gen.range<Timestamp>(0, kSecondsPerDay - 1);
      if (gen.coin(cfg.choice_msg_prob)) {
        for (const auto& cand : c.candidates) {
          if (!gen.coin(cfg.choice_msg_candidate_prob)) continue;
          const int m = 1 + gen.poisson(2.0);
          for (int r = 0; r < m; ++r) {
            const Timestamp t = gen.range<Timestamp>(win.start, win.day_start(day) - 1);
            const bool from_buyer = gen.coin(0.7);
            add_message(from_buyer ? b : cand.node, from_buyer ? cand.node : b, t);
          }
        }
      }
      choice::Decision d;
      d.buyer = b;
      d.buyer_id = fmt_id('b', b);
      d.purchase_date = when;
      d.purchase_day = day;
      d.is_true.assign(c.candidates.size(), 0);
      d.category = cat;
      c.decisions.push_back(d);
      pending.push_back({q, b, when, day});
    }
    clusters.push_back(std::move(c));
    cluster_category.push_back(cat);
  }

  std::vector<std::string> ids;
  ids.reserve(nb + ns);
  for (std::size_t i = 0; i < nb; ++i) ids.push_back(fmt_id('b', i));
  for (std::size_t j = 0; j < ns; ++j) ids.push_back(fmt_id('s', j));

  if (!pending.empty()) {
    const auto before = TemporalMultigraph::build(nb + ns, win, events, contacts, ids);
    const auto feats = choice::extract_features(clusters, before, 1);
    const auto zfit = choice::Standardizer::fit(feats);
    for (std::size_t i = 0; i < feats.size(); ++i) {
      const auto& p = pending[i];
      const auto& c = clusters[p.cluster];
      std::vector<double> u;
      for (const auto& x : feats[i].features) {
        const auto z = zfit.apply(x);
        double s = 0;
        for (int f = 0; f < choice::kNumFeatures; ++f) s += cfg.choice_weights[f] * z[f];
        u.push_back(s);
      }
      const double mx = *std::max_element(u.begin(), u.end());
      for (auto& x : u) x = std::exp(x - mx);
      std::discrete_distribution<std::size_t> pick(u.begin(), u.end());
      const auto& cand = c.candidates[pick(gen.engine())];
      add_trade(p.buyer, cand.node, p.when, cand.price, cluster_category[p.cluster], c.cluster_id);
      rows.push_back({c.cluster_id, fmt_id('b', p.buyer), cand.seller, p.when, cand.price,
                      cand.rating, cand.historical_sold, cand.inventory_sold, cand.insurance});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const choice::ChoiceRow& a, const choice::ChoiceRow& b) {
    return std::tie(a.cluster_id, a.purchase_date, a.buyer, a.seller) <
           std::tie(b.cluster_id, b.purchase_date, b.buyer, b.seller);
  });
  ds.choice_rows = std::move(rows);
  ds.graph = TemporalMultigraph::build(nb + ns, win, std::move(events), std::move(contacts), std::move(ids));

  nlohmann::ordered_json truth;
  truth["config"] = to_config_text(cfg);
  truth["window"] = {{"start", win.start}, {"end", win.end}};
  truth["buyers"] = nb;
  truth["sellers"] = ns;
  truth["infopass"] = {{"p_plant", cfg.p_plant},
                       {"plant_mode", cfg.plant_mode == PlantMode::Linear ? "linear" : "constant"},
                       {"planted_trades", ds.planted_trades},
                       {"burst_messages", ds.burst_messages},
                       {"delta_max_seconds", 2 * kSecondsPerDay}};
  nlohmann::ordered_json cat_plants = nlohmann::ordered_json::object();
  for (auto [k, p] : cfg.category_p_plant) cat_plants[std::to_string(k)] = p;
  truth["infopass"]["category_p_plant"] = cat_plants;
  truth["trust"] = {{"a", cfg.trust_a}, {"b", cfg.trust_b}, {"c", cfg.trust_c},
                    {"noise", cfg.trust_noise}};
  truth["trust"]["zero_crossing"] =
      std::isnan(ds.planted_trust_crossing) ? nlohmann::ordered_json(nullptr)
                                            : nlohmann::ordered_json(ds.planted_trust_crossing);
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  for (int f = 0; f < choice::kNumFeatures; ++f)
    weights[std::string(choice::feature_name(f))] = cfg.choice_weights[f];
  truth["choice"] = {{"weights", weights}, {"clusters", cfg.n_choice_clusters},
                     {"decisions", pending.size()}};
  ds.truth_json = truth.dump(2) + "\n";
  return ds;
}

void write_listings_csv(const std::vector<trust::Listing>& listings, std::ostream& out) {
  out << "cluster_id,seller,item_id,price\n";
  for (const auto& l : listings)
    out << l.cluster_id << ',' << l.seller << ',' << l.item_id << ',' << csv::format_double(l.price)
        << '\n';
}

void write_ratings_csv(const trust::RatingTable& ratings, std::ostream& out) {
  std::vector<std::pair<std::string, double>> sorted(ratings.begin(), ratings.end());
  std::sort(sorted.begin(), sorted.end());
  out << "seller,rating_percent\n";
  for (const auto& [s, r] : sorted) out << s << ',' << csv::format_double(r) << '\n';
}

void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("events.csv");
    write_events_csv(ds.graph, f);
  }
  {
    auto f = open("contacts.csv");
    write_contacts_csv(ds.graph, f);
  }
  {
    auto f = open("clusters.csv");
    write_listings_csv(ds.listings, f);
  }
  {
    auto f = open("ratings.csv");
    write_ratings_csv(ds.ratings, f);
  }
  {
    auto f = open("choice_clusters.csv");
    choice::write_choice_rows(ds.choice_rows, f);
  }
  {
    auto f = open("truth.json");
    f << ds.truth_json;
  }
}

}  // namespace triadkit::syngen
