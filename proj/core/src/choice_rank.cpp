#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "triadkit/choice.hpp"
#include "triadkit/rng.hpp"

namespace triadkit::choice {

Standardizer Standardizer::fit(std::span<const ExtractedDecision> train) {
  Standardizer s;
  FeatureVector sum{}, sum2{};
  double n = 0;
  for (const auto& d : train)
    for (const auto& x : d.features) {
      for (int i = 0; i < kNumFeatures; ++i) sum[i] += x[i];
      n += 1;
    }
  for (int i = 0; i < kNumFeatures; ++i) s.mean[i] = n > 0 ? sum[i] / n : 0.0;
  for (const auto& d : train)
    for (const auto& x : d.features)
      for (int i = 0; i < kNumFeatures; ++i) sum2[i] += (x[i] - s.mean[i]) * (x[i] - s.mean[i]);
  for (int i = 0; i < kNumFeatures; ++i) {
    const double sd = n > 0 ? std::sqrt(sum2[i] / n) : 0.0;
    s.sd[i] = sd > 0 ? sd : 1.0;
  }
  return s;
}

FeatureVector Standardizer::apply(const FeatureVector& x) const {
  FeatureVector z;
  for (int i = 0; i < kNumFeatures; ++i) z[i] = (x[i] - mean[i]) / sd[i];
  return z;
}

double RankModel::score(const FeatureVector& x) const {
  double s = 0;
  for (int i = 0; i < kNumFeatures; ++i)
    if (mask[i]) s += weights[i] * x[i];
  return s;
}

RankModel train_ranker(std::vector<Group> groups, const FeatureMask& mask,
                       const RankerOptions& options) {
  if (options.epochs < 0 || !(options.eta0 > 0) || options.lambda < 0)
    throw std::invalid_argument("invalid ranker options");
  std::vector<Group> usable;
  for (auto& g : groups) {
    if (g.x.size() != g.is_true.size()) throw std::invalid_argument("group size mismatch");
    const auto pos = std::count(g.is_true.begin(), g.is_true.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(g.is_true.size())) continue;
    for (auto& x : g.x)
      for (int i = 0; i < kNumFeatures; ++i)
        if (!mask[i]) x[i] = 0.0;
    usable.push_back(std::move(g));
  }
  std::sort(usable.begin(), usable.end());
  usable.erase(std::unique(usable.begin(), usable.end()), usable.end());
  if (usable.empty()) throw std::invalid_argument("no training group with both true and false candidates");

  RankModel m;
  m.mask = mask;
  m.options = options;
  m.groups = usable.size();
  for (const auto& g : usable) {
    const auto pos = static_cast<std::size_t>(std::count(g.is_true.begin(), g.is_true.end(), 1));
    m.pairs += pos * (g.is_true.size() - pos);
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(usable.size());
  std::iota(order.begin(), order.end(), 0);
  auto& w = m.weights;
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto gi : order) {
      const auto& g = usable[gi];
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        if (!g.is_true[i]) continue;
        for (std::size_t j = 0; j < g.x.size(); ++j) {
          if (g.is_true[j]) continue;
          ++t;
          const double eta =
              options.eta0 / (1.0 + options.lambda * options.eta0 * static_cast<double>(t));
          const double shrink = std::max(0.0, 1.0 - 2.0 * eta * options.lambda);
          double margin = 0;
          for (int f = 0; f < kNumFeatures; ++f) {
            w[f] *= shrink;
            margin += w[f] * (g.x[i][f] - g.x[j][f]);
          }
          if (margin < 1.0)
            for (int f = 0; f < kNumFeatures; ++f) w[f] += eta * (g.x[i][f] - g.x[j][f]);
        }
      }
    }
  }
  return m;
}

std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::Random: return "random";
    case Baseline::MinPrice: return "min_price";
    case Baseline::MostMsg: return "most_msg";
  }
  return "?";
}

std::vector<std::size_t> rank_by_scores(std::span<const double> scores, std::uint64_t seed) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::size_t> baseline_rank(Baseline kind, const ExtractedDecision& d,
                                       std::uint64_t seed) {
  const std::size_t k = d.sellers.size();
  std::vector<double> scores(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    if (kind == Baseline::MinPrice) scores[j] = -d.prices[j];
    if (kind == Baseline::MostMsg) scores[j] = d.features.at(j)[kMsgVolume];
  }
  return rank_by_scores(scores, seed);
}

std::size_t true_rank(std::span<const std::size_t> ordering, std::span<const char> is_true) {
  for (std::size_t pos = 0; pos < ordering.size(); ++pos)
    if (is_true[ordering[pos]]) return pos + 1;
  throw std::invalid_argument("decision without a true seller");
}

namespace {

struct Acc {
  std::size_t n = 0, hits = 0;
  double rank_sum = 0, rr_sum = 0;
  void add(std::size_t r) {
    ++n;
    hits += r == 1;
    rank_sum += static_cast<double>(r);
    rr_sum += 1.0 / static_cast<double>(r);
  }
  MetricBucket finish() const {
    MetricBucket b;
    b.n = n;
    if (n) {
      b.p_at_1 = static_cast<double>(hits) / static_cast<double>(n);
      b.mean_rank = rank_sum / static_cast<double>(n);
      b.mrr = rr_sum / static_cast<double>(n);
    }
    return b;
  }
};

}  // namespace

RankMetrics evaluate(std::span<const std::size_t> ranks, std::span<const std::size_t> ks) {
  if (ranks.size() != ks.size()) throw std::invalid_argument("ranks/ks size mismatch");
  Acc all;
  std::map<std::size_t, Acc> per_k;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    all.add(ranks[i]);
    per_k[ks[i]].add(ranks[i]);
  }
  RankMetrics m;
  m.overall = all.finish();
  for (const auto& [k, a] : per_k) m.per_k[k] = a.finish();
  return m;
}

RankMetrics evaluate(const std::vector<std::vector<std::size_t>>& orderings,
                     const std::vector<std::vector<char>>& truth) {
  if (orderings.size() != truth.size()) throw std::invalid_argument("orderings/truth size mismatch");
  std::vector<std::size_t> ranks, ks;
  for (std::size_t i = 0; i < orderings.size(); ++i) {
    ranks.push_back(true_rank(orderings[i], truth[i]));
    ks.push_back(truth[i].size());
  }
  return evaluate(ranks, ks);
}

namespace {

FeatureMask mask_range(int lo, int hi, FeatureMask m = {}) {
  for (int i = lo; i <= hi; ++i) m[i - 1] = true;
  return m;
}

const std::vector<Subset>& subsets() {
  static const std::vector<Subset> s = [] {
    const FeatureMask meta = mask_range(1, 6);
    auto with = [&](std::initializer_list<int> extra) {
      FeatureMask m = meta;
      for (int i : extra) m[i - 1] = true;
      return m;
    };
    return std::vector<Subset>{
        {"All Features", mask_range(1, 23)},
        {"Only Network", mask_range(7, 23)},
        {"Only Meta", meta},
        {"Meta + Msgs", with({8, 11, 12, 15, 17, 19, 22})},
        {"Meta + Trades", with({7, 10, 13, 14, 21})},
        {"Meta + Contacts", with({9, 16, 18, 20, 23})},
        {"Meta + Direct", mask_range(1, 14)},
        {"Meta + Indirect", mask_range(15, 23, meta)},
    };
  }();
  return s;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

Group make_group(const ExtractedDecision& d, const Standardizer& s) {
  Group g;
  for (const auto& x : d.features) g.x.push_back(s.apply(x));
  g.is_true = d.is_true;
  return g;
}

}  // namespace

std::span<const Subset> named_subsets() { return subsets(); }

const Subset& subset_by_name(std::string_view name) {
  for (const auto& s : subsets())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown feature subset '" + std::string(name) + "'");
}

bool is_test_cluster(std::string_view cluster_id, std::uint64_t split_seed) {
  return splitmix64(fnv1a(cluster_id) ^ splitmix64(split_seed)) % 4 == 0;
}

ExperimentResult run_experiment(const std::vector<ExtractedDecision>& decisions,
                                const Subset& subset, const ExperimentOptions& options) {
  std::vector<ExtractedDecision> train, test;
  for (const auto& d : decisions)
    (is_test_cluster(d.cluster_id, options.split_seed) ? test : train).push_back(d);

  ExperimentResult r;
  r.subset = subset.name;
  r.train_decisions = train.size();
  r.test_decisions = test.size();
  const Standardizer std_fit = Standardizer::fit(train);

  std::vector<Group> groups;
  for (const auto& d : train) groups.push_back(make_group(d, std_fit));
  r.global_model = train_ranker(groups, subset.mask, options.ranker);

  if (options.per_category) {
    std::map<std::int32_t, std::vector<Group>> by_cat;
    for (std::size_t i = 0; i < train.size(); ++i) by_cat[train[i].category].push_back(groups[i]);
    for (auto& [cat, gs] : by_cat) {
      try {
        r.category_models.emplace(cat, train_ranker(std::move(gs), subset.mask, options.ranker));
      } catch (const std::invalid_argument&) {
        // category without a usable group falls back to the global model
      }
    }
  }

  auto model_for = [&](std::int32_t cat) -> const RankModel& {
    if (options.per_category) {
      auto it = r.category_models.find(cat);
      if (it != r.category_models.end()) return it->second;
    }
    return r.global_model;
  };
  auto score_all = [&](const std::vector<ExtractedDecision>& ds) {
    std::vector<std::size_t> ranks, ks;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto& m = model_for(ds[i].category);
      std::vector<double> scores;
      for (const auto& x : ds[i].features) scores.push_back(m.score(std_fit.apply(x)));
      const auto order = rank_by_scores(scores, derive_seed(options.split_seed, i));
      ranks.push_back(true_rank(order, ds[i].is_true));
      ks.push_back(ds[i].sellers.size());
    }
    return evaluate(ranks, ks);
  };
  r.model = score_all(test);
  r.train_model = score_all(train);

  for (Baseline b : {Baseline::Random, Baseline::MinPrice, Baseline::MostMsg}) {
    std::vector<std::size_t> ranks, ks;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto order = baseline_rank(b, test[i], derive_seed(options.split_seed, i));
      ranks.push_back(true_rank(order, test[i].is_true));
      ks.push_back(test[i].sellers.size());
    }
    r.baselines[b] = evaluate(ranks, ks);
  }
  return r;
}

}  // namespace triadkit::choice
