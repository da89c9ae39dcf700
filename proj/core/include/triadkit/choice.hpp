#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triadkit/graph.hpp"

namespace triadkit::choice {

inline constexpr int kNumFeatures = 23;
using FeatureVector = std::array<double, kNumFeatures>;
using FeatureMask = std::array<bool, kNumFeatures>;

/// Short snake_case name of feature i (0-based; feature "1" is index 0).
std::string_view feature_name(int i);

// 0-based positions used outside feature extraction.
inline constexpr int kPriceRank = 0;
inline constexpr int kMsgVolume = 7;

struct ChoiceRow {
  std::string cluster_id;
  std::string buyer;
  std::string seller;
  Timestamp purchase_date = 0;
  double price = 0.0;
  double rating = 0.0;
  double historical_sold = 0.0;
  double inventory_sold = 0.0;
  double insurance = 0.0;
};

/// choice_clusters.csv: cluster_id,buyer,seller,purchase_date,price,
/// rating_percent,historical_sold,inventory_sold,insurance
std::vector<ChoiceRow> load_choice_rows(const std::filesystem::path& path);
void write_choice_rows(const std::vector<ChoiceRow>& rows, std::ostream& out);

struct Candidate {
  NodeId node = kNoNode;  // kNoNode when the seller never appears in the graph
  std::string seller;
  double price = 0.0;  // median over the seller's rows in the cluster
  double rating = 0.0;
  double historical_sold = 0.0;
  double inventory_sold = 0.0;
  double insurance = 0.0;
};

struct Decision {
  NodeId buyer = kNoNode;
  std::string buyer_id;
  Timestamp purchase_date = 0;  // earliest purchase of the buyer that day
  std::int64_t purchase_day = 0;
  std::vector<char> is_true;  // parallel to the cluster's candidates
  std::int32_t category = 0;
};

struct BuyerSellerCluster {
  std::string cluster_id;
  std::vector<Candidate> candidates;  // sorted by seller id
  std::vector<Decision> decisions;    // sorted by (purchase_date, buyer id)
};

struct BuildStats {
  std::size_t clusters_in = 0;
  std::size_t dropped_too_few = 0;
  std::size_t dropped_too_many = 0;
  std::size_t dropped_first_day = 0;  // no prior-day snapshot exists
  std::size_t decisions = 0;
};

/// Groups rows by cluster, keeps clusters with 2..10 sellers, and emits one
/// decision per (buyer, purchase day). Output sorted by cluster id.
std::vector<BuyerSellerCluster> build_decisions(const std::vector<ChoiceRow>& rows,
                                                const TemporalMultigraph& g,
                                                BuildStats* stats = nullptr);

/// Feature cutoff for a decision: the last second of the previous day.
Timestamp feature_cutoff(const TemporalMultigraph& g, std::int64_t purchase_day);

/// Fractional rank (rank - 1) / (k - 1) per value, ties share the average
/// rank; descending ranks the largest value first. k = 1 yields 0.
std::vector<double> fractional_ranks(std::span<const double> values, bool descending);

struct ExtractedDecision {
  std::string cluster_id;
  std::int32_t category = 0;
  std::string buyer_id;
  Timestamp purchase_date = 0;
  std::vector<std::string> sellers;
  std::vector<double> prices;
  std::vector<char> is_true;
  std::vector<FeatureVector> features;  // raw, unstandardised
};

/// Features for every decision, computed on the prior-day snapshot. Order
/// follows clusters then decisions; identical for any thread count.
std::vector<ExtractedDecision> extract_features(const std::vector<BuyerSellerCluster>& clusters,
                                                const TemporalMultigraph& g, unsigned threads = 1);

/// Features for a single decision of a cluster.
std::vector<FeatureVector> extract_features(const BuyerSellerCluster& cluster,
                                            const Decision& decision,
                                            const TemporalMultigraph& g);

void write_features_csv(const std::vector<ExtractedDecision>& decisions, std::ostream& out);

// ---- ranking ----

struct Standardizer {
  FeatureVector mean{};
  FeatureVector sd{};

  static Standardizer fit(std::span<const ExtractedDecision> train);
  FeatureVector apply(const FeatureVector& x) const;
};

struct RankerOptions {
  double lambda = 1e-4;
  int epochs = 50;
  double eta0 = 0.1;
  std::uint64_t seed = 0;
};

struct RankModel {
  FeatureVector weights{};
  FeatureMask mask{};
  RankerOptions options;
  std::size_t groups = 0;  // distinct training groups after dedup
  std::size_t pairs = 0;   // (true, false) pairs per epoch

  double score(const FeatureVector& x) const;
};

/// One decision group: standardised candidate features and truth labels.
struct Group {
  std::vector<FeatureVector> x;
  std::vector<char> is_true;
  friend bool operator==(const Group&, const Group&) = default;
  friend auto operator<=>(const Group&, const Group&) = default;
};

/// Seeded pairwise-hinge subgradient descent. Identical groups are merged
/// before training, so duplicating the training set leaves the model
/// unchanged. Throws std::invalid_argument when no usable group exists.
RankModel train_ranker(std::vector<Group> groups, const FeatureMask& mask,
                       const RankerOptions& options = {});

enum class Baseline : std::uint8_t { Random, MinPrice, MostMsg };
std::string_view to_string(Baseline b);

/// Candidate order best first. Ties broken by a seeded shuffle.
std::vector<std::size_t> rank_by_scores(std::span<const double> scores, std::uint64_t seed);
std::vector<std::size_t> baseline_rank(Baseline kind, const ExtractedDecision& d,
                                       std::uint64_t seed);

struct MetricBucket {
  std::size_t n = 0;
  double p_at_1 = 0.0;
  double mean_rank = 0.0;
  double mrr = 0.0;
};

struct RankMetrics {
  MetricBucket overall;
  std::map<std::size_t, MetricBucket> per_k;  // by candidate count
};

/// 1-based position of the best-ranked true candidate.
std::size_t true_rank(std::span<const std::size_t> ordering, std::span<const char> is_true);

/// Aggregates true ranks; k[i] is the candidate count of decision i.
RankMetrics evaluate(std::span<const std::size_t> ranks, std::span<const std::size_t> ks);
RankMetrics evaluate(const std::vector<std::vector<std::size_t>>& orderings,
                     const std::vector<std::vector<char>>& truth);

struct Subset {
  std::string name;
  FeatureMask mask{};
};

std::span<const Subset> named_subsets();
/// Throws std::invalid_argument for unknown names.
const Subset& subset_by_name(std::string_view name);

/// Deterministic 75/25 split by cluster id.
bool is_test_cluster(std::string_view cluster_id, std::uint64_t split_seed);

struct ExperimentOptions {
  std::uint64_t split_seed = 0;
  RankerOptions ranker;
  bool per_category = false;
};

struct ExperimentResult {
  std::string subset;
  RankMetrics model;
  RankMetrics train_model;
  std::map<Baseline, RankMetrics> baselines;
  RankModel global_model;
  std::map<std::int32_t, RankModel> category_models;
  std::size_t train_decisions = 0;
  std::size_t test_decisions = 0;
};

ExperimentResult run_experiment(const std::vector<ExtractedDecision>& decisions,
                                const Subset& subset, const ExperimentOptions& options = {});

}  // namespace triadkit::choice
