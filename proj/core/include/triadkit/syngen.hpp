#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "triadkit/choice.hpp"
#include "triadkit/graph.hpp"
#include "triadkit/trust.hpp"

namespace triadkit::syngen {

enum class PlantMode : std::uint8_t {
  Constant,  // each messaged friend follows with p_plant
  Linear,    // p_plant * (messages between the pair within +-3 days of t1), capped at 1
};

struct SynthConfig {
  std::uint64_t seed = 1;

  // population and window
  std::size_t n_buyers = 20000;
  std::size_t n_sellers = 500;
  double seller_exponent = 0.8;  // popularity of seller rank k ~ k^-exponent
  int window_days = 58;
  Timestamp t_start = 1251763200;
  int n_categories = 10;

  // social layer
  double friends_per_buyer = 5.0;
  double homophily = 0.8;  // chance a friend comes from the buyer's community
  std::size_t n_communities = 50;
  double contact_prob = 0.7;       // friend pair also appears as a contact
  double base_message_rate = 3.0;  // mean messages per friend pair over the window

  // trade layer
  double trades_per_buyer = 4.0;
  double bs_message_prob = 0.5;  // trade accompanied by buyer-seller messages
  double bs_message_mean = 2.0;
  double buyer_buyer_trade_prob = 0.0;

  // information passing plant
  double p_plant = 0.0;
  PlantMode plant_mode = PlantMode::Constant;
  std::map<int, double> category_p_plant;  // overrides p_plant per category
  int burst_messages = 0;  // extra B1<->B2 messages between t1 and the planted trade

  // price of trust plant: d(r) = a (r/100)^b + c, noise in deviation points
  std::size_t n_trust_clusters = 2000;
  int trust_min_listings = 2;
  int trust_max_listings = 12;
  double trust_a = 5.0;
  double trust_b = 80.0;
  double trust_c = -2.0;
  double trust_noise = 0.5;

  // consumer choice plant
  std::size_t n_choice_clusters = 300;
  double choice_buyers_per_cluster = 8.0;
  double choice_msg_prob = 0.7;        // decision buyer messaged some candidates first
  double choice_msg_candidate_prob = 0.35;
  choice::FeatureVector choice_weights = default_choice_weights();

  static choice::FeatureVector default_choice_weights();
};

/// Parses flat key=value text ('#' starts a comment). Unknown keys and bad
/// values throw ValidationError with the line number.
SynthConfig parse_config(const std::string& text);
SynthConfig load_config(const std::filesystem::path& path);
std::string to_config_text(const SynthConfig& cfg);

/// Throws ValidationError for infeasible settings.
void validate(const SynthConfig& cfg);

struct SyntheticDataset {
  TemporalMultigraph graph;
  std::vector<trust::Listing> listings;
  trust::RatingTable ratings;
  std::vector<choice::ChoiceRow> choice_rows;
  std::string truth_json;

  std::uint64_t planted_trades = 0;
  std::uint64_t burst_messages = 0;
  double planted_trust_crossing = 0.0;  // nan when d(r) never crosses zero in (0, 100]
};

SyntheticDataset generate(const SynthConfig& cfg);

/// Writes events.csv, contacts.csv, clusters.csv, ratings.csv,
/// choice_clusters.csv and truth.json into dir.
void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir);

void write_listings_csv(const std::vector<trust::Listing>& listings, std::ostream& out);
void write_ratings_csv(const trust::RatingTable& ratings, std::ostream& out);

}  // namespace triadkit::syngen
