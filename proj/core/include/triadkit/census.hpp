#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "triadkit/graph.hpp"

namespace triadkit::census {

/// One wedge leg as seen from the middle node X. `Other` is U for the first
/// leg and V for the second. Trade edges point from buyer to seller.
enum class Leg : std::uint8_t {
  TradeIn = 0,      // trade Other -> X (X sells)
  TradeOut = 1,     // trade X -> Other (X buys)
  MessageIn = 2,    // message Other -> X
  MessageOut = 3,   // message X -> Other
};

/// Closing edge between U and V; o = U -> V, i = V -> U.
enum class ClosingType : std::uint8_t { TradeOut = 0, TradeIn = 1, MessageOut = 2, MessageIn = 3 };

enum class Role : std::uint8_t { Buyer, Seller, Ambiguous };

/// Stable encoding: config_id = 4 * first_leg + second_leg, 0..15.
struct ConfigId {
  Leg first;
  Leg second;

  constexpr int index() const { return 4 * static_cast<int>(first) + static_cast<int>(second); }
  static constexpr ConfigId from_index(int i) {
    return {static_cast<Leg>(i / 4), static_cast<Leg>(i % 4)};
  }
  friend constexpr bool operator==(ConfigId, ConfigId) = default;
};

inline constexpr int kNumConfigs = 16;

/// "trade U->X" style label for a leg in first (U) or second (V) position.
std::string_view leg_label(Leg leg, bool second);
std::string_view role_label(Role r);
std::string_view closing_label(ClosingType t);

/// Buyer if X buys and never sells across the two legs, Seller if it sells
/// and never buys, Ambiguous otherwise.
Role role_of_x(ConfigId config);

struct CensusRow {
  ConfigId config{};
  std::uint64_t instances = 0;
  std::uint64_t unique_x = 0;
  std::uint64_t closed = 0;
  std::array<std::uint64_t, 4> closed_by{};  // indexed by ClosingType
  double p_close_x100 = 0.0;
  double p_trade_given_close = 0.0;
  double p_msg_given_close = 0.0;
  std::optional<double> s_t_o;  // nullopt: zero variance with observed != expected
  std::optional<double> s_t_i;
  Role x_role = Role::Ambiguous;
};

/// Fraction of a node's aggregated out-edges (trade + message) that are trades.
struct GenerativeBaseline {
  NodeId node = 0;
  double p_t = 0.0;
  bool defined = false;  // false when the node has no out-edges
};

GenerativeBaseline generative_baseline(const TemporalMultigraph& g, NodeId node);
std::vector<GenerativeBaseline> generative_baselines(const TemporalMultigraph& g);

/// Raw census with per-creator closure tallies so surprises can be evaluated
/// against any baseline table.
struct CensusResult {
  std::array<CensusRow, kNumConfigs> rows{};
  std::size_t num_nodes = 0;
  // [config * num_nodes + creator]; direction o has creator U, i has creator V.
  std::vector<std::uint64_t> closed_o_by_creator, trade_o_by_creator;
  std::vector<std::uint64_t> closed_i_by_creator, trade_i_by_creator;
};

struct CensusOptions {
  unsigned threads = 1;
};

/// Counts, closures and closing types without surprises.
CensusResult count_configurations(const TemporalMultigraph& g, const CensusOptions& options = {});

struct SurpriseValues {
  std::optional<double> s_t_o;
  std::optional<double> s_t_i;
  double expected_o = 0.0, observed_o = 0.0;
  double expected_i = 0.0, observed_i = 0.0;
};

/// observed trade closures vs. sum of creators' p_t over closed instances,
/// in signed standard deviations. Creators with undefined baselines are
/// excluded. `baselines` is indexed by node id.
std::array<SurpriseValues, kNumConfigs> surprise(const CensusResult& census,
                                                 std::span<const GenerativeBaseline> baselines);

/// Full census: counts plus surprises against the graph's own baselines.
std::array<CensusRow, kNumConfigs> config_census(const TemporalMultigraph& g,
                                                 const CensusOptions& options = {});

}  // namespace triadkit::census
