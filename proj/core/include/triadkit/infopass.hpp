#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "triadkit/graph.hpp"

namespace triadkit::infopass {

enum class Variant : std::uint8_t { Standard, FirstBuyReq, MsgReq, Random };

Variant parse_variant(std::string_view s);
std::string_view to_string(Variant v);

struct IPQuery {
  Timestamp delta_max = 2 * kSecondsPerDay;     // B2 must buy within (t2, t2 + delta_max]
  Timestamp window_delta = 3 * kSecondsPerDay;  // message-strength window around t1
  Variant variant = Variant::Standard;
  std::uint64_t seed = 0;  // used by Variant::Random
  std::size_t min_support = 30;
  unsigned threads = 1;
};

struct IPResult {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
  // Same tallies after collapsing triples to distinct (B1, B2) pairs.
  std::uint64_t pair_numerator = 0;
  std::uint64_t pair_denominator = 0;

  std::optional<double> rate() const {
    if (denominator == 0) return std::nullopt;
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

/// Triples (B1, S1, B2): B1 first buys from S1 at t1, B1's first message to
/// B2 strictly after t1 is at t2; success when B2 buys from S1 in
/// (t2, t2 + delta_max]. FirstBuyReq drops triples where B2 bought from S1
/// at or before t2. MsgReq is identical to Standard here, since every
/// triple already carries a message.
IPResult ip_success_rate(const TemporalMultigraph& g, const IPQuery& q = {});

enum class Axis : std::uint8_t { MsgStrength, TimeDiffDays, PriceCNY, Category };
Axis parse_axis(std::string_view s);
std::string_view to_string(Axis a);

struct Bucket {
  std::string label;
  double lo = 0.0;  // [lo, hi); exact-valued buckets have hi = lo + 1
  double hi = 0.0;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
  double value = 0.0;  // rate or mean, numerator / denominator
};

struct BucketedCurve {
  std::string name;
  std::vector<Bucket> buckets;       // ascending, support >= min_support
  std::size_t suppressed_buckets = 0;
  std::uint64_t suppressed_support = 0;
  std::optional<double> overall;     // aggregate over all instances, suppressed included
};

/// Price bucket edges in CNY. Bucket i is [edge[i-1], edge[i]) with an
/// implicit leading 0 and trailing infinity.
inline constexpr double kPriceEdges[] = {1, 2, 5, 10, 15, 25, 50, 100, 250};

BucketedCurve closure_rate_by(const TemporalMultigraph& g, Axis axis, const IPQuery& q = {});

struct BBARow {
  int delta_days = 0;
  std::uint64_t instances = 0;
  double before = 0.0, between = 0.0, after = 0.0;           // means
  double se_before = 0.0, se_between = 0.0, se_after = 0.0;  // standard errors
  double se_between_minus_before = 0.0;  // paired-difference standard errors
  double se_between_minus_after = 0.0;
  double se_before_minus_after = 0.0;
};

/// Per delta in [1, max_delta]: instances (B1, B2, S1) of message-adjacent
/// buyers where day(first B2->S1) - day(first B1->S1) = delta. Windows of
/// length D = delta days: Before [t1-D, t1], Between (t1, t1+D],
/// After (t1+D, t1+2D]; only instances whose full span lies in the
/// observation window are kept.
std::vector<BBARow> before_between_after(const TemporalMultigraph& g, int max_delta = 5);

struct MutualContactCurve {
  BucketedCurve curve;  // bucket k = number of mutual contacts, k >= 1
  std::uint64_t contact_pairs = 0;
  std::uint64_t contact_pairs_traded = 0;
  std::optional<double> direct_contact_trade_rate;
};

/// P(pair traded in either direction | k mutual contacts) over unordered
/// pairs; MsgReq keeps only pairs with at least one message.
MutualContactCurve mutual_contact_trade_curve(const TemporalMultigraph& g,
                                              Variant variant = Variant::Standard,
                                              std::size_t min_support = 30);

enum class Dyad : std::uint8_t { TradeVsMsgVolume, MsgsVsPrice, MsgsVsTradeDateOffset };
Dyad parse_dyad(std::string_view s);
std::string_view to_string(Dyad d);

struct DyadOptions {
  bool require_trade = false;  // TradeVsMsgVolume "Message+Trade" variant
  int max_offset_days = 10;
  std::size_t min_support = 1;
};

/// TradeVsMsgVolume: unordered pairs with >= 1 message, bucketed by message
/// count, value = mean trade events. MsgsVsPrice: trade events of pairs that
/// ever messaged, bucketed by price, value = mean buyer->seller messages on
/// the trade day. MsgsVsTradeDateOffset: same trades, value = mean messages
/// between the pair on trade day + offset.
BucketedCurve dyad_report(const TemporalMultigraph& g, Dyad which, const DyadOptions& options = {});

struct RewireStats {
  EdgeKind kind{};
  std::uint64_t edges = 0;
  std::uint64_t swaps = 0;
  std::uint64_t attempts = 0;
  bool skipped = false;  // fewer than 2 edges
};

/// Degree-preserving double-edge swaps per layer; events travel with their
/// edge slot, so per-layer timestamp multisets are unchanged.
TemporalMultigraph rewire(const TemporalMultigraph& g, std::uint64_t seed,
                          std::vector<RewireStats>* stats = nullptr);

/// Each trade event keeps buyer, time and trade fields; the seller becomes a
/// uniform draw (never the buyer) from nodes that ever sell.
TemporalMultigraph randomize_sellers(const TemporalMultigraph& g, std::uint64_t seed);

}  // namespace triadkit::infopass
