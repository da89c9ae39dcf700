#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace triadkit {

using NodeId = std::uint32_t;
using Timestamp = std::int64_t;  // seconds since epoch

inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

enum class EdgeKind : std::uint8_t { Trade = 0, Message = 1, Contact = 2 };

inline constexpr EdgeKind kAllKinds[] = {EdgeKind::Trade, EdgeKind::Message,
                                         EdgeKind::Contact};

constexpr std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Trade: return "trade";
    case EdgeKind::Message: return "message";
    case EdgeKind::Contact: return "contact";
  }
  return "?";
}

EdgeKind parse_edge_kind(std::string_view s);

constexpr bool is_directed(EdgeKind k) { return k != EdgeKind::Contact; }

/// Closed observation interval [start, end].
struct Window {
  Timestamp start = 0;
  Timestamp end = 0;

  constexpr bool contains(Timestamp t) const { return t >= start && t <= end; }
  constexpr Timestamp length() const { return end - start; }

  /// floor((t - start) / 86400); negative for times before the window.
  constexpr std::int64_t day_of(Timestamp t) const {
    const Timestamp d = t - start;
    return d >= 0 ? d / kSecondsPerDay : -((-d + kSecondsPerDay - 1) / kSecondsPerDay);
  }
  constexpr Timestamp day_start(std::int64_t day) const {
    return start + day * kSecondsPerDay;
  }

  friend constexpr bool operator==(const Window&, const Window&) = default;
};

/// Input data violates a documented format or invariant. Carries the
/// offending line when the error comes from a file.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace triadkit
