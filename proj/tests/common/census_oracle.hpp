#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "triadkit/census.hpp"

namespace triadkit::oracle {

using census::kNumConfigs;

// Brute force over ordered triples, reading only the raw event list.
struct Oracle {
  std::array<std::uint64_t, kNumConfigs> instances{}, unique_x{}, closed{};
  std::array<std::array<std::uint64_t, 4>, kNumConfigs> by_type{};
  // observed trade closures and sum of p_t / p_t(1-p_t) of creators, per direction
  std::array<double, kNumConfigs> obs_o{}, exp_o{}, var_o{}, obs_i{}, exp_i{}, var_i{};
};

inline Oracle naive_census(const TemporalMultigraph& g) {
  const std::size_t n = g.num_nodes();
  constexpr Timestamp kNone = std::numeric_limits<Timestamp>::max();
  // first[kind][a][b] = first event time a->b, all[kind][a][b] = every time.
  std::vector<std::vector<Timestamp>> first[2];
  std::vector<std::vector<std::vector<Timestamp>>> all[2];
  std::vector<std::set<NodeId>> out_nbrs[2];
  for (int k = 0; k < 2; ++k) {
    first[k].assign(n, std::vector<Timestamp>(n, kNone));
    all[k].assign(n, std::vector<std::vector<Timestamp>>(n));
    out_nbrs[k].assign(n, {});
  }
  for (const auto& e : g.events()) {
    if (e.kind == EdgeKind::Contact) continue;
    const int k = e.kind == EdgeKind::Trade ? 0 : 1;
    first[k][e.src][e.dst] = std::min(first[k][e.src][e.dst], e.time);
    all[k][e.src][e.dst].push_back(e.time);
    out_nbrs[k][e.src].insert(e.dst);
  }
  std::vector<double> pt(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    const double t = static_cast<double>(out_nbrs[0][v].size());
    const double m = static_cast<double>(out_nbrs[1][v].size());
    if (t + m > 0) pt[v] = t / (t + m);
  }
  // Leg slot time from X's point of view: in = other->X, out = X->other.
  auto leg_time = [&](int slot, NodeId x, NodeId other) {
    const int k = slot < 2 ? 0 : 1;
    return slot % 2 == 0 ? first[k][other][x] : first[k][x][other];
  };

  Oracle o;
  std::vector<std::set<NodeId>> xs(kNumConfigs);
  for (NodeId x = 0; x < n; ++x)
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = 0; v < n; ++v) {
        if (u == x || v == x || u == v) continue;
        for (int s1 = 0; s1 < 4; ++s1)
          for (int s2 = 0; s2 < 4; ++s2) {
            const Timestamp t1 = leg_time(s1, x, u), t2 = leg_time(s2, x, v);
            if (t1 == kNone || t2 == kNone || !(t2 > t1)) continue;
            const int c = 4 * s1 + s2;
            ++o.instances[c];
            xs[c].insert(x);
            // Earliest event after t2; ties resolved t_o, t_i, m_o, m_i.
            const std::vector<Timestamp>* cands[4] = {&all[0][u][v], &all[0][v][u], &all[1][u][v],
                                                      &all[1][v][u]};
            Timestamp best = kNone;
            int type = -1;
            for (int t = 0; t < 4; ++t)
              for (Timestamp ts : *cands[t])
                if (ts > t2 && ts < best) {
                  best = ts;
                  type = t;
                } else if (ts > t2 && ts == best && t < type) {
                  type = t;
                }
            if (type < 0) continue;
            ++o.closed[c];
            ++o.by_type[c][type];
            const bool dir_o = type == 0 || type == 2;
            const NodeId creator = dir_o ? u : v;
            if (pt[creator] < 0) continue;
            const double p = pt[creator];
            const bool trade = type < 2;
            if (dir_o) {
              o.obs_o[c] += trade;
              o.exp_o[c] += p;
              o.var_o[c] += p * (1 - p);
            } else {
              o.obs_i[c] += trade;
              o.exp_i[c] += p;
              o.var_i[c] += p * (1 - p);
            }
          }
      }
  for (int c = 0; c < kNumConfigs; ++c) o.unique_x[c] = xs[c].size();
  return o;
}

inline std::optional<double> z(double obs, double exp, double var) {
  if (var <= 0) return obs == exp ? std::optional<double>(0.0) : std::nullopt;
  return (obs - exp) / std::sqrt(var);
}

}  // namespace triadkit::oracle
