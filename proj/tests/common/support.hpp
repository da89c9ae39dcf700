#pragma once

// Shared test fixtures: seeded random multigraphs and temp dirs.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "triadkit/graph.hpp"

namespace triadkit::testing {

struct RandomGraphShape {
  std::size_t nodes = 40;
  std::size_t events = 300;
  std::size_t contacts = 60;
  double trade_share = 0.4;
  Timestamp span = 20 * kSecondsPerDay;
  Timestamp tick = 3600;  // coarse ticks make timestamp ties common
};

inline std::vector<EdgeEvent> random_events(const RandomGraphShape& s, std::mt19937_64& rng) {
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(s.nodes - 1));
  std::uniform_int_distribution<Timestamp> tick(0, s.span / s.tick);
  std::bernoulli_distribution is_trade(s.trade_share);
  std::uniform_int_distribution<int> cat(0, 4);
  std::uniform_real_distribution<double> price(0.5, 300.0);
  std::vector<EdgeEvent> out;
  while (out.size() < s.events) {
    EdgeEvent e;
    e.src = node(rng);
    e.dst = node(rng);
    if (e.src == e.dst) continue;
    e.time = tick(rng) * s.tick;
    e.kind = is_trade(rng) ? EdgeKind::Trade : EdgeKind::Message;
    if (e.kind == EdgeKind::Trade) {
      e.trade.category_id = cat(rng);
      e.trade.price = price(rng);
      e.trade.product_id = "p" + std::to_string(e.trade.category_id);
    }
    out.push_back(e);
  }
  return out;
}

inline TemporalMultigraph random_graph(const RandomGraphShape& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto events = random_events(s, rng);
  std::vector<ContactPair> contacts;
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(s.nodes - 1));
  while (contacts.size() < s.contacts) {
    NodeId u = node(rng), v = node(rng);
    if (u != v) contacts.emplace_back(u, v);
  }
  return TemporalMultigraph::build(s.nodes, Window{0, s.span}, std::move(events),
                                   std::move(contacts));
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("triadkit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace triadkit::testing
