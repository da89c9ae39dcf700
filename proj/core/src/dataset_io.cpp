#include "triadkit/dataset_io.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "triadkit/csv.hpp"

namespace triadkit {

namespace {

const std::vector<std::string> kEventHeader = {"kind", "src", "dst", "timestamp",
                                               "product_id", "category_id", "price",
                                               "quantity"};
const std::vector<std::string> kContactHeader = {"u", "v"};

class IdInterner {
 public:
  NodeId operator()(const std::string& external) {
    auto [it, inserted] = lookup_.emplace(external, static_cast<NodeId>(ids_.size()));
    if (inserted) ids_.push_back(external);
    return it->second;
  }
  std::vector<std::string> take() { return std::move(ids_); }
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<std::string, NodeId> lookup_;
  std::vector<std::string> ids_;
};

}  // namespace

TemporalMultigraph load_dataset(const std::filesystem::path& event_file,
                                const std::filesystem::path& contact_file,
                                std::optional<Window> window) {
  IdInterner intern;
  std::vector<EdgeEvent> events;
  std::vector<std::size_t> event_lines;

  {
    csv::Reader reader(event_file, kEventHeader);
    std::vector<std::string> f;
    while (reader.next(f)) {
      const auto line = reader.line();
      if (f.size() < kEventHeader.size())
        throw ValidationError("expected 8 columns, got " + std::to_string(f.size()), line);
      EdgeEvent e;
      if (f[0] == "trade") e.kind = EdgeKind::Trade;
      else if (f[0] == "message") e.kind = EdgeKind::Message;
      else throw ValidationError("unknown event kind '" + f[0] + "'", line);
      if (f[1].empty() || f[2].empty()) throw ValidationError("empty node id", line);
      if (f[1] == f[2]) throw ValidationError("self-loop row", line);
      e.time = csv::parse_int(f[3], line, "timestamp");
      if (e.kind == EdgeKind::Trade) {
        if (f[4].empty()) throw ValidationError("trade row without product_id", line);
        e.trade.product_id = f[4];
        e.trade.category_id =
            static_cast<std::int32_t>(csv::parse_int(f[5], line, "category_id"));
        e.trade.price = csv::parse_double(f[6], line, "price");
        e.trade.quantity = static_cast<std::int32_t>(csv::parse_int(f[7], line, "quantity"));
        if (!(e.trade.price > 0)) throw ValidationError("trade price must be > 0", line);
        if (e.trade.quantity < 1) throw ValidationError("trade quantity must be >= 1", line);
      } else if (!f[4].empty() || !f[5].empty() || !f[6].empty() || !f[7].empty()) {
        throw ValidationError("message row carries trade fields", line);
      }
      e.src = intern(f[1]);
      e.dst = intern(f[2]);
      events.push_back(std::move(e));
      event_lines.push_back(line);
    }
  }

  std::vector<ContactPair> contacts;
  {
    csv::Reader reader(contact_file, kContactHeader);
    std::vector<std::string> f;
    while (reader.next(f)) {
      const auto line = reader.line();
      if (f.size() < 2 || f[0].empty() || f[1].empty())
        throw ValidationError("malformed contact row", line);
      if (f[0] == f[1]) throw ValidationError("self-loop row", line);
      contacts.emplace_back(intern(f[0]), intern(f[1]));
    }
  }

  Window w{};
  if (window) {
    w = *window;
  } else if (!events.empty()) {
    auto [lo, hi] = std::minmax_element(
        events.begin(), events.end(),
        [](const EdgeEvent& a, const EdgeEvent& b) { return a.time < b.time; });
    w = Window{lo->time, hi->time};
  }
  if (w.end < w.start) throw ValidationError("window end precedes start");
  for (std::size_t i = 0; i < events.size(); ++i)
    if (!w.contains(events[i].time))
      throw ValidationError("timestamp outside observation window", event_lines[i]);

  const std::size_t n = intern.size();
  return TemporalMultigraph::build(n, w, std::move(events), std::move(contacts), intern.take());
}

void write_events_csv(const TemporalMultigraph& g, std::ostream& out) {
  out << "kind,src,dst,timestamp,product_id,category_id,price,quantity\n";
  const auto events = g.events();
  std::vector<std::uint32_t> order(events.size());
  std::iota(order.begin(), order.end(), 0u);
  // Ties are ordered by external ids so the file does not depend on internal numbering.
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& x = events[a];
    const auto& y = events[b];
    if (x.time != y.time) return x.time < y.time;
    if (x.kind != y.kind) return x.kind < y.kind;
    if (x.src != y.src) return g.external_id(x.src) < g.external_id(y.src);
    return x.dst != y.dst && g.external_id(x.dst) < g.external_id(y.dst);
  });
  for (auto i : order) {
    const auto& e = events[i];
    out << to_string(e.kind) << ',' << g.external_id(e.src) << ',' << g.external_id(e.dst)
        << ',' << e.time << ',';
    if (e.kind == EdgeKind::Trade) {
      out << e.trade.product_id << ',' << e.trade.category_id << ','
          << csv::format_double(e.trade.price) << ',' << e.trade.quantity;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

void write_contacts_csv(const TemporalMultigraph& g, std::ostream& out) {
  out << "u,v\n";
  std::vector<std::pair<std::string_view, std::string_view>> rows;
  for (const auto& e : g.edges(EdgeKind::Contact)) {
    std::string_view a = g.external_id(e.src), b = g.external_id(e.dst);
    if (b < a) std::swap(a, b);
    rows.emplace_back(a, b);
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [a, b] : rows) out << a << ',' << b << '\n';
}

void write_id_map(const TemporalMultigraph& g, std::ostream& out) {
  out << "external_id,internal_id\n";
  for (NodeId i = 0; i < g.num_nodes(); ++i) out << g.external_id(i) << ',' << i << '\n';
}

}  // namespace triadkit
