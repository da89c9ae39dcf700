#include "cli.hpp"

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "triadkit/analytics.hpp"
#include "triadkit/census.hpp"
#include "triadkit/choice.hpp"
#include "triadkit/csv.hpp"
#include "triadkit/dataset_io.hpp"
#include "triadkit/infopass.hpp"
#include "triadkit/parallel.hpp"
#include "triadkit/syngen.hpp"
#include "triadkit/trust.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace triadkit::cli {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 init failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return hex.str();
}

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Staged outputs: everything is written to hidden temp files and renamed
// into place together, manifest last, only after the command succeeded.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  Outputs(const Outputs&) = delete;
  ~Outputs() {
    for (auto& f : files_) {
      std::error_code ec;
      fs::remove(f.temp, ec);
    }
  }

  const fs::path& dir() const { return dir_; }

  std::ofstream& open(const std::string& name) {
    fs::create_directories(dir_);
    auto& f = files_.emplace_back();
    f.name = name;
    f.temp = dir_ / ("." + name + ".tmp");
    f.stream = std::make_unique<std::ofstream>(f.temp, std::ios::binary | std::ios::trunc);
    if (!*f.stream) throw std::runtime_error("cannot write " + f.temp.string());
    return *f.stream;
  }

  void write(const std::string& name, const std::string& content) { open(name) << content; }

  /// Closes everything, then writes the manifest with output digests and
  /// renames all files into place.
  void commit(json manifest) {
    json digests = json::object();
    for (auto& f : files_) {
      f.stream->close();
      if (!*f.stream) throw std::runtime_error("failed writing " + f.name);
      digests[f.name] = sha256_file(f.temp);
    }
    manifest["outputs"] = digests;
    open("manifest.json") << manifest.dump(2) << '\n';
    files_.back().stream->close();
    for (auto& f : files_) fs::rename(f.temp, dir_ / f.name);
    files_.clear();
  }

 private:
  struct File {
    std::string name;
    fs::path temp;
    std::unique_ptr<std::ofstream> stream;
  };
  fs::path dir_;
  std::vector<File> files_;
};

struct Target {
  fs::path dir;
  std::string primary;
};

// --out is a directory, or a file path when it ends in .csv / .json.
Target resolve_out(const std::string& out, const std::string& default_name) {
  if (out.empty()) return {".", default_name};
  const fs::path p(out);
  const auto ext = p.extension().string();
  if (ext == ".csv" || ext == ".json") {
    const fs::path parent = p.parent_path();
    return {parent.empty() ? fs::path(".") : parent, p.filename().string()};
  }
  return {p, default_name};
}

struct Common {
  std::string events, contacts, out;
  std::optional<Timestamp> t_start, t_end;
  unsigned threads = default_threads();
  std::uint64_t seed = 0;
};

void add_graph_options(CLI::App* sub, Common& c) {
  sub->add_option("--events", c.events, "events.csv")->required()->check(CLI::ExistingFile);
  sub->add_option("--contacts", c.contacts, "contacts.csv")->required()->check(CLI::ExistingFile);
  sub->add_option("--t-start", c.t_start, "observation window start (seconds)");
  sub->add_option("--t-end", c.t_end, "observation window end (seconds)");
}

void add_out_options(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "output directory, or file for the primary output");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

TemporalMultigraph load_graph(const Common& c) {
  std::optional<Window> w;
  if (c.t_start.has_value() != c.t_end.has_value())
    throw UsageError("--t-start and --t-end must be given together");
  if (c.t_start) w = Window{*c.t_start, *c.t_end};
  spdlog::info("loading {} and {}", c.events, c.contacts);
  auto g = load_dataset(c.events, c.contacts, w);
  spdlog::info("graph: {} nodes, {} trade / {} message events, {} contacts", g.num_nodes(),
               g.event_count(EdgeKind::Trade), g.event_count(EdgeKind::Message),
               g.edges(EdgeKind::Contact).size());
  return g;
}

std::string fmt(double v) { return csv::format_double(v); }
std::string fmt(const std::optional<double>& v) { return v ? csv::format_double(*v) : "NA"; }
json jnum(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json manifest_base(const std::string& subcommand, const std::vector<std::string>& argv,
                   const CLI::App* sub, const std::vector<std::string>& inputs) {
  json m;
  m["tool"] = "triadkit";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["argv"] = argv;
  json opts = json::object();
  for (const CLI::App* app = sub; app; app = app->get_subcommands().empty() ? nullptr : app->get_subcommands().front()) {
    for (const auto* o : app->get_options()) {
      if (o->get_name() == "--help" || o->get_name() == "-h" || o->count() == 0) continue;
      const auto& r = o->results();
      opts[o->get_name()] = r.size() == 1 ? json(r.front()) : json(r);
    }
  }
  m["options"] = opts;
  json in = json::object();
  for (const auto& p : inputs)
    if (!p.empty()) in[p] = sha256_file(p);
  m["inputs"] = in;
  return m;
}

// ---------------------------------------------------------------- writers

std::string stats_csv(const TemporalMultigraph& g) {
  std::ostringstream o;
  o << "layer,nodes,edges,undirected_pairs,avg_degree,avg_clustering\n";
  for (EdgeKind k : kAllKinds) {
    const auto s = network_stats(g, k);
    o << to_string(k) << ',' << s.nodes << ',' << s.edges << ',' << s.undirected_pairs << ','
      << fmt(s.avg_degree) << ',' << fmt(s.avg_clustering) << '\n';
  }
  return o.str();
}

std::string census_csv(const std::array<census::CensusRow, census::kNumConfigs>& rows) {
  std::ostringstream o;
  o << "config_id,leg1,leg2,instances,unique_x,p_close_x100,p_trade_given_close,p_msg_given_close,"
       "s_t_o,s_t_i,x_role\n";
  for (const auto& r : rows) {
    o << r.config.index() << ',' << census::leg_label(r.config.first, false) << ','
      << census::leg_label(r.config.second, true) << ',' << r.instances << ',' << r.unique_x << ','
      << fmt(r.p_close_x100) << ',' << fmt(r.p_trade_given_close) << ','
      << fmt(r.p_msg_given_close) << ',' << fmt(r.s_t_o) << ',' << fmt(r.s_t_i) << ','
      << census::role_label(r.x_role) << '\n';
  }
  return o.str();
}

std::string closing_csv(const std::array<census::CensusRow, census::kNumConfigs>& rows) {
  std::ostringstream o;
  o << "config_id,closed,t_o,t_i,m_o,m_i\n";
  for (const auto& r : rows)
    o << r.config.index() << ',' << r.closed << ',' << r.closed_by[0] << ',' << r.closed_by[1]
      << ',' << r.closed_by[2] << ',' << r.closed_by[3] << '\n';
  return o.str();
}

std::string curve_csv(const infopass::BucketedCurve& c) {
  std::ostringstream o;
  o << "bucket,numerator,denominator,rate\n";
  for (const auto& b : c.buckets)
    o << b.label << ',' << b.numerator << ',' << b.denominator << ',' << fmt(b.value) << '\n';
  return o.str();
}

json curve_json(const infopass::BucketedCurve& c) {
  return {{"name", c.name},
          {"buckets", c.buckets.size()},
          {"suppressed_buckets", c.suppressed_buckets},
          {"suppressed_support", c.suppressed_support},
          {"overall", jnum(c.overall)}};
}

std::string bba_csv(const std::vector<infopass::BBARow>& rows) {
  std::ostringstream o;
  o << "delta_days,instances,before,between,after,se_before,se_between,se_after,"
       "se_between_minus_before,se_between_minus_after\n";
  for (const auto& r : rows)
    o << r.delta_days << ',' << r.instances << ',' << fmt(r.before) << ',' << fmt(r.between) << ','
      << fmt(r.after) << ',' << fmt(r.se_before) << ',' << fmt(r.se_between) << ','
      << fmt(r.se_after) << ',' << fmt(r.se_between_minus_before) << ','
      << fmt(r.se_between_minus_after) << '\n';
  return o.str();
}

std::string graph_events(const TemporalMultigraph& g) {
  std::ostringstream o;
  write_events_csv(g, o);
  return o.str();
}

std::string graph_contacts(const TemporalMultigraph& g) {
  std::ostringstream o;
  write_contacts_csv(g, o);
  return o.str();
}

json metrics_json(const std::string& subset, const choice::RankMetrics& m) {
  json per_k = json::object();
  for (const auto& [k, b] : m.per_k)
    per_k[std::to_string(k)] = {{"n", b.n}, {"p_at_1", b.p_at_1}, {"mrr", b.mrr}, {"mean_rank", b.mean_rank}};
  return {{"subset", subset},
          {"n", m.overall.n},
          {"p_at_1", m.overall.p_at_1},
          {"mrr", m.overall.mrr},
          {"mean_rank", m.overall.mean_rank},
          {"per_k", per_k}};
}

// ------------------------------------------------------------------ report

std::vector<std::vector<std::string>> read_table(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(csv::split(line));
  }
  return rows;
}

void md_table(std::ostream& o, const std::vector<std::vector<std::string>>& rows,
              const std::vector<std::string>& columns) {
  if (rows.empty()) return;
  std::vector<int> idx;
  for (const auto& c : columns) {
    auto it = std::find(rows[0].begin(), rows[0].end(), c);
    idx.push_back(it == rows[0].end() ? -1 : static_cast<int>(it - rows[0].begin()));
  }
  o << '|';
  for (const auto& c : columns) o << ' ' << c << " |";
  o << "\n|";
  for (std::size_t i = 0; i < columns.size(); ++i) o << "---|";
  o << '\n';
  for (std::size_t r = 1; r < rows.size(); ++r) {
    o << '|';
    for (int i : idx) o << ' ' << (i >= 0 && i < static_cast<int>(rows[r].size()) ? rows[r][i] : "") << " |";
    o << '\n';
  }
  o << '\n';
}

json table_json(const std::vector<std::vector<std::string>>& rows) {
  json out = json::array();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    json row = json::object();
    for (std::size_t i = 0; i < rows[0].size() && i < rows[r].size(); ++i) row[rows[0][i]] = rows[r][i];
    out.push_back(row);
  }
  return out;
}

void run_report(const std::vector<std::string>& in_dirs, Outputs& out, json& manifest) {
  struct Section {
    const char* file;
    const char* title;
    std::vector<std::string> columns;
  };
  const std::vector<Section> sections = {
      {"stats.csv", "Dataset statistics", {"layer", "nodes", "edges", "undirected_pairs", "avg_degree", "avg_clustering"}},
      {"bba.csv", "Messages between two buyers relative to their trade dates",
       {"delta_days", "instances", "before", "between", "after"}},
      {"census.csv", "Directed configuration sets",
       {"config_id", "leg1", "leg2", "instances", "unique_x", "p_close_x100", "p_trade_given_close",
        "p_msg_given_close", "s_t_o", "s_t_i", "x_role"}},
      {"subsets.csv", "Consumer choice prediction", {"subset", "p_at_1", "mrr", "mean_rank", "n"}},
  };
  std::ostringstream md;
  md << "# triadkit report\n\n";
  json rj;
  json sources = json::object();
  json tables = json::object();
  for (const auto& s : sections) {
    for (const auto& d : in_dirs) {
      const fs::path p = fs::path(d) / s.file;
      if (!fs::exists(p)) continue;
      const auto rows = read_table(p);
      sources[p.string()] = sha256_file(p);
      md << "## " << s.title << "\n\nSource: `" << p.string() << "`\n\n";
      md_table(md, rows, s.columns);
      tables[s.file] = table_json(rows);
      break;
    }
  }
  // Scalar results that have no table of their own.
  for (const char* extra : {"rate.json", "fit.json", "metrics.json"}) {
    for (const auto& d : in_dirs) {
      const fs::path p = fs::path(d) / extra;
      if (!fs::exists(p)) continue;
      std::ifstream in(p);
      json j = json::parse(in, nullptr, false);
      if (j.is_discarded()) throw ValidationError("malformed JSON in " + p.string());
      sources[p.string()] = sha256_file(p);
      tables[extra] = j;
      md << "## " << extra << "\n\n```json\n" << j.dump(2) << "\n```\n\n";
      break;
    }
  }
  if (sources.empty()) throw ValidationError("report: no known result files in the input directories");
  rj["sources"] = sources;
  rj["tables"] = tables;
  out.write("report.md", md.str());
  out.write("report.json", rj.dump(2) + "\n");
  manifest["inputs"] = sources;
}

void setup_logging() {
  static bool done = false;
  if (!done) {
    auto logger = spdlog::stderr_color_mt("triadkit");
    spdlog::set_default_logger(logger);
    done = true;
  }
  const char* env = std::getenv("TRIAD_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else spdlog::set_level(spdlog::level::err);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  setup_logging();
  const auto t0 = std::chrono::steady_clock::now();

  CLI::App app{"triadkit: temporal multigraph analytics for social commerce"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common c;
  // ingest / stats / census
  auto* ingest = app.add_subcommand("ingest", "validate inputs and emit normalised files and id_map.csv");
  add_graph_options(ingest, c);
  add_out_options(ingest, c);
  auto* stats = app.add_subcommand("stats", "per-layer network statistics");
  add_graph_options(stats, c);
  add_out_options(stats, c);
  auto* census_cmd = app.add_subcommand("census", "directed configuration census with surprises");
  add_graph_options(census_cmd, c);
  add_out_options(census_cmd, c);

  // infopass
  auto* ip = app.add_subcommand("infopass", "information passing measurements");
  ip->require_subcommand(1);
  std::string variant = "standard", axis = "msg-strength", which = "trade-vs-msg-volume";
  double delta_days = 2.0, window_days = 3.0;
  std::size_t min_support = 30;
  int max_delta = 5;
  bool with_rewired = false, require_trade = false;
  const std::vector<std::string> variants = {"standard", "first-buy-req", "msg-req", "random"};
  auto* ip_rate = ip->add_subcommand("rate", "information passing success rate");
  auto* ip_curve = ip->add_subcommand("curve", "closure rate by message strength, time, price or category");
  auto* ip_bba = ip->add_subcommand("bba", "messages before / between / after two buyers' trades");
  auto* ip_dyads = ip->add_subcommand("dyads", "dyadic trade and message reports");
  auto* ip_rewire = ip->add_subcommand("rewire", "degree-preserving rewired null graph");
  auto* ip_rand = ip->add_subcommand("randomize-sellers", "random-seller null graph");
  for (auto* s : {ip_rate, ip_curve, ip_bba, ip_dyads, ip_rewire, ip_rand}) {
    add_graph_options(s, c);
    add_out_options(s, c);
  }
  for (auto* s : {ip_rate, ip_curve, ip_rewire, ip_rand})
    s->add_option("--seed", c.seed, "random seed");
  for (auto* s : {ip_rate, ip_curve}) {
    s->add_option("--variant", variant)->check(CLI::IsMember(variants));
    s->add_option("--delta-days", delta_days, "success window after the first message")->check(CLI::PositiveNumber);
  }
  ip_rate->add_flag("--with-rewired", with_rewired, "also measure on rewire(g, seed)");
  ip_curve->add_option("--axis", axis)
      ->check(CLI::IsMember({"msg-strength", "time-diff-days", "price", "category"}));
  ip_curve->add_option("--window-days", window_days, "message-strength window half-width")
      ->check(CLI::PositiveNumber);
  ip_curve->add_option("--min-support", min_support);
  ip_bba->add_option("--max-delta", max_delta)->check(CLI::Range(1, 30));
  ip_dyads->add_option("--which", which)
      ->check(CLI::IsMember({"trade-vs-msg-volume", "msgs-vs-price", "msgs-vs-trade-date-offset",
                             "mutual-contacts"}));
  ip_dyads->add_flag("--require-trade", require_trade, "only pairs that also traded");
  ip_dyads->add_option("--variant", variant, "mutual-contacts: standard or msg-req")
      ->check(CLI::IsMember({"standard", "msg-req"}));
  auto* dyad_support = ip_dyads->add_option("--min-support", min_support);

  // trust
  auto* trust_cmd = app.add_subcommand("trust", "price deviation versus seller rating");
  std::string clusters_file, ratings_file;
  std::size_t min_items = 15;
  trust_cmd->add_option("--clusters", clusters_file, "clusters.csv")->required()->check(CLI::ExistingFile);
  trust_cmd->add_option("--ratings", ratings_file, "ratings.csv")->required()->check(CLI::ExistingFile);
  trust_cmd->add_option("--min-items", min_items, "per-seller profile threshold");
  add_out_options(trust_cmd, c);

  // choice
  auto* choice_cmd = app.add_subcommand("choice", "consumer choice ranking experiment");
  std::string choice_file, subset = "All Features";
  bool per_category = false, all_subsets = false;
  std::uint64_t split_seed = 0;
  choice::RankerOptions ranker;
  add_graph_options(choice_cmd, c);
  add_out_options(choice_cmd, c);
  choice_cmd->add_option("--choice-clusters", choice_file, "choice_clusters.csv")->required()->check(CLI::ExistingFile);
  std::vector<std::string> subset_names;
  for (const auto& s : choice::named_subsets()) subset_names.push_back(s.name);
  choice_cmd->add_option("--subset", subset)->check(CLI::IsMember(subset_names));
  choice_cmd->add_flag("--per-category", per_category, "one model per category");
  choice_cmd->add_flag("--all-subsets", all_subsets, "also evaluate every named subset (subsets.csv)");
  choice_cmd->add_option("--split-seed", split_seed, "seed of the 75/25 train/test split by cluster");
  choice_cmd->add_option("--lambda", ranker.lambda, "L2 regularisation strength")->check(CLI::NonNegativeNumber);
  choice_cmd->add_option("--epochs", ranker.epochs, "passes over the training groups")->check(CLI::NonNegativeNumber);
  choice_cmd->add_option("--seed", ranker.seed, "training shuffle seed");

  // syngen
  auto* syn = app.add_subcommand("syngen", "generate a seeded synthetic dataset");
  std::string config_file;
  std::optional<std::uint64_t> syn_seed;
  syn->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  syn->add_option("--seed", syn_seed);
  syn->add_option("--out", c.out, "output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "collate existing outputs into report.md / report.json");
  std::vector<std::string> report_in;
  report->add_option("--in", report_in, "directories holding prior outputs")->required();
  report->add_option("--out", c.out, "output directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::vector<std::string> argv_copy(args.begin(), args.end());
  try {
    auto manifest_for = [&](const std::string& name, CLI::App* sub, std::vector<std::string> inputs) {
      json m = manifest_base(name, argv_copy, sub, inputs);
      return m;
    };
    auto finish = [&](Outputs& out, json m) {
      m["threads"] = c.threads;
      m["wall_clock_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.commit(std::move(m));
      spdlog::info("wrote outputs to {}", out.dir().string());
    };

    if (ingest->parsed()) {
      const auto g = load_graph(c);
      const auto t = resolve_out(c.out, "events.csv");
      Outputs out(t.dir);
      write_events_csv(g, out.open(t.primary));
      write_contacts_csv(g, out.open("contacts.csv"));
      write_id_map(g, out.open("id_map.csv"));
      auto m = manifest_for("ingest", ingest, {c.events, c.contacts});
      m["window"] = {{"start", g.window().start}, {"end", g.window().end}};
      finish(out, m);
    } else if (stats->parsed()) {
      const auto g = load_graph(c);
      const auto t = resolve_out(c.out, "stats.csv");
      Outputs out(t.dir);
      out.write(t.primary, stats_csv(g));
      finish(out, manifest_for("stats", stats, {c.events, c.contacts}));
    } else if (census_cmd->parsed()) {
      const auto g = load_graph(c);
      const auto rows = census::config_census(g, {c.threads});
      const auto t = resolve_out(c.out, "census.csv");
      Outputs out(t.dir);
      out.write(t.primary, census_csv(rows));
      out.write("census_closing_types.csv", closing_csv(rows));
      auto m = manifest_for("census", census_cmd, {c.events, c.contacts});
      m["config_id_encoding"] = "4 * leg1 + leg2; legs: 0 trade U->X, 1 trade X->U, 2 msg U->X, 3 msg X->U";
      finish(out, m);
    } else if (ip->parsed()) {
      const auto g = load_graph(c);
      infopass::IPQuery q;
      q.variant = infopass::parse_variant(variant);
      q.delta_max = static_cast<Timestamp>(delta_days * kSecondsPerDay);
      q.window_delta = static_cast<Timestamp>(window_days * kSecondsPerDay);
      q.seed = c.seed;
      q.min_support = min_support;
      q.threads = c.threads;
      const std::vector<std::string> inputs = {c.events, c.contacts};
      if (ip_rate->parsed()) {
        const auto r = infopass::ip_success_rate(g, q);
        json j = {{"variant", variant},
                  {"delta_max_seconds", q.delta_max},
                  {"numerator", r.numerator},
                  {"denominator", r.denominator},
                  {"rate", jnum(r.rate())},
                  {"pair_numerator", r.pair_numerator},
                  {"pair_denominator", r.pair_denominator},
                  {"first_buy_req_applies_to", "denominator"}};
        if (with_rewired) {
          infopass::IPQuery rq = q;
          if (rq.variant == infopass::Variant::Random) rq.variant = infopass::Variant::Standard;
          const auto rr = infopass::ip_success_rate(infopass::rewire(g, c.seed), rq);
          j["rewired"] = {{"numerator", rr.numerator}, {"denominator", rr.denominator}, {"rate", jnum(rr.rate())}};
          if (r.rate() && rr.rate() && *rr.rate() > 0) j["ratio"] = *r.rate() / *rr.rate();
        }
        const auto t = resolve_out(c.out, "rate.json");
        Outputs out(t.dir);
        out.write(t.primary, j.dump(2) + "\n");
        finish(out, manifest_for("infopass rate", ip, inputs));
      } else if (ip_curve->parsed()) {
        const auto curve = infopass::closure_rate_by(g, infopass::parse_axis(axis), q);
        const auto t = resolve_out(c.out, "curve.csv");
        Outputs out(t.dir);
        out.write(t.primary, curve_csv(curve));
        auto m = manifest_for("infopass curve", ip, inputs);
        m["curve"] = curve_json(curve);
        m["first_buy_req_applies_to"] = "denominator";
        finish(out, m);
      } else if (ip_bba->parsed()) {
        const auto rows = infopass::before_between_after(g, max_delta);
        const auto t = resolve_out(c.out, "bba.csv");
        Outputs out(t.dir);
        out.write(t.primary, bba_csv(rows));
        finish(out, manifest_for("infopass bba", ip, inputs));
      } else if (ip_dyads->parsed()) {
        Outputs* outp = nullptr;
        if (which == "mutual-contacts") {
          const auto mc = infopass::mutual_contact_trade_curve(
              g, infopass::parse_variant(variant), dyad_support->count() ? min_support : 30);
          const auto t = resolve_out(c.out, "mutual-contacts.csv");
          Outputs out(t.dir);
          outp = &out;
          out.write(t.primary, curve_csv(mc.curve));
          auto m = manifest_for("infopass dyads", ip, inputs);
          m["curve"] = curve_json(mc.curve);
          m["contact_pairs"] = mc.contact_pairs;
          m["contact_pairs_traded"] = mc.contact_pairs_traded;
          m["direct_contact_trade_rate"] = jnum(mc.direct_contact_trade_rate);
          finish(out, m);
        } else {
          infopass::DyadOptions opt;
          opt.require_trade = require_trade;
          if (dyad_support->count()) opt.min_support = min_support;
          const auto curve = infopass::dyad_report(g, infopass::parse_dyad(which), opt);
          const auto t = resolve_out(c.out, which + ".csv");
          Outputs out(t.dir);
          outp = &out;
          out.write(t.primary, curve_csv(curve));
          auto m = manifest_for("infopass dyads", ip, inputs);
          m["curve"] = curve_json(curve);
          finish(out, m);
        }
        (void)outp;
      } else {
        const bool is_rewire = ip_rewire->parsed();
        std::vector<infopass::RewireStats> rs;
        const auto ng = is_rewire ? infopass::rewire(g, c.seed, &rs) : infopass::randomize_sellers(g, c.seed);
        json layers = json::array();
        for (const auto& s : rs) {
          if (s.skipped) spdlog::warn("layer {} has {} edges; left unchanged", to_string(s.kind), s.edges);
          layers.push_back({{"layer", to_string(s.kind)}, {"edges", s.edges}, {"swaps", s.swaps},
                            {"attempts", s.attempts}, {"skipped", s.skipped}});
        }
        const auto t = resolve_out(c.out, "events.csv");
        Outputs out(t.dir);
        out.write(t.primary, graph_events(ng));
        out.write("contacts.csv", graph_contacts(ng));
        auto m = manifest_for(is_rewire ? "infopass rewire" : "infopass randomize-sellers", ip, inputs);
        m["seed"] = c.seed;
        if (is_rewire) m["layers"] = layers;
        finish(out, m);
      }
    } else if (trust_cmd->parsed()) {
      const auto listings = trust::load_listings(clusters_file);
      const auto ratings = trust::load_ratings(ratings_file);
      const auto items = trust::price_deviations(listings, ratings);
      if (items.skipped_missing_rating)
        spdlog::warn("{} items skipped: seller has no rating", items.skipped_missing_rating);
      const auto buckets = trust::bucket_by_rating(items.points);
      const auto sellers = trust::seller_deviation_profile(listings, ratings, min_items);
      auto fit_json = [](const std::vector<trust::DeviationPoint>& pts) -> json {
        try {
          const auto f = trust::fit_power(pts);
          return {{"a", f.a}, {"b", f.b}, {"c", f.c}, {"r_squared", f.r_squared},
                  {"zero_crossing", jnum(f.zero_crossing)}, {"elasticity", f.elasticity},
                  {"slope_at_median", f.slope_at_median}, {"median_rating", f.median_rating},
                  {"points", pts.size()}};
        } catch (const std::invalid_argument& e) {
          return {{"error", e.what()}, {"points", pts.size()}};
        }
      };
      json fit = fit_json(buckets);
      fit["fit_on"] = "rating-bucket averages of per-item deviations";
      fit["items"] = items.points.size();
      fit["skipped_missing_rating"] = items.skipped_missing_rating;
      fit["dropped_singleton_clusters"] = items.dropped_singleton_clusters;
      fit["per_seller"] = fit_json(sellers);
      fit["per_seller"]["min_items"] = min_items;

      std::ostringstream dev, bk, sp;
      dev << "cluster_id,item_id,seller,rating,deviation\n";
      for (const auto& p : items.points)
        dev << p.cluster_id << ',' << p.item_id << ',' << p.seller << ',' << fmt(p.rating) << ','
            << fmt(p.deviation) << '\n';
      bk << "rating,deviation,weight\n";
      for (const auto& p : buckets) bk << fmt(p.rating) << ',' << fmt(p.deviation) << ',' << fmt(p.weight) << '\n';
      sp << "seller,rating,deviation,items\n";
      for (const auto& p : sellers)
        sp << p.seller << ',' << fmt(p.rating) << ',' << fmt(p.deviation) << ',' << fmt(p.weight) << '\n';
      const auto t = resolve_out(c.out, "deviations.csv");
      Outputs out(t.dir);
      out.write(t.primary, dev.str());
      out.write("deviation_buckets.csv", bk.str());
      out.write("seller_profile.csv", sp.str());
      out.write("fit.json", fit.dump(2) + "\n");
      finish(out, manifest_for("trust", trust_cmd, {clusters_file, ratings_file}));
    } else if (choice_cmd->parsed()) {
      const auto g = load_graph(c);
      const auto rows = choice::load_choice_rows(choice_file);
      choice::BuildStats bs;
      const auto clusters = choice::build_decisions(rows, g, &bs);
      spdlog::info("{} clusters kept of {}, {} decisions", clusters.size(), bs.clusters_in, bs.decisions);
      const auto decisions = choice::extract_features(clusters, g, c.threads);
      choice::ExperimentOptions opt;
      opt.split_seed = split_seed;
      opt.ranker = ranker;
      opt.per_category = per_category;
      const auto res = choice::run_experiment(decisions, choice::subset_by_name(subset), opt);

      json mj = metrics_json(subset, res.model);
      json base = json::object();
      for (const auto& [b, m] : res.baselines) base[std::string(choice::to_string(b))] = metrics_json(std::string(choice::to_string(b)), m);
      mj["baselines"] = base;
      mj["per_category"] = per_category;
      mj["train_decisions"] = res.train_decisions;
      mj["test_decisions"] = res.test_decisions;
      json w = json::object();
      for (int f = 0; f < choice::kNumFeatures; ++f)
        if (res.global_model.mask[f]) w[std::string(choice::feature_name(f))] = res.global_model.weights[f];
      mj["weights"] = w;
      mj["conventions"] = {{"fractional_rank", "(rank - 1) / (k - 1), ties share the average rank"},
                           {"split", "75/25 by seeded hash of cluster_id"},
                           {"loss", "pairwise hinge, L2 regularised, seeded subgradient descent"},
                           {"feature_cutoff", "last second of the day before the purchase"}};
      mj["build"] = {{"clusters_in", bs.clusters_in}, {"dropped_too_few_sellers", bs.dropped_too_few},
                     {"dropped_too_many_sellers", bs.dropped_too_many},
                     {"dropped_first_day", bs.dropped_first_day}};

      const auto t = resolve_out(c.out, "metrics.json");
      Outputs out(t.dir);
      out.write(t.primary, mj.dump(2) + "\n");
      std::ostringstream fcsv;
      choice::write_features_csv(decisions, fcsv);
      out.write("features.csv", fcsv.str());
      if (all_subsets) {
        std::ostringstream sc;
        sc << "subset,p_at_1,mrr,mean_rank,n\n";
        for (const auto& s : choice::named_subsets()) {
          const auto r = choice::run_experiment(decisions, s, opt);
          sc << s.name << ',' << fmt(r.model.overall.p_at_1) << ','
             << fmt(r.model.overall.mrr) << ',' << fmt(r.model.overall.mean_rank) << ','
             << r.model.overall.n << '\n';
        }
        for (const auto& [b, m] : res.baselines)
          sc << choice::to_string(b) << ',' << fmt(m.overall.p_at_1) << ',' << fmt(m.overall.mrr)
             << ',' << fmt(m.overall.mean_rank) << ',' << m.overall.n << '\n';
        out.write("subsets.csv", sc.str());
      }
      auto m = manifest_for("choice", choice_cmd, {c.events, c.contacts, choice_file});
      m["seeds"] = {{"split_seed", split_seed}, {"ranker_seed", ranker.seed}};
      finish(out, m);
    } else if (syn->parsed()) {
      syngen::SynthConfig cfg = config_file.empty() ? syngen::SynthConfig{} : syngen::load_config(config_file);
      if (syn_seed) cfg.seed = *syn_seed;
      const auto ds = syngen::generate(cfg);
      // Stage into a hidden directory, then move files into place.
      const fs::path dir(c.out);
      const fs::path stage = dir / ".syngen.tmp";
      fs::remove_all(stage);
      syngen::write_dataset(ds, stage);
      Outputs out(dir);
      for (const char* name : {"events.csv", "contacts.csv", "clusters.csv", "ratings.csv",
                               "choice_clusters.csv", "truth.json"}) {
        std::ifstream in(stage / name, std::ios::binary);
        out.open(name) << in.rdbuf();
      }
      fs::remove_all(stage);
      auto m = manifest_for("syngen", syn, {config_file});
      m["seeds"] = {{"seed", cfg.seed}};
      m["config"] = syngen::to_config_text(cfg);
      finish(out, m);
    } else if (report->parsed()) {
      const auto t = resolve_out(c.out, "report.md");
      Outputs out(t.dir);
      json m = manifest_for("report", report, {});
      run_report(report_in, out, m);
      finish(out, m);
    }
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}

}  // namespace triadkit::cli
