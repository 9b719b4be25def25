#include "cli.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "agraph/answer_graph.h"
#include "agraph/catalog.h"
#include "agraph/planner.h"
#include "agraph/query.h"
#include "agraph/testkit.h"
#include "agraph/triplestore.h"

namespace agraph::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const auto& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string decode_tuple(const TripleStore& store, std::span<const NodeId> tuple) {
  std::string line;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i > 0) line += '\t';
    line += store.nodes().decode(tuple[i]);
  }
  return line;
}

struct Pipeline {
  EdgePlan plan;
  std::optional<TriangulationPlan> tplan;
  std::optional<AnswerGraph> ag;
};

// Plans and runs phase 1. A triangulation is attached only when edge burnback
// is requested, so that the default is node burnback alone.
Pipeline phase1(const ConjunctiveQuery& query, const TripleStore& store,
                const Catalog& catalog, bool edge_burnback) {
  Pipeline p;
  p.plan = plan_edgifier(query, catalog);
  const QueryShape shape = analyze_shape(query);
  if (edge_burnback && !shape.cycles.empty()) {
    p.tplan = plan_triangulation(query, shape, catalog);
  }
  EvalOptions options;
  options.edge_burnback = edge_burnback;
  p.ag.emplace(generate_answer_graph(query, p.plan, p.tplan ? &*p.tplan : nullptr,
                                     store, options));
  return p;
}

struct RunFlags {
  bool edge_burnback = false;
  bool no_factorize = false;
  bool emit_results = false;
  bool stats_json = false;
};

int cmd_load(const std::string& data, const std::string& snapshot, std::ostream& out) {
  std::ifstream in(data, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + data);
  const TripleStore store = load_ntriples(in);
  write_file(snapshot, [&](std::ostream& o) { save_snapshot(store, o); });
  const StoreStats s = store.stats();
  out << s.triples << " triples, " << s.nodes << " nodes, " << s.predicates
      << " predicates\n";
  return kOk;
}

int cmd_catalog(const std::string& store_path, const std::string& catalog_path,
                std::ostream& out) {
  const TripleStore store = load_store_file(store_path);
  const Catalog catalog = build_catalog(store);
  write_file(catalog_path, [&](std::ostream& o) { save_catalog(catalog, o); });
  out << catalog.one_grams().size() << " 1-grams, " << catalog.two_grams().size()
      << " 2-grams\n";
  return kOk;
}

int cmd_plan(const std::string& catalog_path, const std::string& query_path,
             std::ostream& out) {
  const Catalog catalog = load_catalog_file(catalog_path);
  const ConjunctiveQuery query = ConjunctiveQuery::parse(read_file(query_path));
  nlohmann::json j;
  j["edgifier"] = to_json(query, plan_edgifier(query, catalog));
  const QueryShape shape = analyze_shape(query);
  if (!shape.cycles.empty()) {
    j["triangulation"] = to_json(query, plan_triangulation(query, shape, catalog));
  }
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_run(const std::string& store_path, const std::string& catalog_path,
            const std::string& query_path, const RunFlags& flags, std::ostream& out) {
  const TripleStore store = load_store_file(store_path);
  const Catalog catalog = load_catalog_file(catalog_path);
  const ConjunctiveQuery query = ConjunctiveQuery::parse(read_file(query_path));

  EmbeddingSink sink;
  if (flags.emit_results) {
    sink = [&](std::span<const NodeId> tuple) { out << decode_tuple(store, tuple) << '\n'; };
  }

  const auto start = Clock::now();
  nlohmann::json stats;
  nlohmann::json plan_json;
  if (flags.no_factorize) {
    const EdgePlan plan = plan_edgifier(query, catalog);
    plan_json = to_json(query, plan);
    const DirectJoinStats d = direct_join(query, plan.order, store, sink);
    stats = {{"edgeWalks", d.edge_walks},
             {"agPairsPerEdge", nlohmann::json::array()},
             {"agTotal", 0},
             {"burnedNodes", 0},
             {"burnedPairs", 0},
             {"embeddings", d.embeddings},
             {"phase1Ms", 0.0},
             {"phase2Ms", d.elapsed_ms}};
  } else {
    Pipeline p = phase1(query, store, catalog, flags.edge_burnback);
    plan_json = to_json(query, p.plan);
    const DefactorizationStats d =
        generate_embeddings(*p.ag, plan_defactorization(query, *p.ag), sink);
    stats = stats_json(*p.ag, d);
  }
  stats["totalMs"] = ms_since(start);

  if (flags.stats_json) {
    out << stats.dump() << '\n';
    return kOk;
  }
  out << "query:\n" << query.to_string();
  out << "plan: " << plan_json.dump() << '\n';
  out << "mode: " << (flags.no_factorize ? "direct-join" : "two-phase")
      << (flags.edge_burnback && !flags.no_factorize ? " +edge-burnback" : "") << '\n';
  out << "agTotal: " << stats["agTotal"] << '\n';
  out << "embeddings: " << stats["embeddings"] << '\n';
  out << "edgeWalks: " << stats["edgeWalks"] << '\n';
  out << "phase1Ms: " << stats["phase1Ms"] << '\n';
  out << "phase2Ms: " << stats["phase2Ms"] << '\n';
  out << "totalMs: " << stats["totalMs"] << '\n';
  return kOk;
}

int cmd_mine(const std::string& store_path, const std::string& catalog_path,
             const std::string& template_name, std::size_t limit, std::ostream& out,
             std::ostream& err) {
  const Template* tmpl = find_template(template_name);
  if (tmpl == nullptr) {
    err << "unknown template: " << template_name << " (expected snowflake9 or diamond4)\n";
    return kUsage;
  }
  const TripleStore store = load_store_file(store_path);
  const Catalog catalog = load_catalog_file(catalog_path);
  for (const MinedQuery& m : mine_queries(*tmpl, store, catalog, limit)) {
    out << nlohmann::json(m).dump() << '\n';
  }
  return kOk;
}

int cmd_verify(const std::string& store_path, const std::string& query_path,
               bool edge_burnback, bool corrupt, std::ostream& out) {
  const TripleStore store = load_store_file(store_path);
  const ConjunctiveQuery query = ConjunctiveQuery::parse(read_file(query_path));
  const Catalog catalog = build_catalog(store);

  Pipeline p = phase1(query, store, catalog, edge_burnback);
  if (corrupt) {
    for (std::size_t e = 0; e < query.edges().size(); ++e) {
      const NodePairs pairs = p.ag->edge_set(e).sorted();
      if (!pairs.empty()) {
        p.ag->debug_erase_pair(e, pairs.front().first, pairs.front().second);
        break;
      }
    }
  }
  EmbeddingSet engine;
  generate_embeddings(*p.ag, plan_defactorization(query, *p.ag),
                      [&](std::span<const NodeId> t) { engine.emplace(t.begin(), t.end()); });
  const EmbeddingSet oracle = oracle_evaluate(query, store);

  if (engine == oracle) {
    out << "MATCH " << engine.size() << " = " << oracle.size() << '\n';
    return kOk;
  }
  out << "MISMATCH engine " << engine.size() << " != oracle " << oracle.size() << '\n';
  std::vector<std::vector<NodeId>> only;
  std::set_difference(oracle.begin(), oracle.end(), engine.begin(), engine.end(),
                      std::back_inserter(only));
  for (const auto& t : only) out << "- " << decode_tuple(store, t) << '\n';
  only.clear();
  std::set_difference(engine.begin(), engine.end(), oracle.begin(), oracle.end(),
                      std::back_inserter(only));
  for (const auto& t : only) out << "+ " << decode_tuple(store, t) << '\n';
  return kMismatch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-phase conjunctive query engine over labelled graphs", "agraph"};
  app.require_subcommand(1);

  std::string a, b, c;
  std::size_t limit = 0;
  RunFlags flags;
  bool corrupt = false;

  auto* load = app.add_subcommand("load", "Parse triple text and write a store snapshot");
  load->add_option("data", a, "Triple text file")->required();
  load->add_option("snapshot", b, "Snapshot to write")->required();

  auto* catalog = app.add_subcommand("catalog", "Build the label statistics catalog");
  catalog->add_option("store", a, "Snapshot or triple text")->required();
  catalog->add_option("catalog", b, "TSV to write")->required();

  auto* plan = app.add_subcommand("plan", "Print the edge order and triangulation as JSON");
  plan->add_option("catalog", a, "Catalog TSV")->required();
  plan->add_option("query", b, "Query file")->required();

  auto* runc = app.add_subcommand("run", "Evaluate a query");
  runc->add_option("store", a, "Snapshot or triple text")->required();
  runc->add_option("catalog", b, "Catalog TSV")->required();
  runc->add_option("query", c, "Query file")->required();
  runc->add_flag("--edge-burnback", flags.edge_burnback, "Triangulate cycles and burn back edges");
  runc->add_flag("--no-factorize", flags.no_factorize, "Direct join baseline without an answer graph");
  runc->add_flag("--emit-results", flags.emit_results, "Print embeddings as tab separated terms");
  runc->add_flag("--stats-json", flags.stats_json, "Print engine statistics as JSON");

  auto* mine = app.add_subcommand("mine", "Instantiate a template into non-empty queries");
  mine->add_option("store", a, "Snapshot or triple text")->required();
  mine->add_option("catalog", b, "Catalog TSV")->required();
  mine->add_option("template", c, "snowflake9 or diamond4")->required();
  mine->add_option("limit", limit, "Maximum number of queries")->required();

  auto* verify = app.add_subcommand("verify", "Compare engine embeddings with the oracle");
  verify->add_option("store", a, "Snapshot or triple text")->required();
  verify->add_option("query", b, "Query file")->required();
  verify->add_flag("--edge-burnback", flags.edge_burnback, "Triangulate cycles and burn back edges");
  verify->add_flag("--debug-corrupt-ag", corrupt, "Drop one answer graph pair before phase 2");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*load) return cmd_load(a, b, out);
    if (*catalog) return cmd_catalog(a, b, out);
    if (*plan) return cmd_plan(a, b, out);
    if (*runc) return cmd_run(a, b, c, flags, out);
    if (*mine) return cmd_mine(a, b, c, limit, out, err);
    if (*verify) return cmd_verify(a, b, flags.edge_burnback, corrupt, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace agraph::cli
