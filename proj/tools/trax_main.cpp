// trax: train-track splitting dynamics toolkit
//
// Subcommands: validate, graph, census, measure, roof.  Every artifact embeds
// the run configuration; reruns with equal configuration are byte-identical.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "trax/cones.hpp"
#include "trax/flow.hpp"
#include "trax/markov.hpp"
#include "trax/moves.hpp"
#include "trax/seeds.hpp"
#include "trax/track_io.hpp"
#include "trax/typegraph.hpp"

namespace fs = std::filesystem;
using namespace trax;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;
  std::string surface_spec;
  std::string seed_id;
  std::string seed_file;
  std::string graph_file;
  std::string matrix_file;
  std::size_t budget = 200;
  std::size_t max_len = 6;
  int depth = 8;
  int horizon = 16;
  int r_points = 12;
  unsigned long rng_seed = 1;
  unsigned threads = 1;
  std::size_t mc_samples = 0;
  int mc_node = 0;
  double tol_stationary = 1e-12;
  double tol_eigen = 1e-10;
  std::string out_dir;
  std::string word;

  ordered_json to_json() const {
    ordered_json j;
    j["tool"] = "trax";
    j["version"] = kVersion;
    j["command"] = command;
    if (!surface_spec.empty()) j["surface"] = surface_spec;
    if (!seed_id.empty()) j["seed"] = seed_id;
    if (!seed_file.empty()) j["seed_file"] = seed_file;
    if (!graph_file.empty()) j["graph_file"] = graph_file;
    if (!matrix_file.empty()) j["matrix_file"] = matrix_file;
    j["budget"] = budget;
    j["max_len"] = max_len;
    j["depth"] = depth;
    j["horizon"] = horizon;
    j["r_points"] = r_points;
    j["rng_seed"] = rng_seed;
    j["threads"] = threads;
    if (mc_samples) {
      j["mc_samples"] = mc_samples;
      j["mc_node"] = mc_node;
    }
    j["tol_stationary"] = tol_stationary;
    j["tol_eigen"] = tol_eigen;
    if (!out_dir.empty()) j["out"] = out_dir;
    if (!word.empty()) j["word"] = word;
    return j;
  }
  std::string csv_header() const { return "# config: " + to_json().dump() + "\n"; }
};

Track load_seed(const RunConfig& cfg) {
  if (!cfg.seed_file.empty()) return load_track(cfg.seed_file);
  if (!cfg.seed_id.empty()) return seed_track_by_id(cfg.seed_id);
  if (!cfg.surface_spec.empty()) {
    auto comma = cfg.surface_spec.find(',');
    if (comma == std::string::npos) throw Error("--surface expects g,m");
    Surface s(std::stoi(cfg.surface_spec.substr(0, comma)),
              std::stoi(cfg.surface_spec.substr(comma + 1)));
    return seed_track(s);
  }
  throw Error("no seed given: use --surface, --seed or --seed-file");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

TypeGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(std::string("graph parse: ") + e.what());
  }
  return graph_from_json(j);
}

std::vector<int> parse_word(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t c = s.find(',', pos);
    if (c == std::string::npos) c = s.size();
    out.push_back(std::stoi(s.substr(pos, c - pos)));
    pos = c + 1;
  }
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int cmd_validate(const RunConfig& cfg) {
  Track t = load_seed(cfg);
  auto rep = validate(t);
  std::cout << rep.summary();
  if (rep.passed) {
    std::cout << "complete: recurrent=" << (is_recurrent(t) ? "yes" : "no")
              << " transversely-recurrent=" << (is_transversely_recurrent(t) ? "yes" : "no")
              << "\n";
  }
  return rep.passed ? kExitOk : kExitDomain;
}

int cmd_graph(const RunConfig& cfg) {
  Track seed = load_seed(cfg);
  TypeGraph g = build_type_graph({seed}, cfg.budget, cfg.threads);
  ordered_json j = graph_to_json(g);
  j["config"] = cfg.to_json();
  fs::create_directories(cfg.out_dir);
  write_file(cfg.out_dir + "/graph.json", j.dump(2) + "\n");
  write_file(cfg.out_dir + "/graph.dot", graph_to_dot(g));
  auto an = analyze_shift(g.adjacency());
  std::cout << "nodes " << g.nodes.size() << "  edges " << g.edges.size()
            << "  dropped-nonrecurrent " << g.dropped_nonrecurrent << "  frontier-edges "
            << g.frontier_edge_count << (g.truncated ? "  [truncated]" : "") << "\n";
  std::cout << "on materialized subgraph: transitive=" << (an.transitive ? "yes" : "no");
  if (an.transitive)
    std::cout << " period=" << an.period << " mixing=" << (an.mixing ? "yes" : "no");
  if (an.has_witness)
    std::cout << "  one-and-two-step witness (" << an.witness_i << "," << an.witness_j << ")";
  std::cout << "\n";
  return kExitOk;
}

int cmd_census(const RunConfig& cfg) {
  TypeGraph g = load_graph(cfg.graph_file);
  auto loops = enumerate_loops(g, cfg.max_len);
  std::string census = cfg.csv_header();
  census += "word,length,dilatation,period,primitive_word,primitive_matrix\n";
  std::vector<double> periods;
  for (const auto& l : loops.loops) {
    IntMatrix m = loop_matrix(g, l);
    auto d = dilatation(m, cfg.tol_eigen);
    std::string w;
    for (std::size_t i = 0; i < l.nodes.size(); ++i)
      w += (i ? "-" : "") + std::to_string(l.nodes[i]);
    census += w + "," + std::to_string(l.nodes.size()) + "," + fmt(d.lambda) + "," +
              fmt(d.period) + "," + (l.primitive ? "1" : "0") + "," + (d.primitive ? "1" : "0") +
              "\n";
    periods.push_back(d.period);
  }
  fs::create_directories(cfg.out_dir);
  write_file(cfg.out_dir + "/census.csv", census);

  // loops of period zero are not closed orbits of the suspension flow; the
  // growth report counts the positive-period (pseudo-Anosov type) loops over
  // an empirical quantile grid
  std::vector<double> positive;
  for (double p : periods)
    if (p > 1e-9) positive.push_back(p);
  std::sort(positive.begin(), positive.end());
  std::vector<double> grid;
  if (positive.empty()) {
    for (int k = 1; k <= cfg.r_points; ++k) grid.push_back(static_cast<double>(k));
  } else {
    for (int k = 1; k <= cfg.r_points; ++k) {
      std::size_t idx = positive.size() * static_cast<std::size_t>(k) / cfg.r_points;
      grid.push_back(positive[std::min(idx == 0 ? 0 : idx - 1, positive.size() - 1)]);
    }
  }
  auto rep = count_report(positive, g.surface, grid);
  std::string count = cfg.csv_header();
  count += "# positive-period symbolic loop counts on the materialized subgraph\n";
  count += "# reference: target (1/r)log n(r) -> " + fmt(rep.target) + ", upper bound " +
           fmt(rep.upper_bound) + "\n";
  count += "r,n,estimate\n";
  for (const auto& row : rep.rows)
    count += fmt(row.r) + "," + std::to_string(row.count) + "," + fmt(row.estimate) + "\n";
  write_file(cfg.out_dir + "/count.csv", count);
  std::cout << "loops " << loops.loops.size() << " (primitive " << loops.primitive_count
            << ", imprimitive " << loops.imprimitive_count << ")"
            << (loops.complete ? "" : "  [partial: walk budget]") << "\n";
  std::cout << "reference lines: target " << fmt(rep.target) << ", upper bound "
            << fmt(rep.upper_bound) << "\n";
  return kExitOk;
}

// largest strongly connected component of the adjacency, sorted
std::vector<int> largest_scc(const std::vector<std::vector<bool>>& a) {
  std::size_t n = a.size();
  std::vector<int> best;
  std::vector<bool> assigned(n, false);
  for (std::size_t s = 0; s < n; ++s) {
    if (assigned[s]) continue;
    auto reach = [&](bool fwd) {
      std::vector<bool> vis(n, false);
      std::vector<std::size_t> stack{s};
      vis[s] = true;
      while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v)
          if ((fwd ? a[u][v] : a[v][u]) && !vis[v]) {
            vis[v] = true;
            stack.push_back(v);
          }
      }
      return vis;
    };
    auto f = reach(true), bck = reach(false);
    std::vector<int> comp;
    for (std::size_t i = 0; i < n; ++i)
      if (f[i] && bck[i]) {
        comp.push_back(static_cast<int>(i));
        assigned[i] = true;
      }
    if (comp.size() > best.size()) best = comp;
  }
  return best;
}

StochasticMatrix load_matrix(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(std::string("matrix parse: ") + e.what());
  }
  StochasticMatrix m;
  for (const auto& row : j.at("P")) {
    RatVec r;
    for (const auto& x : row)
      r.push_back(x.is_string() ? rat_parse(x.get<std::string>()) : rat_parse(x.dump()));
    m.p.push_back(std::move(r));
  }
  if (m.p.size() != n) throw MalformedError("matrix size does not match the component");
  for (const auto& r : m.p)
    if (r.size() != n) throw MalformedError("matrix is not square");
  return m;
}

TypeGraph restrict_graph(const TypeGraph& g, const std::vector<int>& comp) {
  TypeGraph sub;
  sub.surface = g.surface;
  std::map<int, int> local;
  for (std::size_t i = 0; i < comp.size(); ++i) {
    local[comp[i]] = static_cast<int>(i);
    sub.nodes.push_back(g.nodes[comp[i]]);
  }
  for (const auto& e : g.edges)
    if (local.count(e.src) && local.count(e.dst))
      sub.edges.push_back({local[e.src], local[e.dst], e.choices, e.config, e.multiplicity});
  return sub;
}

int cmd_measure(const RunConfig& cfg) {
  TypeGraph g = load_graph(cfg.graph_file);
  auto a = g.adjacency();
  auto comp = largest_scc(a);
  if (comp.size() < 2) throw Error("measure: no nontrivial strongly connected component");
  std::size_t n = comp.size();
  std::vector<std::vector<bool>> asub(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) asub[i][j] = a[comp[i]][comp[j]];

  StochasticMatrix P =
      cfg.matrix_file.empty() ? uniform_stochastic(asub) : load_matrix(cfg.matrix_file, n);
  auto bad = P.support_mismatches(asub);
  if (!bad.empty()) {
    std::cerr << "support mismatch at (component-local indices):";
    for (std::size_t k = 0; k < bad.size() && k < 12; ++k)
      std::cerr << " (" << bad[k].first << "," << bad[k].second << ")";
    std::cerr << "\n";
    return kExitDomain;
  }
  auto m = MarkovMeasure::from_matrix(P);

  ordered_json out;
  out["config"] = cfg.to_json();
  out["component"] = comp;  // graph node index per component-local state
  out["stationary"] = ordered_json::array();
  for (const auto& x : m.pi) out["stationary"].push_back(rat_to_decimal(x, 30));
  out["entropy"] = shift_entropy(m);
  out["cylinders"] = ordered_json::array();
  for (std::size_t i = 0; i < n; ++i)
    out["cylinders"].push_back(
        ordered_json{{"word", std::vector<int>{static_cast<int>(i)}},
                     {"mass", rat_to_decimal(cylinder_mass(m, {static_cast<int>(i)}).mass, 30)}});
  std::size_t listed = 0;
  for (std::size_t i = 0; i < n && listed < 20; ++i)
    for (std::size_t j = 0; j < n && listed < 20; ++j) {
      if (!asub[i][j]) continue;
      auto cm = cylinder_mass(m, {static_cast<int>(i), static_cast<int>(j)});
      out["cylinders"].push_back(
          ordered_json{{"word", std::vector<int>{static_cast<int>(i), static_cast<int>(j)}},
                       {"mass", rat_to_decimal(cm.mass, 30)}});
      ++listed;
    }

  // avoidance decay for a tight word on the component: words on walks every
  // long trajectory must cross decay; words a sub-cycle can dodge forever
  // have rate one, so iterate candidates until the decay certifies
  TypeGraph sub = restrict_graph(g, comp);
  auto candidates = greedy_tight_words(sub, 40, 16);
  std::string avoidance = cfg.csv_header();
  std::optional<Word> chosen;
  AvoidanceReport chosen_rep;
  for (const auto& w : candidates) {
    int horizon = std::max<int>(cfg.horizon, static_cast<int>(w.nodes.size()) + 4);
    auto repav = avoidance_probability(m, w.nodes, horizon);
    if (!chosen || repav.rate < chosen_rep.rate) {
      chosen = w;
      chosen_rep = repav;
    }
    if (repav.rate_below_one) break;
  }
  if (chosen) {
    int horizon = std::max<int>(cfg.horizon, static_cast<int>(chosen->nodes.size()) + 4);
    out["avoidance"] = ordered_json{{"word", chosen->nodes},
                                    {"word_kind", "tight"},
                                    {"rate", chosen_rep.rate},
                                    {"rate_certified_below_one", chosen_rep.rate_below_one},
                                    {"fitted_c", chosen_rep.fitted_c}};
    avoidance += "m,probability,bound\n";
    for (int h = static_cast<int>(chosen->nodes.size()); h <= horizon; ++h) {
      auto r = avoidance_probability(m, chosen->nodes, h);
      avoidance += std::to_string(h) + "," + rat_to_decimal(r.probability, 15) + "," +
                   fmt(chosen_rep.fitted_c * std::pow(chosen_rep.rate, h)) + "\n";
    }
  } else {
    out["avoidance"] = ordered_json{{"word_kind", "none-found"}};
    avoidance += "m,probability,bound\n";
  }

  fs::create_directories(cfg.out_dir);
  write_file(cfg.out_dir + "/measure.json", out.dump(2) + "\n");
  write_file(cfg.out_dir + "/avoidance.csv", avoidance);

  if (cfg.mc_samples > 0) {
    auto rows = lebesgue_transitions_mc(g, cfg.mc_node, cfg.mc_samples, cfg.rng_seed, cfg.threads);
    std::string mc = cfg.csv_header();
    mc += "# monte-carlo approximation of the Lebesgue transition row; not exact\n";
    mc += "choices,target,materialized,dropped,count,frequency,std_error\n";
    for (const auto& r : rows)
      mc += r.choices + "," + r.target_hex + "," + (r.materialized ? "1" : "0") + "," +
            (r.dropped_nonrecurrent ? "1" : "0") + "," + std::to_string(r.count) + "," +
            fmt(r.frequency) + "," + fmt(r.std_error) + "\n";
    write_file(cfg.out_dir + "/mc_transitions.csv", mc);
  }
  std::cout << "component size " << n << "  entropy " << fmt(shift_entropy(m)) << "\n";
  return kExitOk;
}

int cmd_roof(const RunConfig& cfg) {
  TypeGraph g = load_graph(cfg.graph_file);
  std::vector<int> word;
  if (!cfg.word.empty()) {
    word = parse_word(cfg.word);
  } else {
    auto tight = find_tight_word_any(g, 40);
    if (!tight) throw Error("roof: no word given and no tight word found");
    auto loop = close_word_into_loop(g, tight->nodes);
    if (!loop) throw Error("roof: tight word cannot be closed into a loop");
    while (word.size() < static_cast<std::size_t>(cfg.depth) + loop->nodes.size() + 1)
      for (int x : loop->nodes) word.push_back(x);
    std::cout << "using the closure of a tight word: loop length " << loop->nodes.size() << "\n";
  }
  std::string csv = cfg.csv_header();
  csv += "position,value,radius,depth\n";
  double window = 0;
  std::size_t count = std::min<std::size_t>(word.size() - cfg.depth - 1, 24);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<int> tail(word.begin() + j, word.end());
    auto rv = roof_estimate(g, tail, cfg.depth);
    csv += std::to_string(j) + "," + fmt(rv.value) + "," + fmt(rv.radius) + "," +
           std::to_string(rv.depth_used) + "\n";
    window += rv.value;
    std::cout << "rho[" << j << "] = " << fmt(rv.value) << " +- " << fmt(rv.radius) << "\n";
  }
  std::cout << "window sum over " << count << " positions: " << fmt(window) << "\n";
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/roof.csv", csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"train-track splitting dynamics toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--threads", cfg.threads, "worker threads");
    sub->add_option("--rng-seed", cfg.rng_seed, "rng seed for sampling");
    sub->add_option("--tol-stationary", cfg.tol_stationary);
    sub->add_option("--tol-eigen", cfg.tol_eigen);
  };

  auto* v = app.add_subcommand("validate", "validate a track file or builtin seed");
  v->add_option("file", cfg.seed_file, "track json file");
  v->add_option("--seed", cfg.seed_id, "builtin seed id (g0m5, g2m0)");
  v->add_option("--surface", cfg.surface_spec, "builtin seed by surface, e.g. 0,5");

  auto* gr = app.add_subcommand("graph", "materialize the subshift graph");
  gr->add_option("--seed", cfg.seed_id);
  gr->add_option("--seed-file", cfg.seed_file);
  gr->add_option("--surface", cfg.surface_spec);
  gr->add_option("--budget", cfg.budget, "node budget");
  add_common(gr);

  auto* ce = app.add_subcommand("census", "periodic loop census and growth report");
  ce->add_option("--graph", cfg.graph_file)->required();
  ce->add_option("--max-len", cfg.max_len, "maximal loop word length");
  ce->add_option("--r-points", cfg.r_points);
  add_common(ce);

  auto* me = app.add_subcommand("measure", "Markov measure report on the largest component");
  me->add_option("--graph", cfg.graph_file)->required();
  me->add_option("--matrix", cfg.matrix_file, "stochastic matrix json; default uniform rows");
  me->add_option("--horizon", cfg.horizon, "avoidance horizon");
  me->add_option("--mc-samples", cfg.mc_samples, "monte-carlo samples for a transition row");
  me->add_option("--mc-node", cfg.mc_node, "node for the monte-carlo row");
  add_common(me);

  auto* ro = app.add_subcommand("roof", "roof function estimates along a word");
  ro->add_option("--graph", cfg.graph_file)->required();
  ro->add_option("--word", cfg.word, "comma separated node indices");
  ro->add_option("--depth", cfg.depth, "evaluation depth (edges)");
  add_common(ro);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(v)) {
      cfg.command = "validate";
      return cmd_validate(cfg);
    }
    if (app.got_subcommand(gr)) {
      cfg.command = "graph";
      if (cfg.out_dir.empty()) cfg.out_dir = ".";
      return cmd_graph(cfg);
    }
    if (app.got_subcommand(ce)) {
      cfg.command = "census";
      if (cfg.out_dir.empty()) cfg.out_dir = ".";
      return cmd_census(cfg);
    }
    if (app.got_subcommand(me)) {
      cfg.command = "measure";
      if (cfg.out_dir.empty()) cfg.out_dir = ".";
      return cmd_measure(cfg);
    }
    if (app.got_subcommand(ro)) {
      cfg.command = "roof";
      return cmd_roof(cfg);
    }
  } catch (const MalformedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
