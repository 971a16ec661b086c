#ifndef TRAX_TYPEGRAPH_HPP
#define TRAX_TYPEGRAPH_HPP

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "trax/cones.hpp"
#include "trax/moves.hpp"
#include "trax/track.hpp"
#include "trax/track_io.hpp"

namespace trax {

// --- numbered classes (tracks modulo shifts) --------------------------------
//
// Shifts slide switch attachments along smooth strands.  Contracting every
// mixed branch collapses each maximal sliding region to a single generalized
// switch: one large end (a large branch's half) plus an ordered fan of small
// ends (small branches' halves), with the mixed branch numbers left over as
// an unordered label set.  On a recurrent track the mixed branches form a
// forest (a directed cycle of them forces a zero tooth, killing recurrence),
// so the collapse is well defined; it is invariant under shifts, and shifts
// act transitively on the resolutions of a collapse with a fixed number
// multiset.  The canonical class code is therefore a canonical code of the
// collapsed structure; shift_orbit below is the enumerative oracle for this.
struct CollapsedCluster {
  Half large;                 // root: the unique non-mixed half on a large slot
  std::vector<Half> leaves;   // non-mixed small halves, left to right
  std::vector<int> internal;  // mixed branch numbers, sorted
};

inline std::vector<CollapsedCluster> collapse_clusters(const Track& t) {
  Locator loc = build_locator(t);
  auto cls = classify_branches(t);
  std::vector<CollapsedCluster> out;
  std::vector<bool> seen(t.num_switches(), false);
  for (int r = 0; r < t.num_switches(); ++r) {
    const Half& lh = t.switches[r].large();
    if (cls[lh.branch] == BranchClass::Mixed) continue;
    CollapsedCluster c;
    c.large = lh;
    seen[r] = true;
    std::vector<std::pair<int, int>> stack;  // (switch, next slot: 1=sl, 2=sr)
    auto open = [&](const Half& h) {
      if (cls[h.branch] != BranchClass::Mixed) {
        c.leaves.push_back(h);
        return;
      }
      c.internal.push_back(h.branch);
      int y = loc.of(h.branch, 1 - h.end).sw;
      if (seen[y]) throw MalformedError("collapse: mixed branches form a cycle");
      seen[y] = true;
      stack.push_back({y, 1});
    };
    stack.push_back({r, 1});
    while (!stack.empty()) {
      if (stack.back().second > 2) {
        stack.pop_back();
        continue;
      }
      int sw = stack.back().first;
      int slot = stack.back().second;
      stack.back().second += 1;  // before open(): it may grow the stack
      Half h = slot == 1 ? t.switches[sw].small_left() : t.switches[sw].small_right();
      open(h);
    }
    std::sort(c.internal.begin(), c.internal.end());
    out.push_back(std::move(c));
  }
  for (bool s : seen)
    if (!s) throw MalformedError("collapse: switch not reached (mixed cycle)");
  return out;
}

namespace detail {

// Deterministic BFS encoding of the collapsed structure from a root cluster,
// with first-seen end tokens exactly as in canonical_code.
inline std::string collapse_code_from_root(const std::vector<CollapsedCluster>& cs,
                                           const std::vector<std::array<int, 2>>& cluster_of,
                                           int b, int root) {
  std::vector<int> order;
  std::vector<bool> visited(cs.size(), false);
  std::vector<int> queue{root};
  visited[root] = true;
  std::size_t qi = 0;
  while (qi < queue.size()) {
    int ci = queue[qi++];
    order.push_back(ci);
    auto visit_half = [&](const Half& h) {
      int other = cluster_of[h.branch][1 - h.end];
      if (!visited[other]) {
        visited[other] = true;
        queue.push_back(other);
      }
    };
    visit_half(cs[ci].large);
    for (const Half& h : cs[ci].leaves) visit_half(h);
  }
  std::string code;
  std::vector<int> first_end(b + 1, -1);
  for (int ci : order) {
    const CollapsedCluster& c = cs[ci];
    code.push_back(static_cast<char>(c.leaves.size()));
    code.push_back(static_cast<char>(c.internal.size()));
    for (int n : c.internal) code.push_back(static_cast<char>(n));
    auto emit = [&](const Half& h) {
      if (first_end[h.branch] < 0) first_end[h.branch] = h.end;
      code.push_back(static_cast<char>(h.branch));
      code.push_back(h.end == first_end[h.branch] ? '\x00' : '\x01');
    };
    emit(c.large);
    for (const Half& h : c.leaves) emit(h);
  }
  return code;
}

}  // namespace detail

struct ShiftClass {
  std::string code;
  Track representative;  // canonical resolution, in canonical storage form
};

inline std::string shift_class_code(const Track& t) {
  auto cs = collapse_clusters(t);
  int b = t.num_branches();
  std::vector<std::array<int, 2>> cluster_of(b + 1, {-1, -1});
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    cluster_of[cs[ci].large.branch][cs[ci].large.end] = static_cast<int>(ci);
    for (const Half& h : cs[ci].leaves) cluster_of[h.branch][h.end] = static_cast<int>(ci);
  }
  std::string best;
  for (std::size_t r = 0; r < cs.size(); ++r) {
    std::string c = detail::collapse_code_from_root(cs, cluster_of, b, static_cast<int>(r));
    if (best.empty() || c < best) best = std::move(c);
  }
  return best;
}

// Canonical resolution of the collapse: per cluster a right-leaning comb
// with the internal numbers ascending away from the root.
inline Track class_representative(const Track& t) {
  auto cs = collapse_clusters(t);
  Track out;
  out.surface = t.surface;
  out.branch_nums = t.branch_nums;
  std::sort(out.branch_nums.begin(), out.branch_nums.end());
  for (const auto& c : cs) {
    std::size_t q = c.leaves.size();
    if (q < 2) throw MalformedError("class_representative: cluster with fewer than two ends");
    Half carry = c.large;
    for (std::size_t i = 0; i + 2 < q; ++i) {
      Switch sw;
      sw[Slot::Large] = carry;
      sw[Slot::SmallLeft] = c.leaves[i];
      sw[Slot::SmallRight] = Half{c.internal[i], 0};
      out.switches.push_back(sw);
      carry = Half{c.internal[i], 1};
    }
    Switch last;
    last[Slot::Large] = carry;
    last[Slot::SmallLeft] = c.leaves[q - 2];
    last[Slot::SmallRight] = c.leaves[q - 1];
    out.switches.push_back(last);
  }
  return canonical_form(out);
}

inline ShiftClass shift_class(const Track& t) {
  return ShiftClass{shift_class_code(t), class_representative(t)};
}

// Enumerative oracle: the full shift orbit keyed by canonical_code.  Used by
// tests to certify the collapse-based class code on small cases.
inline std::map<std::string, Track> shift_orbit(const Track& t, std::size_t orbit_cap = 1000000) {
  std::map<std::string, Track> orbit;
  std::vector<const Track*> queue;
  auto it = orbit.emplace(canonical_code(t), canonical_form(t)).first;
  queue.push_back(&it->second);
  std::size_t qi = 0;
  while (qi < queue.size()) {
    const Track& cur = *queue[qi++];
    auto cls = classify_branches(cur);
    for (int f = 1; f <= cur.num_branches(); ++f) {
      if (cls[f] != BranchClass::Mixed) continue;
      ShiftResult res = shift(cur, f);
      std::string code = canonical_code(res.track);
      if (orbit.count(code)) continue;
      if (orbit.size() >= orbit_cap)
        throw ResourceError("shift orbit exceeds cap " + std::to_string(orbit_cap));
      auto ins = orbit.emplace(code, canonical_form(res.track)).first;
      queue.push_back(&ins->second);
    }
  }
  return orbit;
}

// --- root configurations -----------------------------------------------------
//
// A full split acts only at the root switches of the clusters, so the class
// of the result depends on the shift-orbit representative only through the
// top of each cluster's resolution: where the leaf fan is cut, how the
// internal numbers distribute over the two sides, and which number forms
// each side's top connector.  Enumerating these root configurations walks
// exactly the full splits of the whole orbit at polynomial cost.
struct RootConfig {
  int cut = 1;                       // leaves [0,cut) left of the root
  std::vector<int> prefix_internal;  // side connectors: top first, rest ascending
  std::vector<int> suffix_internal;
};

inline std::vector<RootConfig> enumerate_root_configs(const CollapsedCluster& c) {
  int q = static_cast<int>(c.leaves.size());
  int ni = static_cast<int>(c.internal.size());
  std::vector<RootConfig> out;
  for (int cut = 1; cut <= q - 1; ++cut) {
    int np = cut - 1, ns = q - 1 - cut;
    // subsets of size np for the prefix side
    std::vector<int> sel(ni, 0);
    std::fill(sel.begin(), sel.begin() + np, 1);
    std::sort(sel.begin(), sel.end(), std::greater<int>());
    // iterate subsets in deterministic (descending mask) order
    std::vector<std::vector<int>> subsets;
    {
      std::vector<int> idx(np);
      std::iota(idx.begin(), idx.end(), 0);
      while (true) {
        subsets.push_back(idx);
        int k = np - 1;
        while (k >= 0 && idx[k] == ni - np + k) --k;
        if (k < 0) break;
        idx[k] += 1;
        for (int j = k + 1; j < np; ++j) idx[j] = idx[j - 1] + 1;
      }
      if (np == 0) subsets.assign(1, {});
    }
    for (const auto& pick : subsets) {
      std::vector<int> pre, suf;
      std::vector<bool> used(ni, false);
      for (int i : pick) {
        pre.push_back(c.internal[i]);
        used[i] = true;
      }
      for (int i = 0; i < ni; ++i)
        if (!used[i]) suf.push_back(c.internal[i]);
      if (static_cast<int>(suf.size()) != ns) continue;
      auto tops = [](const std::vector<int>& side) {
        std::vector<std::vector<int>> arr;
        if (side.empty()) {
          arr.push_back({});
          return arr;
        }
        for (std::size_t t = 0; t < side.size(); ++t) {
          std::vector<int> v;
          v.push_back(side[t]);
          for (std::size_t k = 0; k < side.size(); ++k)
            if (k != t) v.push_back(side[k]);
          arr.push_back(std::move(v));
        }
        return arr;
      };
      for (const auto& pv : tops(pre))
        for (const auto& sv : tops(suf)) {
          RootConfig rc;
          rc.cut = cut;
          rc.prefix_internal = pv;
          rc.suffix_internal = sv;
          out.push_back(std::move(rc));
        }
    }
  }
  return out;
}

// Caterpillar subtree over `leaves` with connector list `internal`
// (top first).  Appends switches; returns the half to hang at the parent.
namespace detail {

inline Half resolve_side(std::vector<Switch>& switches, const std::vector<Half>& leaves,
                         const std::vector<int>& internal) {
  std::size_t q = leaves.size();
  if (q == 1) return leaves[0];
  // q >= 2: internal has q-1 entries; chain them
  for (std::size_t j = 0; j < q - 1; ++j) {
    Switch sw;
    sw[Slot::Large] = Half{internal[j], 1};
    sw[Slot::SmallLeft] = leaves[j];
    sw[Slot::SmallRight] = (j + 1 < q - 1) ? Half{internal[j + 1], 0} : leaves[q - 1];
    switches.push_back(sw);
  }
  return Half{internal[0], 0};
}

}  // namespace detail

// Orbit representative realizing the given root configurations.
inline Track resolve_with_configs(const Track& rep, const std::vector<CollapsedCluster>& cs,
                                  const std::vector<RootConfig>& configs) {
  Track out;
  out.surface = rep.surface;
  out.branch_nums = rep.branch_nums;
  std::sort(out.branch_nums.begin(), out.branch_nums.end());
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    const CollapsedCluster& c = cs[ci];
    const RootConfig& rc = configs[ci];
    std::vector<Half> pre_leaves(c.leaves.begin(), c.leaves.begin() + rc.cut);
    std::vector<Half> suf_leaves(c.leaves.begin() + rc.cut, c.leaves.end());
    Switch root;
    root[Slot::Large] = c.large;
    root[Slot::SmallLeft] = detail::resolve_side(out.switches, pre_leaves, rc.prefix_internal);
    root[Slot::SmallRight] = detail::resolve_side(out.switches, suf_leaves, rc.suffix_internal);
    out.switches.push_back(root);
  }
  return out;
}

inline std::string config_label(const std::vector<RootConfig>& configs) {
  std::string s;
  for (const auto& rc : configs) {
    if (!s.empty()) s += ";";
    s += std::to_string(rc.cut) + "|";
    for (std::size_t i = 0; i < rc.prefix_internal.size(); ++i)
      s += (i ? "," : "") + std::to_string(rc.prefix_internal[i]);
    s += "|";
    for (std::size_t i = 0; i < rc.suffix_internal.size(); ++i)
      s += (i ? "," : "") + std::to_string(rc.suffix_internal[i]);
  }
  return s;
}

inline std::vector<RootConfig> parse_config_label(const std::string& s) {
  std::vector<RootConfig> out;
  std::size_t pos = 0;
  auto ints = [](const std::string& part) {
    std::vector<int> v;
    std::size_t p = 0;
    while (p < part.size()) {
      std::size_t c = part.find(',', p);
      if (c == std::string::npos) c = part.size();
      if (c > p) v.push_back(std::stoi(part.substr(p, c - p)));
      p = c + 1;
    }
    return v;
  };
  while (pos <= s.size()) {
    std::size_t end = s.find(';', pos);
    if (end == std::string::npos) end = s.size();
    std::string item = s.substr(pos, end - pos);
    if (!item.empty()) {
      std::size_t b1 = item.find('|');
      std::size_t b2 = item.find('|', b1 + 1);
      if (b1 == std::string::npos || b2 == std::string::npos)
        throw MalformedError("bad config label: " + s);
      RootConfig rc;
      rc.cut = std::stoi(item.substr(0, b1));
      rc.prefix_internal = ints(item.substr(b1 + 1, b2 - b1 - 1));
      rc.suffix_internal = ints(item.substr(b2 + 1));
      out.push_back(std::move(rc));
    }
    if (end == s.size()) break;
    pos = end + 1;
  }
  return out;
}

// --- the type graph ----------------------------------------------------------

struct TypeGraphNode {
  std::string code;
  Track representative;
};

// One stored realization per symbolic edge: the direction vector (ascending
// large-branch order of the resolution) plus the root-configuration label
// that rebuilds the split's orbit representative.  multiplicity counts all
// (config, direction) realizations that landed on the same target.
struct TypeGraphEdge {
  int src = 0;
  int dst = 0;
  std::string choices;
  std::string config;
  long multiplicity = 1;
};

struct TypeGraph {
  Surface surface{0, 5};
  std::size_t node_budget = 0;
  bool truncated = false;
  long dropped_nonrecurrent = 0;
  long frontier_edge_count = 0;
  std::vector<std::string> frontier;
  std::vector<TypeGraphNode> nodes;  // sorted by code
  std::vector<TypeGraphEdge> edges;  // sorted by (src, dst)

  int index_of(const std::string& code) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].code == code) return static_cast<int>(i);
    return -1;
  }

  std::vector<std::vector<bool>> adjacency() const {
    std::vector<std::vector<bool>> a(nodes.size(), std::vector<bool>(nodes.size(), false));
    for (const auto& e : edges) a[e.src][e.dst] = true;
    return a;
  }

  const TypeGraphEdge* edge_between(int i, int j) const {
    for (const auto& e : edges)
      if (e.src == i && e.dst == j) return &e;
    return nullptr;
  }
};

// Replays an edge realization; returns the full-split result and carrying
// matrix applied to the stored source representative's resolution.
inline FullSplitResult replay_edge(const TypeGraph& g, const TypeGraphEdge& e) {
  const Track& rep = g.nodes[e.src].representative;
  auto cs = collapse_clusters(rep);
  Track res = resolve_with_configs(rep, cs, parse_config_label(e.config));
  auto larges = large_branches(res);
  if (larges.size() != e.choices.size())
    throw MalformedError("replay_edge: choice vector does not match large branches");
  std::map<int, SplitDirection> choices;
  for (std::size_t i = 0; i < larges.size(); ++i)
    choices[larges[i]] = e.choices[i] == 'L' ? SplitDirection::Left : SplitDirection::Right;
  return full_split(res, choices);
}

inline IntMatrix edge_matrix(const TypeGraph& g, const TypeGraphEdge& e) {
  return replay_edge(g, e).carry;
}

namespace detail {

struct Expansion {
  struct Out {
    std::string choices;
    std::string config;
    std::string target_code;
    Track target_rep;
    long multiplicity = 1;
  };
  std::vector<Out> outs;  // deduplicated by target, sorted by target code
  long dropped = 0;
};

inline Expansion expand_node(const Track& rep) {
  Expansion ex;
  auto cs = collapse_clusters(rep);
  std::vector<std::vector<RootConfig>> per_cluster;
  per_cluster.reserve(cs.size());
  for (const auto& c : cs) per_cluster.push_back(enumerate_root_configs(c));

  std::map<std::string, Expansion::Out> by_target;
  std::vector<std::size_t> odo(cs.size(), 0);
  std::vector<RootConfig> current(cs.size());
  while (true) {
    for (std::size_t i = 0; i < cs.size(); ++i) current[i] = per_cluster[i][odo[i]];
    Track res = resolve_with_configs(rep, cs, current);
    auto larges = large_branches(res);
    std::size_t k = larges.size();
    std::string cfg = config_label(current);
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      std::map<int, SplitDirection> choices;
      std::string label(k, 'R');
      for (std::size_t idx = 0; idx < k; ++idx)
        if ((mask >> idx) & 1) {
          choices[larges[idx]] = SplitDirection::Left;
          label[idx] = 'L';
        } else {
          choices[larges[idx]] = SplitDirection::Right;
        }
      FullSplitResult fs = full_split(res, choices);
      ShiftClass cls;
      try {
        cls = shift_class(fs.track);  // throws on mixed cycles: never recurrent
      } catch (const MalformedError&) {
        ex.dropped += 1;
        continue;
      }
      if (!is_recurrent(fs.track)) {
        ex.dropped += 1;
        continue;
      }
      auto it = by_target.find(cls.code);
      if (it == by_target.end()) {
        by_target.emplace(cls.code,
                          Expansion::Out{label, cfg, cls.code, cls.representative, 1});
      } else {
        it->second.multiplicity += 1;
        if (std::tie(label, cfg) < std::tie(it->second.choices, it->second.config)) {
          it->second.choices = label;
          it->second.config = cfg;
        }
      }
    }
    // odometer
    std::size_t pos = 0;
    while (pos < cs.size()) {
      if (++odo[pos] < per_cluster[pos].size()) break;
      odo[pos] = 0;
      ++pos;
    }
    if (pos == cs.size()) break;
  }
  for (auto& [code, out] : by_target) ex.outs.push_back(std::move(out));
  return ex;
}

}  // namespace detail

// --- trajectory scouting ------------------------------------------------------
//
// Plain breadth-first admission spends any desk-scale budget on shallow
// shells whose internal loops never mix all branches, so the materialized
// window would contain neither tight words nor interesting periodic orbits.
// Splitting trajectories driven by fixed random carried measures fix that:
//   * contiguous revisits of a numbered class are certified short cycles;
//   * revisits of the *unnumbered* type with a branch-mixing carrying
//     product in between yield, after composing the induced renumbering to
//     its full order, genuine filling loops (the subshift is equivariant
//     under renumbering, so the permuted copies of the segment are again
//     admissible words).
// The scout admits such loops whole, shortest first, then pads with the
// trajectory classes in visit order.  All of it is deterministic.

namespace detail {

inline Track renumber_track(const Track& t, const std::vector<int>& perm) {  // perm[old] = new
  Track out = t;
  for (auto& sw : out.switches)
    for (auto& h : sw.slot) h.branch = perm[h.branch];
  return out;
}

// canonical code of the collapse with the numbering erased; every optimal
// traversal contributes its token -> branch-number table, so that a pair of
// tracks with equal code yields candidate renumberings between them
struct UnnumberedCode {
  std::string code;
  std::vector<std::vector<int>> mappings;
};

inline UnnumberedCode unnumbered_class_code(const Track& t) {
  auto cs = collapse_clusters(t);
  int b = t.num_branches();
  std::vector<std::array<int, 2>> cluster_of(b + 1, {-1, -1});
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    cluster_of[cs[ci].large.branch][cs[ci].large.end] = static_cast<int>(ci);
    for (const auto& h : cs[ci].leaves) cluster_of[h.branch][h.end] = static_cast<int>(ci);
  }
  UnnumberedCode out;
  for (std::size_t root = 0; root < cs.size(); ++root) {
    std::vector<int> order;
    std::vector<bool> vis(cs.size(), false);
    std::vector<int> queue{static_cast<int>(root)};
    vis[root] = true;
    std::size_t qi = 0;
    while (qi < queue.size()) {
      int ci = queue[qi++];
      order.push_back(ci);
      auto visit = [&](const Half& h) {
        int o = cluster_of[h.branch][1 - h.end];
        if (!vis[o]) {
          vis[o] = true;
          queue.push_back(o);
        }
      };
      visit(cs[ci].large);
      for (const auto& h : cs[ci].leaves) visit(h);
    }
    std::string code;
    std::vector<int> tok(b + 1, -1), tok2num;
    std::vector<int> first_end(b + 1, -1);
    for (int ci : order) {
      const auto& c = cs[ci];
      code.push_back(static_cast<char>(c.leaves.size()));
      code.push_back(static_cast<char>(c.internal.size()));
      auto emit = [&](const Half& h) {
        if (tok[h.branch] < 0) {
          tok[h.branch] = static_cast<int>(tok2num.size());
          tok2num.push_back(h.branch);
        }
        if (first_end[h.branch] < 0) first_end[h.branch] = h.end;
        code.push_back(static_cast<char>(tok[h.branch]));
        code.push_back(h.end == first_end[h.branch] ? '\x00' : '\x01');
      };
      emit(c.large);
      for (const auto& h : c.leaves) emit(h);
      // internal numbers are interchangeable within a cluster: record them
      // in sorted order, erased from the code itself
      for (int nn : c.internal) {
        tok[nn] = static_cast<int>(tok2num.size());
        tok2num.push_back(nn);
      }
    }
    if (out.code.empty() || code < out.code) {
      out.code = code;
      out.mappings.clear();
      out.mappings.push_back(tok2num);
    } else if (code == out.code) {
      out.mappings.push_back(tok2num);
    }
  }
  return out;
}

inline int permutation_order(const std::vector<int>& perm, int b) {
  long ord = 1;
  std::vector<bool> seen(b + 1, false);
  for (int s = 1; s <= b; ++s) {
    if (seen[s]) continue;
    long len = 0;
    int x = s;
    while (!seen[x]) {
      seen[x] = true;
      x = perm[x];
      ++len;
    }
    ord = std::lcm(ord, len);
  }
  return static_cast<int>(ord);
}

}  // namespace detail

inline std::vector<ShiftClass> scout_classes(const Track& seed, std::size_t max_classes,
                                             unsigned trajectories = 4,
                                             std::size_t max_steps = 2000) {
  int b = seed.num_branches();
  struct Step {
    std::string code;        // numbered class code
    std::string ucode;       // unnumbered class code
    std::vector<std::vector<int>> maps;  // token -> number tables
    BoolMatrix pattern;      // carrying pattern of the step's full split
    Track rep;               // canonical representative
  };
  std::vector<std::vector<Step>> paths;
  auto cycles = vertex_cycles(seed);
  for (unsigned traj = 0; traj < trajectories; ++traj) {
    std::mt19937_64 rng(0x5eed0000u + traj);
    std::vector<Int> mu(b, Int(0));
    for (const auto& c : cycles) {
      Int coeff = Int(rng()) * Int(rng()) + 1;
      for (int i = 0; i < b; ++i) mu[i] += coeff * c[i];
    }
    Track cur = seed;
    std::vector<Step> path;
    for (std::size_t step = 0; step < max_steps; ++step) {
      Locator loc = build_locator(cur);
      auto larges = large_branches(cur);
      std::map<int, SplitDirection> ch;
      for (int e : larges) ch[e] = compatible_direction_int(cur, loc, mu, e);
      FullSplitResult fs = full_split(cur, ch);
      std::vector<Int> post = mu;
      bool degenerate = false;
      for (int e : larges) {
        Int drop(0);
        for (int j = 0; j < b; ++j)
          if (j != e - 1) drop += fs.carry.at(e - 1, j) * mu[j];
        post[e - 1] = mu[e - 1] - drop;
        if (post[e - 1] < 0) degenerate = true;
      }
      if (degenerate) break;
      mu = std::move(post);
      cur = fs.track;
      ShiftClass cls = shift_class(cur);
      auto un = detail::unnumbered_class_code(cur);
      path.push_back(Step{cls.code, un.code, un.mappings, BoolMatrix::from(fs.carry),
                          std::move(cls.representative)});
      for (const auto& w : mu) degenerate = degenerate || w == 0;
      if (degenerate) break;  // rational direction exhausted
    }
    paths.push_back(std::move(path));
  }

  std::vector<ShiftClass> out;
  std::set<std::string> admitted;
  auto admit = [&](const std::string& code, const Track& rep) {
    if (admitted.count(code) || out.size() >= max_classes) return;
    admitted.insert(code);
    out.push_back(ShiftClass{code, rep});
  };

  // 1. filling loops from unnumbered revisits with branch-mixing products
  struct FillingLoop {
    std::size_t total_len;
    std::size_t traj, start, len;
    std::vector<int> perm;  // perm[old] = new, applied once per segment copy
  };
  std::vector<FillingLoop> filling;
  for (std::size_t t = 0; t < paths.size(); ++t) {
    const auto& path = paths[t];
    std::map<std::string, std::vector<std::size_t>> occ;
    for (std::size_t j = 0; j < path.size(); ++j) occ[path[j].ucode].push_back(j);
    for (const auto& [ucode, pos] : occ) {
      for (std::size_t a = 0; a < pos.size(); ++a) {
        bool found_for_a = false;
        for (std::size_t c = a + 1; c < pos.size() && !found_for_a; ++c) {
          std::size_t i = pos[a], j = pos[c];
          BoolMatrix prod = BoolMatrix::identity(static_cast<std::size_t>(b));
          for (std::size_t k = i + 1; k <= j; ++k) prod = prod * path[k].pattern;
          if (!is_primitive_pattern(prod)) continue;
          // candidate renumberings carrying class(x_j) onto class(x_i)
          for (const auto& mi : path[i].maps) {
            if (found_for_a) break;
            for (const auto& mj : path[j].maps) {
              if (mi.size() != mj.size()) continue;
              std::vector<int> perm(b + 1, 0);
              for (std::size_t tk = 0; tk < mj.size(); ++tk) perm[mj[tk]] = mi[tk];
              bool total = true;
              for (int x = 1; x <= b; ++x) total = total && perm[x] >= 1;
              if (!total) continue;
              Track rj = detail::renumber_track(path[j].rep, perm);
              if (shift_class_code(rj) != path[i].code) continue;
              int ord = detail::permutation_order(perm, b);
              std::size_t total_len = static_cast<std::size_t>(ord) * (j - i);
              if (total_len > max_classes) continue;
              filling.push_back({total_len, t, i, j - i, perm});
              found_for_a = true;
              break;
            }
          }
        }
        if (found_for_a) break;  // one loop per base position suffices
      }
    }
  }
  std::sort(filling.begin(), filling.end(), [](const FillingLoop& x, const FillingLoop& y) {
    if (x.total_len != y.total_len) return x.total_len < y.total_len;
    if (x.traj != y.traj) return x.traj < y.traj;
    return x.start < y.start;
  });
  // cluster filling loops by window overlap within a trajectory: overlapping
  // windows share their base classes, so the materialized union branches at
  // the window exits and carries positive entropy
  std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> windows_by_traj;
  std::size_t filling_admitted = 0;
  for (const auto& fl : filling) {
    if (out.size() + fl.total_len > (max_classes * 7) / 8) continue;
    if (filling_admitted > 0) {
      bool overlaps = false;
      for (const auto& [lo, hi] : windows_by_traj[fl.traj])
        if (fl.start < hi && lo < fl.start + fl.len) overlaps = true;
      if (!overlaps) continue;
    }
    windows_by_traj[fl.traj].push_back({fl.start, fl.start + fl.len});
    // identity permutation applied cumulatively per segment copy
    std::vector<int> acc(b + 1);
    for (int x = 0; x <= b; ++x) acc[x] = x;
    int ord = detail::permutation_order(fl.perm, b);
    for (int copy = 0; copy < ord; ++copy) {
      for (std::size_t j = fl.start; j < fl.start + fl.len; ++j) {
        Track r = detail::renumber_track(paths[fl.traj][j].rep, acc);
        ShiftClass cls = shift_class(r);
        admit(cls.code, cls.representative);
      }
      std::vector<int> next(b + 1);
      for (int x = 1; x <= b; ++x) next[x] = fl.perm[acc[x]];
      next[0] = 0;
      acc = std::move(next);
    }
    filling_admitted += 1;
  }

  // 2. short numbered revisit loops, whole and shortest first
  struct LoopRef {
    std::size_t traj, start, len;
  };
  std::vector<LoopRef> loops;
  for (std::size_t t = 0; t < paths.size(); ++t) {
    std::map<std::string, std::size_t> last;
    for (std::size_t j = 0; j < paths[t].size(); ++j) {
      auto it = last.find(paths[t][j].code);
      if (it != last.end()) loops.push_back({t, it->second, j - it->second});
      last[paths[t][j].code] = j;
    }
  }
  std::sort(loops.begin(), loops.end(), [](const LoopRef& x, const LoopRef& y) {
    if (x.len != y.len) return x.len < y.len;
    if (x.traj != y.traj) return x.traj < y.traj;
    return x.start < y.start;
  });
  for (const auto& l : loops) {
    if (out.size() + l.len > max_classes) continue;  // whole loops only
    for (std::size_t j = l.start; j < l.start + l.len; ++j)
      admit(paths[l.traj][j].code, paths[l.traj][j].rep);
  }

  // 3. pad with trajectory classes in visit order
  for (const auto& path : paths)
    for (const auto& st : path) admit(st.code, st.rep);
  return out;
}

// Materializes the subshift from the given seeds: admit the seed classes and
// a deterministic trajectory scout, then expand breadth-first (all shift
// realizations per node, via root configurations) until the node budget is
// exhausted.  Output is deterministic for fixed seeds and budget regardless
// of the worker count: each wave is expanded in parallel but merged in node
// order.
inline TypeGraph build_type_graph(const std::vector<Track>& seeds, std::size_t node_budget,
                                  unsigned threads = 1, bool scout = true) {
  if (node_budget == 0) throw Error("build_type_graph: budget must be positive");
  if (seeds.empty()) throw Error("build_type_graph: no seeds");
  TypeGraph g;
  g.surface = seeds.front().surface;
  g.node_budget = node_budget;
  for (const auto& s : seeds) {
    auto rep = validate(s);
    if (!rep.passed) throw MalformedError("build_type_graph: seed fails validation");
    if (!is_recurrent(s) || !is_transversely_recurrent(s))
      throw MalformedError("build_type_graph: seed track is not complete");
  }

  std::map<std::string, int> index;
  std::set<std::string> frontier;
  std::vector<int> wave;
  auto admit = [&](const ShiftClass& c) {
    if (index.count(c.code)) return;
    if (g.nodes.size() >= node_budget) {
      g.truncated = true;
      frontier.insert(c.code);
      return;
    }
    index[c.code] = static_cast<int>(g.nodes.size());
    wave.push_back(static_cast<int>(g.nodes.size()));
    g.nodes.push_back({c.code, c.representative});
  };
  {
    std::vector<ShiftClass> classes(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) classes[i] = shift_class(seeds[i]);
    std::sort(classes.begin(), classes.end(),
              [](const ShiftClass& a, const ShiftClass& b) { return a.code < b.code; });
    for (auto& c : classes) admit(c);
  }
  if (scout)
    for (const auto& s : seeds)
      for (const auto& c : scout_classes(s, node_budget)) admit(c);

  while (!wave.empty()) {
    std::vector<detail::Expansion> results(wave.size());
    unsigned nt = std::max(1u, threads);
    std::size_t chunk = (wave.size() + nt - 1) / nt;
    std::vector<std::future<void>> futs;
    for (unsigned w = 0; w < nt; ++w) {
      std::size_t lo = w * chunk, hi = std::min(wave.size(), lo + chunk);
      if (lo >= hi) break;
      futs.push_back(std::async(std::launch::async, [&, lo, hi]() {
        for (std::size_t i = lo; i < hi; ++i)
          results[i] = detail::expand_node(g.nodes[wave[i]].representative);
      }));
    }
    for (auto& f : futs) f.get();

    std::vector<int> next_wave;
    for (std::size_t i = 0; i < wave.size(); ++i) {
      g.dropped_nonrecurrent += results[i].dropped;
      for (auto& out : results[i].outs) {
        auto it = index.find(out.target_code);
        int dst;
        if (it != index.end()) {
          dst = it->second;
        } else if (g.nodes.size() < node_budget) {
          dst = static_cast<int>(g.nodes.size());
          index[out.target_code] = dst;
          g.nodes.push_back({out.target_code, out.target_rep});
          next_wave.push_back(dst);
        } else {
          g.truncated = true;
          frontier.insert(out.target_code);
          g.frontier_edge_count += 1;
          continue;
        }
        g.edges.push_back({wave[i], dst, out.choices, out.config, out.multiplicity});
      }
    }
    wave = std::move(next_wave);
  }

  // sort nodes by code and remap edges, so serialization is storage-free
  std::vector<int> order(g.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return g.nodes[a].code < g.nodes[b].code; });
  std::vector<int> rankof(g.nodes.size());
  for (std::size_t r = 0; r < order.size(); ++r) rankof[order[r]] = static_cast<int>(r);
  std::vector<TypeGraphNode> sorted_nodes;
  sorted_nodes.reserve(g.nodes.size());
  for (int idx : order) sorted_nodes.push_back(std::move(g.nodes[idx]));
  g.nodes = std::move(sorted_nodes);
  for (auto& e : g.edges) {
    e.src = rankof[e.src];
    e.dst = rankof[e.dst];
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const TypeGraphEdge& a, const TypeGraphEdge& b) {
    if (a.src != b.src) return a.src < b.src;
    return a.dst < b.dst;
  });
  g.frontier.assign(frontier.begin(), frontier.end());
  return g;
}

// --- shift-space analysis -----------------------------------------------

struct ShiftAnalysis {
  bool transitive = false;
  long period = 0;
  bool mixing = false;
  bool has_witness = false;
  int witness_i = -1, witness_j = -1;  // a_ij = 1 and (A^2)_ij >= 1
};

inline ShiftAnalysis analyze_shift(const std::vector<std::vector<bool>>& a) {
  ShiftAnalysis out;
  std::size_t n = a.size();
  if (n == 0) return out;
  auto reach = [&](bool forward) {
    std::vector<bool> vis(n, false);
    std::vector<std::size_t> stack{0};
    vis[0] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        bool has = forward ? a[u][v] : a[v][u];
        if (has && !vis[v]) {
          vis[v] = true;
          stack.push_back(v);
        }
      }
    }
    return vis;
  };
  auto fwd = reach(true), bwd = reach(false);
  bool strong = true;
  for (std::size_t i = 0; i < n; ++i) strong = strong && fwd[i] && bwd[i];
  bool has_edge = false;
  for (std::size_t i = 0; i < n && !has_edge; ++i)
    for (std::size_t j = 0; j < n && !has_edge; ++j) has_edge = a[i][j];
  out.transitive = strong && has_edge;
  if (out.transitive) {
    std::vector<long> level(n, -1);
    std::vector<std::size_t> queue{0};
    level[0] = 0;
    std::size_t qi = 0;
    while (qi < queue.size()) {
      std::size_t u = queue[qi++];
      for (std::size_t v = 0; v < n; ++v)
        if (a[u][v] && level[v] < 0) {
          level[v] = level[u] + 1;
          queue.push_back(v);
        }
    }
    long gc = 0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v)
        if (a[u][v]) gc = std::gcd(gc, level[u] + 1 - level[v]);
    out.period = gc < 0 ? -gc : gc;
    out.mixing = out.period == 1;
  }
  // witness scan via bitset rows: need a_ij = 1 and (A^2)_ij >= 1
  std::size_t words = (n + 63) / 64;
  std::vector<std::vector<uint64_t>> rows(n, std::vector<uint64_t>(words, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j]) rows[i][j / 64] |= uint64_t{1} << (j % 64);
  for (std::size_t i = 0; i < n && !out.has_witness; ++i) {
    std::vector<uint64_t> two(words, 0);
    for (std::size_t k = 0; k < n; ++k)
      if (a[i][k])
        for (std::size_t w = 0; w < words; ++w) two[w] |= rows[k][w];
    for (std::size_t w = 0; w < words && !out.has_witness; ++w) {
      uint64_t both = two[w] & rows[i][w];
      if (both) {
        out.has_witness = true;
        out.witness_i = static_cast<int>(i);
        out.witness_j = static_cast<int>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(both)));
      }
    }
  }
  return out;
}

// --- tight words ----------------------------------------------------------

struct Word {
  std::vector<int> nodes;
  bool admissible = true;
};

// A word is tight iff the product of its carrying matrices is entrywise
// positive.  Zero patterns only fill in along a walk (every carry matrix has
// a positive diagonal), so breadth-first search with (node, pattern)
// memoization finds shortest tight words.
inline std::vector<Word> find_tight_words(const TypeGraph& g, std::size_t max_len,
                                          bool first_per_node = true,
                                          std::size_t state_budget = 2000000) {
  std::vector<Word> found;
  std::size_t n = g.nodes.size();
  std::vector<std::vector<std::pair<int, BoolMatrix>>> out_edges(n);
  for (const auto& e : g.edges)
    out_edges[e.src].push_back({e.dst, BoolMatrix::from(edge_matrix(g, e))});

  for (std::size_t start = 0; start < n; ++start) {
    struct State {
      int node;
      BoolMatrix pat;
      std::vector<int> word;
    };
    std::vector<State> queue;
    std::set<std::pair<int, std::vector<uint32_t>>> seen;
    queue.push_back({static_cast<int>(start),
                     BoolMatrix::identity(g.nodes[start].representative.num_branches()),
                     {static_cast<int>(start)}});
    bool done = false;
    std::size_t qi = 0;
    while (qi < queue.size() && !done) {
      State cur = queue[qi++];
      if (cur.word.size() > max_len) break;
      if (cur.pat.all_true() && cur.word.size() >= 2) {
        found.push_back({cur.word, true});
        if (first_per_node) done = true;
        continue;
      }
      if (cur.word.size() == max_len) continue;
      for (const auto& [dst, pat] : out_edges[cur.node]) {
        BoolMatrix next = cur.pat * pat;
        auto key = std::make_pair(dst, next.rows);
        if (first_per_node && seen.count(key)) continue;
        if (first_per_node) seen.insert(key);
        if (queue.size() > state_budget)
          throw ResourceError("find_tight_words: state budget exceeded");
        State st;
        st.node = dst;
        st.pat = std::move(next);
        st.word = cur.word;
        st.word.push_back(dst);
        queue.push_back(std::move(st));
      }
    }
  }
  return found;
}

// Greedy pattern-saturating walk from every start node; cheap and usually
// sufficient.  Distinct tight words, in start order, at most max_words.
inline std::vector<Word> greedy_tight_words(const TypeGraph& g, std::size_t max_len,
                                            std::size_t max_words = 16) {
  std::vector<Word> out;
  std::size_t n = g.nodes.size();
  if (n == 0) return out;
  std::vector<std::vector<std::pair<int, BoolMatrix>>> adj(n);
  for (const auto& e : g.edges) adj[e.src].push_back({e.dst, BoolMatrix::from(edge_matrix(g, e))});
  int b = g.nodes[0].representative.num_branches();
  auto bits = [](const BoolMatrix& m) {
    int c = 0;
    for (auto r : m.rows) c += __builtin_popcount(r);
    return c;
  };
  std::set<std::vector<int>> seen;
  for (std::size_t start = 0; start < n && out.size() < max_words; ++start) {
    if (adj[start].empty()) continue;
    BoolMatrix pat = BoolMatrix::identity(b);
    std::vector<int> word{static_cast<int>(start)};
    int cur = static_cast<int>(start);
    while (word.size() < max_len) {
      if (adj[cur].empty()) break;
      int pick = -1, best = -1;
      BoolMatrix best_pat;
      for (const auto& [dst, ep] : adj[cur]) {
        BoolMatrix np = pat * ep;
        int gain = bits(np);
        if (gain > best) {
          best = gain;
          pick = dst;
          best_pat = np;
        }
      }
      pat = best_pat;
      cur = pick;
      word.push_back(pick);
      if (pat.all_true()) {
        if (!seen.count(word)) {
          seen.insert(word);
          out.push_back(Word{word, true});
        }
        break;
      }
    }
  }
  return out;
}

// Existence search: greedy pattern-saturating walks from every node, then a
// bounded breadth-first fallback.  Returns the first tight word found.
inline std::optional<Word> find_tight_word_any(const TypeGraph& g, std::size_t max_len,
                                               std::size_t fallback_states = 300000) {
  std::size_t n = g.nodes.size();
  if (n == 0) return std::nullopt;
  auto greedy = greedy_tight_words(g, max_len, 1);
  if (!greedy.empty()) return greedy.front();
  std::vector<std::vector<std::pair<int, BoolMatrix>>> adj(n);
  for (const auto& e : g.edges) adj[e.src].push_back({e.dst, BoolMatrix::from(edge_matrix(g, e))});
  int b = g.nodes[0].representative.num_branches();
  // breadth-first fallback over (node, pattern) states
  struct State {
    int node;
    BoolMatrix pat;
    std::vector<int> word;
  };
  std::vector<State> queue;
  std::set<std::pair<int, std::vector<uint32_t>>> seen;
  for (std::size_t start = 0; start < n; ++start)
    queue.push_back({static_cast<int>(start), BoolMatrix::identity(b),
                     {static_cast<int>(start)}});
  std::size_t qi = 0;
  while (qi < queue.size()) {
    State cur = queue[qi++];
    if (cur.pat.all_true() && cur.word.size() >= 2) return Word{cur.word, true};
    if (cur.word.size() >= max_len) continue;
    for (const auto& [dst, ep] : adj[cur.node]) {
      BoolMatrix next = cur.pat * ep;
      auto key = std::make_pair(dst, next.rows);
      if (seen.count(key)) continue;
      seen.insert(key);
      if (queue.size() > fallback_states) return std::nullopt;
      State st;
      st.node = dst;
      st.pat = std::move(next);
      st.word = cur.word;
      st.word.push_back(dst);
      queue.push_back(std::move(st));
    }
  }
  return std::nullopt;
}

inline bool word_is_tight(const TypeGraph& g, const Word& w) {
  if (w.nodes.size() < 2) return false;
  BoolMatrix pat = BoolMatrix::identity(g.nodes[w.nodes[0]].representative.num_branches());
  for (std::size_t i = 0; i + 1 < w.nodes.size(); ++i) {
    const TypeGraphEdge* e = g.edge_between(w.nodes[i], w.nodes[i + 1]);
    if (!e) return false;
    pat = pat * BoolMatrix::from(edge_matrix(g, *e));
  }
  return pat.all_true();
}

// --- persistence ------------------------------------------------------------

inline ordered_json graph_to_json(const TypeGraph& g) {
  ordered_json j;
  j["version"] = kVersion;
  j["surface"] = ordered_json{{"g", g.surface.genus}, {"m", g.surface.punctures}};
  j["node_budget"] = g.node_budget;
  j["truncated"] = g.truncated;
  j["dropped_nonrecurrent"] = g.dropped_nonrecurrent;
  j["frontier_edge_count"] = g.frontier_edge_count;
  j["frontier"] = ordered_json::array();
  for (const auto& c : g.frontier) j["frontier"].push_back(code_to_hex(c));
  j["nodes"] = ordered_json::array();
  for (const auto& n : g.nodes)
    j["nodes"].push_back(
        ordered_json{{"code", code_to_hex(n.code)}, {"track", track_to_json(n.representative)}});
  j["edges"] = ordered_json::array();
  for (const auto& e : g.edges)
    j["edges"].push_back(ordered_json{{"src", e.src},
                                      {"dst", e.dst},
                                      {"choices", e.choices},
                                      {"config", e.config},
                                      {"multiplicity", e.multiplicity}});
  return j;
}

inline TypeGraph graph_from_json(const ordered_json& j) {
  TypeGraph g;
  try {
    g.surface = Surface(j.at("surface").at("g").get<int>(), j.at("surface").at("m").get<int>());
    g.node_budget = j.at("node_budget").get<std::size_t>();
    g.truncated = j.at("truncated").get<bool>();
    g.dropped_nonrecurrent = j.at("dropped_nonrecurrent").get<long>();
    g.frontier_edge_count = j.at("frontier_edge_count").get<long>();
    for (const auto& c : j.at("frontier")) g.frontier.push_back(code_from_hex(c.get<std::string>()));
    for (const auto& nj : j.at("nodes"))
      g.nodes.push_back({code_from_hex(nj.at("code").get<std::string>()),
                         track_from_json(nj.at("track"))});
    for (const auto& ej : j.at("edges")) {
      TypeGraphEdge e;
      e.src = ej.at("src").get<int>();
      e.dst = ej.at("dst").get<int>();
      e.choices = ej.at("choices").get<std::string>();
      e.config = ej.at("config").get<std::string>();
      e.multiplicity = ej.at("multiplicity").get<long>();
      g.edges.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedError(std::string("graph json: ") + ex.what());
  }
  return g;
}

inline std::string graph_to_dot(const TypeGraph& g) {
  std::string s = "digraph typegraph {\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    s += "  n" + std::to_string(i) + " [label=\"" + std::to_string(i) + ":" +
         code_to_hex(g.nodes[i].code).substr(0, 8) + "\"];\n";
  for (const auto& e : g.edges)
    s += "  n" + std::to_string(e.src) + " -> n" + std::to_string(e.dst) + " [label=\"" +
         e.choices + "\"];\n";
  s += "}\n";
  return s;
}

}  // namespace trax

#endif
