#ifndef TRAX_FLOW_HPP
#define TRAX_FLOW_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trax/linalg.hpp"
#include "trax/markov.hpp"
#include "trax/typegraph.hpp"

namespace trax {

// Closed admissible word up to rotation.
struct PeriodicLoop {
  std::vector<int> nodes;  // canonical (lexicographically minimal) rotation
  bool primitive = true;   // not a power of a shorter loop

  std::size_t length() const { return nodes.size(); }
};

inline std::vector<int> canonical_rotation(const std::vector<int>& w) {
  std::vector<int> best = w;
  std::vector<int> cur = w;
  for (std::size_t r = 1; r < w.size(); ++r) {
    std::rotate(cur.begin(), cur.begin() + 1, cur.end());
    if (cur < best) best = cur;
  }
  return best;
}

inline bool is_primitive_word(const std::vector<int>& w) {
  std::size_t n = w.size();
  for (std::size_t d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    bool repeats = true;
    for (std::size_t i = d; i < n && repeats; ++i) repeats = (w[i] == w[i % d]);
    if (repeats) return false;
  }
  return true;
}

struct LoopEnumeration {
  std::vector<PeriodicLoop> loops;  // sorted by (length, nodes)
  bool complete = true;             // false when the walk budget was exhausted
  long primitive_count = 0;
  long imprimitive_count = 0;
};

// All closed walks of length <= max_len up to rotation.
inline LoopEnumeration enumerate_loops(const TypeGraph& g, std::size_t max_len,
                                       std::size_t walk_budget = 5000000) {
  LoopEnumeration out;
  std::size_t n = g.nodes.size();
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : g.edges) adj[e.src].push_back(e.dst);
  std::set<std::vector<int>> seen;
  std::size_t walks = 0;
  for (std::size_t start = 0; start < n; ++start) {
    // DFS over walks from `start`, recording returns
    std::vector<std::pair<std::vector<int>, int>> stack;
    stack.push_back({{static_cast<int>(start)}, static_cast<int>(start)});
    while (!stack.empty()) {
      auto [word, cur] = std::move(stack.back());
      stack.pop_back();
      if (++walks > walk_budget) {
        out.complete = false;
        break;
      }
      for (int dst : adj[cur]) {
        if (dst == static_cast<int>(start) && word.size() >= 1) {
          std::vector<int> rot = canonical_rotation(word);
          if (!seen.count(rot)) {
            seen.insert(rot);
            PeriodicLoop lp;
            lp.nodes = rot;
            lp.primitive = is_primitive_word(rot);
            out.loops.push_back(std::move(lp));
          }
        }
        if (word.size() < max_len) {
          std::vector<int> next = word;
          next.push_back(dst);
          stack.push_back({std::move(next), dst});
        }
      }
    }
    if (!out.complete) break;
  }
  std::sort(out.loops.begin(), out.loops.end(), [](const PeriodicLoop& a, const PeriodicLoop& b) {
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
    return a.nodes < b.nodes;
  });
  for (const auto& l : out.loops)
    (l.primitive ? out.primitive_count : out.imprimitive_count) += 1;
  return out;
}

// Closes an admissible word into a periodic loop through a shortest return
// path, when one exists.  A loop closing a tight word has a positive matrix
// power, so this is the standard way to manufacture tight loops.
inline std::optional<PeriodicLoop> close_word_into_loop(const TypeGraph& g,
                                                        const std::vector<int>& word) {
  if (word.empty()) return std::nullopt;
  std::size_t n = g.nodes.size();
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : g.edges) adj[e.src].push_back(e.dst);
  std::vector<int> prev(n, -2);
  std::vector<int> queue{word.back()};
  prev[word.back()] = -1;
  std::size_t qi = 0;
  while (qi < queue.size() && prev[word.front()] == -2) {
    int u = queue[qi++];
    for (int v : adj[u])
      if (prev[v] == -2) {
        prev[v] = u;
        queue.push_back(v);
      }
  }
  if (prev[word.front()] == -2) return std::nullopt;
  std::vector<int> path;  // word.front() back to word.back(), reversed below
  for (int x = word.front(); x != -1; x = prev[x]) path.push_back(x);
  std::reverse(path.begin(), path.end());  // word.back() ... word.front()
  std::vector<int> cyc(word.begin(), word.end());
  cyc.insert(cyc.end(), path.begin() + 1, path.end());
  cyc.pop_back();  // the closing symbol equals word.front()
  PeriodicLoop loop;
  loop.nodes = canonical_rotation(cyc);
  loop.primitive = is_primitive_word(loop.nodes);
  return loop;
}

// Ordered product of the edge carrying matrices around the loop.
inline IntMatrix loop_matrix(const TypeGraph& g, const PeriodicLoop& loop) {
  int b = g.nodes.empty() ? 0 : g.nodes[0].representative.num_branches();
  IntMatrix m = IntMatrix::identity(b);
  const auto& w = loop.nodes;
  for (std::size_t i = 0; i < w.size(); ++i) {
    int src = w[i], dst = w[(i + 1) % w.size()];
    const TypeGraphEdge* e = g.edge_between(src, dst);
    if (!e) throw Error("loop_matrix: loop uses a missing edge");
    m = m * edge_matrix(g, *e);
  }
  return m;
}

struct DilatationResult {
  double lambda = 1.0;
  double period = 0.0;   // log lambda
  double radius = 0.0;   // rigorous enclosure half-width from the CW bounds
  bool primitive = true;
  std::vector<double> block_lambdas;  // per strongly connected block when not
};

namespace detail {

// Collatz-Wielandt enclosure of the Perron root of an irreducible
// nonnegative integer matrix: for positive v, min_i (Mv)_i / v_i <= lambda
// <= max_i (Mv)_i / v_i, with both bounds exact rationals.
inline std::pair<Rat, Rat> cw_enclosure(const IntMatrix& m, int iterations, double rel_gap) {
  std::size_t n = m.n;
  std::vector<Int> v(n, Int(1));
  Rat lo(0), hi(0);
  for (int it = 0; it < iterations; ++it) {
    std::vector<Int> w = m.apply(v);
    bool positive = true;
    for (const auto& x : w) positive = positive && x > 0;
    if (!positive) throw Error("cw_enclosure: iterate left the positive cone");
    lo = Rat(w[0]) / Rat(v[0]);
    hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      Rat r = Rat(w[i]) / Rat(v[i]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (rat_to_double(hi - lo) <= rel_gap * rat_to_double(lo)) return {lo, hi};
    Int g(0);
    for (const auto& x : w) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g > 1)
      for (auto& x : w) x /= g;
    v = std::move(w);
  }
  return {lo, hi};
}

inline BoolMatrix reach_closure(const BoolMatrix& p) {
  BoolMatrix closure = p;
  for (std::size_t i = 0; i < p.n; ++i) closure.rows[i] |= uint32_t{1} << i;
  for (std::size_t k = 0; k < p.n; ++k) closure = closure * closure;
  return closure;
}

inline std::vector<int> pattern_components(const BoolMatrix& p) {
  // strongly connected components by reachability closure; n is small
  std::size_t n = p.n;
  std::vector<int> comp(n, -1);
  int nc = 0;
  BoolMatrix closure = reach_closure(p);
  for (std::size_t i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    comp[i] = nc;
    for (std::size_t j = i + 1; j < n; ++j)
      if (comp[j] < 0 && ((closure.rows[i] >> j) & 1) && ((closure.rows[j] >> i) & 1))
        comp[j] = nc;
    ++nc;
  }
  return comp;
}

}  // namespace detail

// Perron eigenvalue of a loop matrix with a rigorous enclosure.  Primitive
// matrices go straight to Collatz-Wielandt; irreducible periodic ones use
// M + I (same eigenvector, spectrum shifted by one); reducible ones are
// flagged and analyzed per strongly connected block.
inline DilatationResult dilatation(const IntMatrix& m, double rel_gap = 1e-12,
                                   int iterations = 4000) {
  DilatationResult out;
  BoolMatrix pat = BoolMatrix::from(m);
  if (is_primitive_pattern(pat)) {
    auto [lo, hi] = detail::cw_enclosure(m, iterations, rel_gap);
    out.lambda = (rat_to_double(lo) + rat_to_double(hi)) / 2;
    out.radius = (rat_to_double(hi) - rat_to_double(lo)) / 2;
    out.period = std::log(out.lambda);
    out.primitive = true;
    return out;
  }
  out.primitive = false;
  BoolMatrix closure = detail::reach_closure(pat);
  bool irreducible = closure.all_true();
  auto shifted_lambda = [&](const IntMatrix& block) {
    IntMatrix s = block;
    for (std::size_t i = 0; i < s.n; ++i) s.at(i, i) += 1;
    auto [lo, hi] = detail::cw_enclosure(s, iterations, rel_gap);
    return std::pair<double, double>((rat_to_double(lo) + rat_to_double(hi)) / 2 - 1.0,
                                     (rat_to_double(hi) - rat_to_double(lo)) / 2);
  };
  if (irreducible) {
    auto [lam, rad] = shifted_lambda(m);
    out.lambda = lam;
    out.radius = rad;
    out.period = std::log(out.lambda);
    return out;
  }
  auto comp = detail::pattern_components(pat);
  int nc = 1 + *std::max_element(comp.begin(), comp.end());
  double best = 0, best_rad = 0;
  for (int c = 0; c < nc; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pat.n; ++i)
      if (comp[i] == c) idx.push_back(i);
    IntMatrix block(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) block.at(i, j) = m.at(idx[i], idx[j]);
    auto [lam, rad] = shifted_lambda(block);
    out.block_lambdas.push_back(lam);
    if (lam > best) {
      best = lam;
      best_rad = rad;
    }
  }
  out.lambda = best;
  out.radius = best_rad;
  out.period = std::log(std::max(out.lambda, 1e-300));
  return out;
}

// --- roof function -----------------------------------------------------------

struct RoofValue {
  double value = 0;
  double radius = 0;       // candidate spread, intersected over depths
  int depth_used = 0;
  int degenerate_candidates = 0;
};

// Renormalization estimate of the roof along an admissible forward word:
// push the deep track's vertex-cycle hull forward through the carrying
// product and compare maximal large-branch weights on the first two tracks.
// depth counts edges consumed; word must provide depth+1 nodes.
inline RoofValue roof_estimate(const TypeGraph& g, const std::vector<int>& word, int depth) {
  if (depth < 2) throw Error("roof_estimate: depth must be at least 2");
  if (word.size() < static_cast<std::size_t>(depth) + 1)
    throw Error("roof_estimate: word shorter than depth");
  for (std::size_t i = 0; i + 1 <= static_cast<std::size_t>(depth); ++i)
    if (!g.edge_between(word[i], word[i + 1]))
      throw Error("roof_estimate: word is not admissible in the graph");
  int b = g.nodes[word[0]].representative.num_branches();
  auto larges0 = large_branches(g.nodes[word[0]].representative);
  auto larges1 = large_branches(g.nodes[word[1]].representative);
  IntMatrix c01 = edge_matrix(g, *g.edge_between(word[0], word[1]));

  RoofValue out;
  out.depth_used = depth;
  bool have_interval = false;
  double ilo = 0, ihi = 0;
  IntMatrix tail = IntMatrix::identity(b);  // product C(x1..x_dd)
  for (int dd = 2; dd <= depth; ++dd) {
    tail = tail * edge_matrix(g, *g.edge_between(word[dd - 1], word[dd]));
    auto cycles = vertex_cycles(g.nodes[word[dd]].representative);
    bool have = false;
    double lo = 0, hi = 0;
    for (const auto& cyc : cycles) {
      std::vector<Int> w = tail.apply(cyc);   // weights on track 1
      std::vector<Int> v = c01.apply(w);      // weights on track 0
      Int max0(0), max1(0);
      for (int e : larges0) max0 = std::max(max0, v[e - 1]);
      for (int e : larges1) max1 = std::max(max1, w[e - 1]);
      if (max0 == 0 || max1 == 0) {
        out.degenerate_candidates += 1;
        continue;
      }
      double r = log_rat(Rat(max0) / Rat(max1));
      if (!have) {
        lo = hi = r;
        have = true;
      } else {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    if (!have) continue;
    if (!have_interval) {
      ilo = lo;
      ihi = hi;
      have_interval = true;
    } else {
      // deeper candidate hulls refine the estimate; keep the intersection
      double nlo = std::max(ilo, lo), nhi = std::min(ihi, hi);
      if (nlo <= nhi) {
        ilo = nlo;
        ihi = nhi;
      } else {
        ilo = lo;
        ihi = hi;
      }
    }
  }
  if (!have_interval) throw Error("roof_estimate: all candidates degenerate; increase depth");
  out.value = (ilo + ihi) / 2;
  out.radius = (ihi - ilo) / 2;
  return out;
}

// Roof values around one period of a loop, evaluated on the loop repeated
// enough times to give every position the same evaluation depth.
inline std::vector<RoofValue> roof_around_loop(const TypeGraph& g, const PeriodicLoop& loop,
                                               int depth) {
  std::size_t L = loop.nodes.size();
  std::vector<int> rep;
  std::size_t copies = (static_cast<std::size_t>(depth) + 2 * L) / L + 2;
  for (std::size_t c = 0; c < copies; ++c)
    for (int x : loop.nodes) rep.push_back(x);
  std::vector<RoofValue> out;
  for (std::size_t j = 0; j < L; ++j) {
    std::vector<int> word(rep.begin() + j, rep.end());
    out.push_back(roof_estimate(g, word, depth));
  }
  return out;
}

// --- counting ---------------------------------------------------------------

struct CountReportRow {
  double r = 0;
  long count = 0;
  double estimate = 0;  // (1/r) log n(r)
};

struct CountReport {
  std::vector<CountReportRow> rows;
  double target = 0;       // 6g-6+2m
  double upper_bound = 0;  // (6g-6+2m)(6g-5+2m)
};

inline CountReport count_report(const std::vector<double>& periods, const Surface& surf,
                                const std::vector<double>& r_grid) {
  CountReport rep;
  rep.target = surf.dim();
  rep.upper_bound = static_cast<double>(surf.dim()) * (surf.dim() + 1);
  for (double r : r_grid) {
    CountReportRow row;
    row.r = r;
    for (double p : periods)
      if (p <= r) row.count += 1;
    row.estimate = (row.count > 0 && r > 0) ? std::log(static_cast<double>(row.count)) / r : 0;
    rep.rows.push_back(row);
  }
  return rep;
}

// --- suspension entropy -------------------------------------------------------

struct FlowEntropy {
  double value = 0;
  double error = 0;
  double shift_entropy = 0;
  double expected_roof = 0;
  double roof_error = 0;
};

// Suspension entropy as shift entropy divided by the measure-average roof,
// with the roof supplied per word; the graph overload evaluates roofs by
// cone renormalization at the given depth.
inline FlowEntropy flow_entropy(const MarkovMeasure& m,
                                const std::function<RoofValue(const std::vector<int>&)>& roof,
                                int word_len, std::size_t word_budget = 200000) {
  if (word_len < 1) throw Error("flow_entropy: word length must be positive");
  std::size_t n = m.P.size();
  double expected = 0, err = 0;
  std::size_t count = 0;
  // enumerate admissible words of word_len symbols
  std::vector<std::vector<int>> stack;
  for (std::size_t s = 0; s < n; ++s) stack.push_back({static_cast<int>(s)});
  while (!stack.empty()) {
    std::vector<int> w = std::move(stack.back());
    stack.pop_back();
    if (w.size() == static_cast<std::size_t>(word_len)) {
      auto cm = cylinder_mass(m, w);
      if (cm.mass == 0) continue;
      RoofValue rv = roof(w);
      expected += rat_to_double(cm.mass) * rv.value;
      err += rat_to_double(cm.mass) * rv.radius;
      continue;
    }
    if (++count > word_budget) throw ResourceError("flow_entropy: word budget exceeded");
    int last = w.back();
    for (std::size_t j = 0; j < n; ++j) {
      if (m.P.p[last][j] == 0) continue;
      std::vector<int> next = w;
      next.push_back(static_cast<int>(j));
      stack.push_back(std::move(next));
    }
  }
  FlowEntropy out;
  out.shift_entropy = shift_entropy(m);
  out.expected_roof = expected;
  out.roof_error = err;
  if (expected <= 0) throw Error("flow_entropy: expected roof is not positive; increase depth");
  out.value = out.shift_entropy / expected;
  out.error = out.shift_entropy * err / (expected * expected);
  return out;
}

inline FlowEntropy flow_entropy(const MarkovMeasure& m, const TypeGraph& g, int roof_depth) {
  // words carry roof_depth edges; measure words have roof_depth+1 symbols
  return flow_entropy(
      m,
      [&](const std::vector<int>& w) {
        // extend the word forward along lexicographically least edges so the
        // roof sees the full depth
        std::vector<int> ext = w;
        while (ext.size() < static_cast<std::size_t>(roof_depth) + 1) {
          bool found = false;
          for (std::size_t j = 0; j < g.nodes.size() && !found; ++j)
            if (g.edge_between(ext.back(), static_cast<int>(j))) {
              ext.push_back(static_cast<int>(j));
              found = true;
            }
          if (!found) throw Error("flow_entropy: dead end while extending word");
        }
        return roof_estimate(g, ext, roof_depth);
      },
      roof_depth + 1);
}

}  // namespace trax

#endif
