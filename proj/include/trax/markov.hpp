#ifndef TRAX_MARKOV_HPP
#define TRAX_MARKOV_HPP

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "trax/linalg.hpp"
#include "trax/moves.hpp"
#include "trax/typegraph.hpp"

namespace trax {

// Row-stochastic matrix over the subshift alphabet, support pinned to the
// transition matrix: P[i][j] > 0 iff a_ij = 1.  Entries are exact rationals
// (decimal strings parse exactly), so cylinder calculus is exact.
struct StochasticMatrix {
  std::vector<RatVec> p;

  std::size_t size() const { return p.size(); }

  void check_stochastic() const {
    Rat tol = rat(1, 1000000000000L);
    for (const auto& row : p) {
      Rat sum(0);
      for (const auto& x : row) {
        if (x < 0) throw InvalidMeasureError("stochastic matrix: negative entry");
        sum += x;
      }
      Rat err = sum - 1;
      if (err < 0) err = -err;
      if (err > tol) throw InvalidMeasureError("stochastic matrix: row sum != 1");
    }
  }

  // empty mismatch list means the support equals the adjacency exactly
  std::vector<std::pair<int, int>> support_mismatches(
      const std::vector<std::vector<bool>>& a) const {
    std::vector<std::pair<int, int>> bad;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j)
        if ((p[i][j] > 0) != a[i][j]) bad.push_back({static_cast<int>(i), static_cast<int>(j)});
    return bad;
  }
};

inline StochasticMatrix uniform_stochastic(const std::vector<std::vector<bool>>& a) {
  StochasticMatrix m;
  std::size_t n = a.size();
  m.p.assign(n, RatVec(n, Rat(0)));
  for (std::size_t i = 0; i < n; ++i) {
    long deg = 0;
    for (std::size_t j = 0; j < n; ++j) deg += a[i][j] ? 1 : 0;
    if (deg == 0) throw InvalidMeasureError("uniform_stochastic: node without outgoing edge");
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j]) m.p[i][j] = rat(1, deg);
  }
  return m;
}

namespace detail {

inline bool support_irreducible(const StochasticMatrix& p) {
  std::size_t n = p.size();
  auto reach = [&](bool forward) {
    std::vector<bool> vis(n, false);
    std::vector<std::size_t> stack{0};
    vis[0] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        bool has = forward ? p.p[u][v] > 0 : p.p[v][u] > 0;
        if (has && !vis[v]) {
          vis[v] = true;
          stack.push_back(v);
        }
      }
    }
    return vis;
  };
  auto f = reach(true), b = reach(false);
  for (std::size_t i = 0; i < n; ++i)
    if (!f[i] || !b[i]) return false;
  return true;
}

}  // namespace detail

// Stationary row vector: p = pP, sum p = 1, exact rational solve, verified
// by double-precision power iteration to 1e-12.
inline RatVec stationary(const StochasticMatrix& pm) {
  pm.check_stochastic();
  std::size_t n = pm.size();
  if (n == 0) throw InvalidMeasureError("stationary: empty matrix");
  if (!detail::support_irreducible(pm))
    throw InvalidMeasureError("stationary: support is reducible; restrict to a component first");
  // (P^t - I) p = 0 with normalization row sum(p) = 1
  RatMat sys(n + 1, RatVec(n, Rat(0)));
  RatVec rhs(n + 1, Rat(0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      sys[j][i] = pm.p[i][j] - (i == j ? Rat(1) : Rat(0));
    }
  for (std::size_t i = 0; i < n; ++i) sys[n][i] = 1;
  rhs[n] = 1;
  auto sol = solve(std::move(sys), std::move(rhs));
  if (!sol) throw Error("stationary: linear system inconsistent");
  RatVec p = *sol;
  for (const auto& x : p)
    if (x <= 0) throw Error("stationary: vector not positive on irreducible support");
  // cross-check with power iteration on the lazy chain (P+I)/2, which has
  // the same stationary vector and converges for periodic supports too
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] += 0.5 * v[i];
      for (std::size_t j = 0; j < n; ++j)
        if (pm.p[i][j] > 0) w[j] += 0.5 * v[i] * rat_to_double(pm.p[i][j]);
    }
    double delta = 0;
    for (std::size_t j = 0; j < n; ++j) {
      delta += std::abs(w[j] - v[j]);
      v[j] = w[j];
    }
    if (delta < 1e-15) break;
  }
  double err = 0;
  for (std::size_t j = 0; j < n; ++j) err += std::abs(v[j] - rat_to_double(p[j]));
  if (err > 1e-10) throw Error("stationary: power iteration disagrees with exact solve");
  return p;
}

struct MarkovMeasure {
  StochasticMatrix P;
  RatVec pi;  // stationary, positive

  static MarkovMeasure from_matrix(StochasticMatrix P) {
    MarkovMeasure m;
    m.pi = stationary(P);
    m.P = std::move(P);
    return m;
  }
};

// nu-mass of the cylinder {x_0 = w_0, ..., x_k = w_k}.
struct CylinderMass {
  Rat mass;
  bool admissible = true;
};

inline CylinderMass cylinder_mass(const MarkovMeasure& m, const std::vector<int>& word) {
  if (word.empty()) return {Rat(1), true};
  std::size_t n = m.P.size();
  for (int x : word)
    if (x < 0 || static_cast<std::size_t>(x) >= n)
      throw InvalidMeasureError("cylinder_mass: symbol out of range");
  Rat mass = m.pi[word[0]];
  for (std::size_t t = 0; t + 1 < word.size(); ++t) {
    if (m.P.p[word[t]][word[t + 1]] == 0) return {Rat(0), false};
    mass *= m.P.p[word[t]][word[t + 1]];
  }
  return {mass, true};
}

// -sum_i pi_i sum_j P_ij log P_ij
inline double shift_entropy(const MarkovMeasure& m) {
  double h = 0;
  for (std::size_t i = 0; i < m.P.size(); ++i)
    for (std::size_t j = 0; j < m.P.size(); ++j)
      if (m.P.p[i][j] > 0) {
        double pij = rat_to_double(m.P.p[i][j]);
        h -= rat_to_double(m.pi[i]) * pij * std::log(pij);
      }
  return h;
}

// --- word avoidance ---------------------------------------------------------

struct AvoidanceReport {
  Rat probability;      // exact probability of no occurrence in x_0..x_{m-1}
  double rate = 1.0;    // dominant eigenvalue estimate of the alive operator
  bool rate_below_one = false;  // certified via an exact norm power
  double fitted_c = 0;  // least C with probability <= C * rate^m over the run
};

namespace detail {

// KMP failure automaton states 0..K-1 (matched prefix length); K is dead.
inline std::vector<int> kmp_failure(const std::vector<int>& w) {
  std::vector<int> fail(w.size(), 0);
  for (std::size_t i = 1; i < w.size(); ++i) {
    int k = fail[i - 1];
    while (k > 0 && w[i] != w[k]) k = fail[k - 1];
    if (w[i] == w[k]) ++k;
    fail[i] = k;
  }
  return fail;
}

inline int kmp_step(const std::vector<int>& w, const std::vector<int>& fail, int state, int sym) {
  while (state > 0 && sym != w[state]) state = fail[state - 1];
  if (sym == w[state]) ++state;
  return state;
}

}  // namespace detail

// Exact probability that a stationary trajectory of length m contains no
// occurrence of `word`, via the transfer operator of the word-avoiding
// automaton.  The decay rate is certified below one by finding an exact
// power of the alive operator with infinity norm < 1.
inline AvoidanceReport avoidance_probability(const MarkovMeasure& m, const std::vector<int>& word,
                                             std::size_t horizon) {
  if (word.empty()) throw InvalidMeasureError("avoidance_probability: empty word");
  if (horizon < word.size())
    throw InvalidMeasureError("avoidance_probability: horizon shorter than the word");
  std::size_t n = m.P.size();
  int K = static_cast<int>(word.size());
  // inadmissible words never occur
  bool admissible = true;
  for (std::size_t t = 0; t + 1 < word.size(); ++t)
    if (m.P.p[word[t]][word[t + 1]] == 0) admissible = false;
  if (!admissible) {
    AvoidanceReport rep;
    rep.probability = 1;
    rep.rate = 1.0;
    rep.rate_below_one = false;
    rep.fitted_c = 1.0;
    return rep;
  }
  auto fail = detail::kmp_failure(word);
  // alive states: (chain symbol i, matched prefix q in 0..K-1)
  auto sid = [&](std::size_t i, int q) { return static_cast<std::size_t>(q) * n + i; };
  std::size_t ns = n * static_cast<std::size_t>(K);
  // initial distribution after reading x_0
  std::vector<Rat> dist(ns, Rat(0));
  std::vector<Rat> per_m;  // probability at each horizon (for the C fit)
  for (std::size_t i = 0; i < n; ++i) {
    int q = detail::kmp_step(word, fail, 0, static_cast<int>(i));
    if (q == K) continue;  // single-symbol word occurrence
    dist[sid(i, q)] += m.pi[i];
  }
  auto total = [&]() {
    Rat s(0);
    for (const auto& x : dist) s += x;
    return s;
  };
  per_m.push_back(total());  // horizon 1
  for (std::size_t step = 2; step <= horizon; ++step) {
    std::vector<Rat> next(ns, Rat(0));
    for (std::size_t q = 0; q < static_cast<std::size_t>(K); ++q)
      for (std::size_t i = 0; i < n; ++i) {
        const Rat& cur = dist[sid(i, static_cast<int>(q))];
        if (cur == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (m.P.p[i][j] == 0) continue;
          int q2 = detail::kmp_step(word, fail, static_cast<int>(q), static_cast<int>(j));
          if (q2 == K) continue;  // occurrence: trajectory dies
          next[sid(j, q2)] += cur * m.P.p[i][j];
        }
      }
    dist = std::move(next);
    per_m.push_back(total());
  }
  AvoidanceReport rep;
  rep.probability = per_m.back();

  // dominant eigenvalue of the alive operator (double power iteration)
  std::vector<double> v(ns, 1.0);
  double lambda = 1.0;
  for (int it = 0; it < 3000; ++it) {
    std::vector<double> w(ns, 0.0);
    for (std::size_t q = 0; q < static_cast<std::size_t>(K); ++q)
      for (std::size_t i = 0; i < n; ++i) {
        double cur = v[sid(i, static_cast<int>(q))];
        if (cur == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (m.P.p[i][j] == 0) continue;
          int q2 = detail::kmp_step(word, fail, static_cast<int>(q), static_cast<int>(j));
          if (q2 == K) continue;
          w[sid(j, q2)] += cur * rat_to_double(m.P.p[i][j]);
        }
      }
    double norm = 0;
    for (double x : w) norm = std::max(norm, std::abs(x));
    if (norm == 0) {
      lambda = 0;
      break;
    }
    for (auto& x : w) x /= norm;
    lambda = norm;
    v = std::move(w);
  }
  rep.rate = lambda;
  // rigorous certificate: upward-rounded row-sum powers.  Every float op is
  // bumped one ulp up, so ubar_k >= (M^k 1) entrywise; max(ubar_k) < 1 for
  // some k proves the spectral radius is below one.
  {
    auto up = [](double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); };
    std::vector<double> ubar(ns, 1.0);
    std::vector<double> pij(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (m.P.p[i][j] > 0) pij[i * n + j] = up(rat_to_double(m.P.p[i][j]));
    for (int k = 1; k <= 4000 && !rep.rate_below_one; ++k) {
      std::vector<double> next(ns, 0.0);
      for (std::size_t q = 0; q < static_cast<std::size_t>(K); ++q)
        for (std::size_t i = 0; i < n; ++i) {
          double cur = ubar[sid(i, static_cast<int>(q))];
          if (cur == 0) continue;
          for (std::size_t j = 0; j < n; ++j) {
            double p = pij[i * n + j];
            if (p == 0) continue;
            int q2 = detail::kmp_step(word, fail, static_cast<int>(q), static_cast<int>(j));
            if (q2 == K) continue;
            double add = up(cur * p);
            double& dst = next[sid(j, q2)];
            dst = up(dst + add);
          }
        }
      ubar = std::move(next);
      double mx = 0;
      for (double x : ubar) mx = std::max(mx, x);
      if (mx < 1.0) {
        rep.rate_below_one = true;
        // mx^(1/k) is a rigorous upper bound on the decay rate; prefer it
        // when the power iteration has not settled below one
        double bound = std::pow(mx, 1.0 / k);
        if (rep.rate > bound) rep.rate = bound;
      }
      if (mx > 1e200) break;  // diverging transient; give up on the certificate
    }
  }
  // fit C: least constant with per_m[k] <= C * rate^{k+1}
  double c = 0;
  for (std::size_t k = 0; k < per_m.size(); ++k) {
    double denom = std::pow(rep.rate, static_cast<double>(k + 1));
    if (denom > 0) c = std::max(c, rat_to_double(per_m[k]) / denom);
  }
  rep.fitted_c = c;
  return rep;
}

// --- Monte-Carlo estimate of the Lebesgue transition row ---------------------

struct TransitionEstimate {
  std::string choices;     // direction vector of the representative's split
  std::string target_hex;  // class code of the split result
  bool materialized = false;
  bool dropped_nonrecurrent = false;
  long count = 0;
  double frequency = 0;
  double std_error = 0;
};

// Samples carried measures uniformly from the switch-condition simplex of the
// node's representative (exact-rational rejection sampling in an affine chart
// of the vertex-cycle hull) and buckets them by the full split selected by
// compatible_direction at every large branch.  This approximates the
// Lebesgue-class transition probabilities; it is an approximation, not an
// exact computation.
inline std::vector<TransitionEstimate> lebesgue_transitions_mc(const TypeGraph& g, int node,
                                                               std::size_t samples,
                                                               unsigned long rng_seed,
                                                               unsigned threads = 1) {
  if (node < 0 || static_cast<std::size_t>(node) >= g.nodes.size())
    throw Error("lebesgue_transitions_mc: no such node");
  const Track& rep = g.nodes[node].representative;
  int b = rep.num_branches();
  auto cycles = vertex_cycles(rep);
  if (cycles.empty()) throw Error("lebesgue_transitions_mc: empty cone");
  auto larges = large_branches(rep);
  if (larges.empty()) throw Error("lebesgue_transitions_mc: node admits no full split");
  Locator loc = build_locator(rep);

  // normalized vertices of the simplex {mu in V(tau), sum mu = 1}
  std::vector<RatVec> verts;
  for (const auto& c : cycles) {
    Rat sum(0);
    for (const auto& x : c) sum += Rat(x);
    RatVec v(b);
    for (int i = 0; i < b; ++i) v[i] = Rat(c[i]) / sum;
    verts.push_back(std::move(v));
  }
  // affine chart: x = v0 + F z over the simplex's affine hull
  RatVec v0 = verts[0];
  std::vector<RatVec> dirs;
  {
    RatMat diffs;
    for (std::size_t k = 1; k < verts.size(); ++k) {
      RatVec d(b);
      for (int i = 0; i < b; ++i) d[i] = verts[k][i] - v0[i];
      diffs.push_back(d);
    }
    RatMat reduced = diffs;
    auto pivots = rref(reduced);
    for (std::size_t r = 0; r < pivots.size(); ++r) dirs.push_back(reduced[r]);
  }
  std::size_t d = dirs.size();
  // z-coordinates of each vertex (exact solve against the chart), for a box
  RatMat chart(b, RatVec(d, Rat(0)));
  for (int i = 0; i < b; ++i)
    for (std::size_t k = 0; k < d; ++k) chart[i][k] = dirs[k][i];
  RatVec lo(d, Rat(0)), hi(d, Rat(0));
  for (const auto& v : verts) {
    RatVec rhs(b);
    for (int i = 0; i < b; ++i) rhs[i] = v[i] - v0[i];
    auto z = solve(chart, rhs);
    if (!z) throw Error("lebesgue_transitions_mc: chart solve failed");
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], (*z)[k]);
      hi[k] = std::max(hi[k], (*z)[k]);
    }
  }

  std::map<std::string, long> counts;
  long const denom = 1L << 30;
  // chunked sampling with per-chunk rng streams; merge is order-independent
  unsigned nchunks = std::max(1u, threads) * 4;
  std::size_t per_chunk = (samples + nchunks - 1) / nchunks;
  std::size_t produced = 0;
  for (unsigned chunk = 0; chunk < nchunks && produced < samples; ++chunk) {
    std::mt19937_64 rng(rng_seed + 0x9e3779b97f4a7c15ull * (chunk + 1));
    std::size_t want = std::min(per_chunk, samples - produced);
    std::size_t got = 0;
    while (got < want) {
      RatVec mu = v0;
      for (std::size_t k = 0; k < d; ++k) {
        Rat zk = lo[k] + (hi[k] - lo[k]) * rat(static_cast<long>(rng() >> 34), denom);
        for (int i = 0; i < b; ++i)
          if (dirs[k][i] != 0) mu[i] += zk * dirs[k][i];
      }
      bool inside = true;
      for (int i = 0; i < b && inside; ++i) inside = mu[i] >= 0;
      if (!inside) continue;
      ++got;
      std::string label(larges.size(), 'R');
      for (std::size_t li = 0; li < larges.size(); ++li) {
        const HalfLoc& lu = loc.of(larges[li], 0);
        const HalfLoc& lw = loc.of(larges[li], 1);
        Rat diag = mu[larges[li] - 1] - mu[rep.switches[lu.sw][Slot::SmallLeft].branch - 1] -
                   mu[rep.switches[lw.sw][Slot::SmallLeft].branch - 1];
        label[li] = diag >= 0 ? 'R' : 'L';
      }
      counts[label] += 1;
    }
    produced += got;
  }

  std::vector<TransitionEstimate> out;
  for (unsigned long mask = 0; mask < (1ul << larges.size()); ++mask) {
    std::string label(larges.size(), 'R');
    std::map<int, SplitDirection> ch;
    for (std::size_t i = 0; i < larges.size(); ++i) {
      bool left = (mask >> i) & 1;
      label[i] = left ? 'L' : 'R';
      ch[larges[i]] = left ? SplitDirection::Left : SplitDirection::Right;
    }
    TransitionEstimate est;
    est.choices = label;
    est.count = counts.count(label) ? counts[label] : 0;
    FullSplitResult fs = full_split(rep, ch);
    if (!is_recurrent(fs.track)) {
      est.dropped_nonrecurrent = true;
    } else {
      std::string code = shift_class_code(fs.track);
      est.target_hex = code_to_hex(code);
      est.materialized = g.index_of(code) >= 0;
    }
    double f = static_cast<double>(est.count) / static_cast<double>(samples);
    est.frequency = f;
    est.std_error = std::sqrt(f * (1.0 - f) / static_cast<double>(samples));
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace trax

#endif
