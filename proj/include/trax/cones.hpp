#ifndef TRAX_CONES_HPP
#define TRAX_CONES_HPP

#include <algorithm>
#include <numeric>
#include <vector>

#include "trax/linalg.hpp"
#include "trax/track.hpp"

namespace trax {

// Transverse and tangential measures are plain weight vectors indexed by
// branch number minus one; exact rationals throughout this module.
using WeightVector = RatVec;
using TangentialVector = RatVec;

// Row per switch: weight(large side) - weight(small side).  Loops through a
// single switch accumulate per half.
inline RatMat switch_matrix(const Track& t) {
  int b = t.num_branches();
  RatMat m(t.num_switches(), RatVec(b, Rat(0)));
  for (int si = 0; si < t.num_switches(); ++si) {
    const Switch& sw = t.switches[si];
    m[si][sw.large().branch - 1] += 1;
    m[si][sw.small_left().branch - 1] -= 1;
    m[si][sw.small_right().branch - 1] -= 1;
  }
  return m;
}

inline bool check_switch_conditions(const Track& t, const WeightVector& mu) {
  if (static_cast<int>(mu.size()) != t.num_branches())
    throw InvalidMeasureError("weight vector size does not match branch count");
  for (const auto& row : switch_matrix(t)) {
    Rat acc(0);
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] != 0) acc += row[j] * mu[j];
    if (acc != 0) return false;
  }
  return true;
}

// Integer variant used in bulk property tests.
inline bool check_switch_conditions_int(const Track& t, const std::vector<Int>& mu) {
  for (int si = 0; si < t.num_switches(); ++si) {
    const Switch& sw = t.switches[si];
    if (mu[sw.large().branch - 1] !=
        mu[sw.small_left().branch - 1] + mu[sw.small_right().branch - 1])
      return false;
  }
  return true;
}

// Exact LP: {switch conditions, mu >= 1} feasible.
inline bool is_recurrent(const Track& t) {
  // substitute mu = 1 + x, x >= 0
  RatMat a = switch_matrix(t);
  RatVec b(a.size(), Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rat s(0);
    for (const auto& c : a[i]) s += c;
    b[i] = -s;
  }
  return lp_feasible(std::move(a), std::move(b));
}

// Per-trigon triangle inequalities on side weights (branch multiplicity along
// each side counts).  The side-weight convention lives here and only here.
inline std::vector<std::array<std::vector<int>, 3>> trigon_side_systems(const Track& t) {
  std::vector<std::array<std::vector<int>, 3>> out;
  for (const auto& r : regions(t)) {
    if (r.cusps != 3) continue;
    auto s = r.sides(t.num_branches());
    out.push_back({s[0], s[1], s[2]});
  }
  return out;
}

inline bool is_transversely_recurrent(const Track& t) {
  int b = t.num_branches();
  auto trigons = trigon_side_systems(t);
  // variables: x (= nu - 1) >= 0 and one slack per inequality
  std::size_t ncons = trigons.size() * 3;
  RatMat a(ncons, RatVec(b + ncons, Rat(0)));
  RatVec rhs(ncons, Rat(0));
  std::size_t row = 0;
  for (const auto& tri : trigons) {
    for (int i = 0; i < 3; ++i) {
      // side_{i+1} + side_{i+2} - side_i >= 0 as g.(1+x) >= 0
      Rat base(0);
      for (int n = 1; n <= b; ++n) {
        int g = tri[(i + 1) % 3][n] + tri[(i + 2) % 3][n] - tri[i][n];
        a[row][n - 1] = g;
        base += g;
      }
      a[row][b + row] = -1;  // slack: g.x - s = -base
      rhs[row] = -base;
      ++row;
    }
  }
  return lp_feasible(std::move(a), std::move(rhs));
}

inline bool is_complete(const Track& t) {
  return is_recurrent(t) && is_transversely_recurrent(t);
}

inline bool check_tangential_conditions(const Track& t, const TangentialVector& nu) {
  if (static_cast<int>(nu.size()) != t.num_branches())
    throw InvalidMeasureError("weight vector size does not match branch count");
  for (const auto& q : nu)
    if (q < 0) return false;
  for (const auto& tri : trigon_side_systems(t)) {
    Rat w[3];
    for (int i = 0; i < 3; ++i) {
      w[i] = 0;
      for (int n = 1; n <= t.num_branches(); ++n)
        if (tri[i][n]) w[i] += Rat(tri[i][n]) * nu[n - 1];
    }
    for (int i = 0; i < 3; ++i)
      if (w[i] > w[(i + 1) % 3] + w[(i + 2) % 3]) return false;
  }
  return true;
}

// --- extreme rays (vertex cycles) -------------------------------------------

namespace detail {

inline std::vector<Int> primitive_int_vector(const RatVec& v) {
  Int lcm(1);
  for (const auto& q : v) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), q.get_den().get_mpz_t());
  std::vector<Int> w(v.size());
  Int gcd(0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = v[i].get_num() * (lcm / v[i].get_den());
    mpz_gcd(gcd.get_mpz_t(), gcd.get_mpz_t(), w[i].get_mpz_t());
  }
  if (gcd > 1)
    for (auto& x : w) x /= gcd;
  return w;
}

struct DDRay {
  RatVec y;                 // coordinates in the kernel basis
  std::vector<Rat> vals;    // constraint values processed so far
  std::vector<bool> tight;  // zero set over processed constraints
};

}  // namespace detail

// Extreme rays of {mu >= 0, switch conditions}, primitive integral, sorted.
// Double description with rows processed in branch order (deterministic).
inline std::vector<std::vector<Int>> vertex_cycles(const Track& t,
                                                   std::size_t ray_budget = 100000) {
  RatMat sm = switch_matrix(t);
  std::vector<RatVec> basis = kernel_basis(sm);
  std::size_t d = basis.size();
  int b = t.num_branches();
  if (d == 0) return {};
  // constraint rows: mu_i(y) = sum_k basis[k][i] * y_k >= 0
  RatMat cons(b, RatVec(d, Rat(0)));
  for (int i = 0; i < b; ++i)
    for (std::size_t k = 0; k < d; ++k) cons[i][k] = basis[k][i];

  // initial simplicial cone from the lexicographically first independent rows
  std::vector<std::size_t> init;
  {
    RatMat acc;
    for (int i = 0; i < b && init.size() < d; ++i) {
      acc.push_back(cons[i]);
      if (rank(acc) == acc.size())
        init.push_back(i);
      else
        acc.pop_back();
    }
    if (init.size() < d) throw Error("vertex_cycles: cone is not pointed");
  }
  RatMat dmat(d, RatVec(d));
  for (std::size_t r = 0; r < d; ++r) dmat[r] = cons[init[r]];
  // rays = columns of D^{-1}
  std::vector<detail::DDRay> rays;
  for (std::size_t j = 0; j < d; ++j) {
    RatVec e(d, Rat(0));
    e[j] = 1;
    auto col = solve(dmat, e);
    if (!col) throw Error("vertex_cycles: singular start");
    detail::DDRay ray;
    ray.y = *col;
    rays.push_back(std::move(ray));
  }
  auto eval = [&](const detail::DDRay& r, int ci) {
    Rat acc(0);
    for (std::size_t k = 0; k < d; ++k)
      if (cons[ci][k] != 0) acc += cons[ci][k] * r.y[k];
    return acc;
  };
  // seed tight sets with the initial constraints
  std::vector<int> processed(init.begin(), init.end());
  for (auto& r : rays) {
    r.vals.reserve(b);
    r.tight.reserve(b);
    for (int ci : processed) {
      Rat v = eval(r, ci);
      r.vals.push_back(v);
      r.tight.push_back(v == 0);
    }
  }
  std::vector<bool> done(b, false);
  for (auto i : init) done[i] = true;

  for (int ci = 0; ci < b; ++ci) {
    if (done[ci]) continue;
    std::vector<detail::DDRay> pos, zero, neg;
    for (auto& r : rays) {
      Rat v = eval(r, ci);
      r.vals.push_back(v);
      r.tight.push_back(v == 0);
      if (v > 0)
        pos.push_back(std::move(r));
      else if (v == 0)
        zero.push_back(std::move(r));
      else
        neg.push_back(std::move(r));
    }
    std::vector<detail::DDRay> next;
    for (auto& r : pos) next.push_back(std::move(r));
    for (auto& r : zero) next.push_back(std::move(r));
    std::size_t np = 0;  // count of positive rays now at front of `next`
    np = next.size() - zero.size();
    // adjacency: p,n are adjacent iff no third ray is tight on tight(p)&tight(n)
    auto adjacent = [&](const detail::DDRay& p, const detail::DDRay& n) {
      std::size_t m = p.tight.size();
      for (const auto& other : next)
        if (&other != &p) {
          bool contains = true;
          for (std::size_t k = 0; k < m - 1 && contains; ++k)
            if (p.tight[k] && n.tight[k] && !other.tight[k]) contains = false;
          if (contains) return false;
        }
      for (const auto& other : neg)
        if (&other != &n) {
          bool contains = true;
          for (std::size_t k = 0; k < m - 1 && contains; ++k)
            if (p.tight[k] && n.tight[k] && !other.tight[k]) contains = false;
          if (contains) return false;
        }
      return true;
    };
    std::vector<detail::DDRay> born;
    for (std::size_t pi = 0; pi < np; ++pi) {
      for (const auto& n : neg) {
        if (!adjacent(next[pi], n)) continue;
        const auto& p = next[pi];
        Rat vp = p.vals.back(), vn = n.vals.back();
        detail::DDRay child;
        child.y.resize(d);
        for (std::size_t k = 0; k < d; ++k) child.y[k] = vp * n.y[k] - vn * p.y[k];
        child.vals.resize(p.vals.size());
        child.tight.resize(p.vals.size());
        for (std::size_t k = 0; k < p.vals.size(); ++k) {
          child.vals[k] = vp * n.vals[k] - vn * p.vals[k];
          child.tight[k] = child.vals[k] == 0;
        }
        born.push_back(std::move(child));
      }
      if (rays.size() + born.size() > ray_budget)
        throw ResourceError("vertex_cycles: ray budget exceeded");
    }
    for (auto& r : born) next.push_back(std::move(r));
    rays = std::move(next);
    done[ci] = true;
  }

  std::vector<std::vector<Int>> out;
  out.reserve(rays.size());
  for (const auto& r : rays) {
    RatVec mu(b);
    bool nonzero = false;
    for (int i = 0; i < b; ++i) {
      Rat acc(0);
      for (std::size_t k = 0; k < d; ++k)
        if (cons[i][k] != 0) acc += cons[i][k] * r.y[k];
      mu[i] = acc;
      if (acc != 0) nonzero = true;
    }
    if (!nonzero) continue;
    out.push_back(detail::primitive_int_vector(mu));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Sum of all vertex cycles positive on every branch: the enumerative
// recurrence criterion, used as an oracle against the LP.
inline bool is_recurrent_by_cycles(const Track& t) {
  auto vc = vertex_cycles(t);
  std::vector<Int> total(t.num_branches(), Int(0));
  for (const auto& c : vc)
    for (std::size_t i = 0; i < c.size(); ++i) total[i] += c[i];
  for (const auto& x : total)
    if (x == 0) return false;
  return true;
}

// Integer rows, one vertex cycle per line.
inline std::string cycles_to_csv(const std::vector<std::vector<Int>>& cycles) {
  std::string s;
  for (const auto& c : cycles) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) s += ",";
      s += c[i].get_str();
    }
    s += "\n";
  }
  return s;
}

inline Rat pairing(const WeightVector& mu, const TangentialVector& nu) {
  if (mu.size() != nu.size()) throw InvalidMeasureError("pairing: size mismatch");
  Rat acc(0);
  for (std::size_t i = 0; i < mu.size(); ++i) acc += mu[i] * nu[i];
  return acc;
}

struct Normalized {
  WeightVector mu;
  Rat scale;
};

// Rescales so the maximal weight over large branches is one.  For positive
// carried measures the global maximum sits on a large branch; asserted.
inline Normalized normalize_large(const Track& t, const WeightVector& mu) {
  if (!check_switch_conditions(t, mu))
    throw InvalidMeasureError("normalize_large: switch conditions fail");
  auto larges = large_branches(t);
  if (larges.empty()) throw Error("normalize_large: track has no large branch");
  Rat max_large(0), max_all(0);
  bool positive = true;
  for (int n = 1; n <= t.num_branches(); ++n) {
    if (mu[n - 1] > max_all) max_all = mu[n - 1];
    if (mu[n - 1] <= 0) positive = false;
  }
  for (int e : larges)
    if (mu[e - 1] > max_large) max_large = mu[e - 1];
  if (max_large == 0) throw InvalidMeasureError("normalize_large: degenerate measure");
  if (positive && max_large != max_all)
    throw Error("normalize_large: maximum not on a large branch for a positive measure");
  Normalized out;
  out.scale = max_large;
  out.mu.resize(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) out.mu[i] = mu[i] / max_large;
  return out;
}

}  // namespace trax

#endif
