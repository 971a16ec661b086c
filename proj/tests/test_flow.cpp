#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "trax/flow.hpp"
#include "trax/seeds.hpp"

using namespace trax;
using Catch::Approx;

namespace {

IntMatrix fib() {
  IntMatrix m(2);
  m.at(0, 0) = 1;
  m.at(0, 1) = 1;
  m.at(1, 0) = 1;
  m.at(1, 1) = 0;
  return m;
}

// synthetic graph for loop enumeration oracles: nodes carry empty tracks,
// only the edge structure matters
TypeGraph synthetic_graph(const std::vector<std::vector<bool>>& a) {
  TypeGraph g;
  g.nodes.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[i][j]) g.edges.push_back({static_cast<int>(i), static_cast<int>(j), "", "", 1});
  return g;
}

long necklace_count(const std::vector<std::vector<bool>>& a, int len) {
  // number of closed walks of length `len` up to rotation:
  // (1/len) * sum_{d | len} phi(len/d) trace(A^d)
  std::size_t n = a.size();
  auto trace_pow = [&](int p) {
    std::vector<std::vector<long>> m(n, std::vector<long>(n, 0)), acc;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
    acc = m;
    for (int k = 1; k < p; ++k) {
      std::vector<std::vector<long>> nx(n, std::vector<long>(n, 0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < n; ++t)
          if (acc[i][t])
            for (std::size_t j = 0; j < n; ++j) nx[i][j] += acc[i][t] * m[t][j];
      acc = std::move(nx);
    }
    long tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += acc[i][i];
    return tr;
  };
  auto phi = [](int x) {
    int r = x;
    for (int p = 2; p * p <= x; ++p)
      if (x % p == 0) {
        while (x % p == 0) x /= p;
        r -= r / p;
      }
    if (x > 1) r -= r / x;
    return r;
  };
  long total = 0;
  for (int d = 1; d <= len; ++d)
    if (len % d == 0) total += phi(len / d) * trace_pow(d);
  return total / len;
}

}  // namespace

TEST_CASE("dilatation of the Fibonacci fixture is the golden ratio") {
  auto res = dilatation(fib());
  CHECK(res.primitive);
  CHECK(res.lambda == Approx(1.6180339887498949).margin(1e-9));
  CHECK(res.radius <= 1e-10 * res.lambda);
  CHECK(res.period == Approx(std::log(1.6180339887498949)).margin(1e-9));
}

TEST_CASE("spectral mapping: lambda of a squared matrix") {
  IntMatrix m = fib();
  auto a = dilatation(m);
  auto b = dilatation(m * m);
  CHECK(b.lambda == Approx(a.lambda * a.lambda).epsilon(1e-9));
}

TEST_CASE("non-primitive matrices are flagged and still bounded") {
  IntMatrix perm(2);
  perm.at(0, 1) = 1;
  perm.at(1, 0) = 1;
  auto res = dilatation(perm);
  CHECK_FALSE(res.primitive);
  CHECK(res.lambda == Approx(1.0).margin(1e-10));

  IntMatrix reducible(3);
  reducible.at(0, 0) = 2;  // block lambda 2
  reducible.at(0, 1) = 1;
  reducible.at(1, 1) = 1;
  reducible.at(2, 2) = 3;  // block lambda 3
  auto r2 = dilatation(reducible);
  CHECK_FALSE(r2.primitive);
  CHECK(r2.lambda == Approx(3.0).margin(1e-10));
  CHECK(r2.block_lambdas.size() == 3);
}

TEST_CASE("loop enumeration matches the necklace-count oracle") {
  std::mt19937_64 rng(4321);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t n = 2 + rng() % 3;
    std::vector<std::vector<bool>> a(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i][j] = (rng() % 100) < 45;
    TypeGraph g = synthetic_graph(a);
    int maxlen = 6;
    auto loops = enumerate_loops(g, maxlen);
    REQUIRE(loops.complete);
    std::map<int, long> by_len;
    for (const auto& l : loops.loops) by_len[static_cast<int>(l.length())] += 1;
    for (int len = 1; len <= maxlen; ++len)
      CHECK(by_len[len] == necklace_count(a, len));
  }
}

TEST_CASE("loop enumeration basics on a synthetic triangle") {
  std::vector<std::vector<bool>> a = {{true, true, false}, {false, false, true}, {true, false, false}};
  TypeGraph g = synthetic_graph(a);
  auto only_self = enumerate_loops(g, 1);
  REQUIRE(only_self.loops.size() == 1);  // just the self-loop at node 0
  CHECK(only_self.loops[0].nodes == std::vector<int>{0});

  auto loops = enumerate_loops(g, 6);
  for (const auto& l : loops.loops) {
    // closure replay: consecutive pairs (cyclically) are edges
    for (std::size_t i = 0; i < l.nodes.size(); ++i)
      CHECK(a[l.nodes[i]][l.nodes[(i + 1) % l.nodes.size()]]);
    // canonical rotation is minimal and duplicates are impossible
    CHECK(l.nodes == canonical_rotation(l.nodes));
  }
  long prim = 0, imprim = 0;
  for (const auto& l : loops.loops) (l.primitive ? prim : imprim) += 1;
  CHECK(prim == loops.primitive_count);
  CHECK(imprim == loops.imprimitive_count);
  CHECK(imprim > 0);  // powers of the self-loop
}

TEST_CASE("loop matrices on the real graph: identity, powers, determinant") {
  TypeGraph g = build_type_graph({seed_track(Surface(0, 5))}, 120, 2);
  auto loops = enumerate_loops(g, 4);
  REQUIRE(!loops.loops.empty());
  int b = g.nodes[0].representative.num_branches();
  PeriodicLoop empty;
  CHECK(loop_matrix(g, empty) == IntMatrix::identity(b));
  int checked = 0;
  for (const auto& l : loops.loops) {
    IntMatrix m = loop_matrix(g, l);
    CHECK(m.det() == 1);
    // traversing the loop twice squares the matrix
    PeriodicLoop twice;
    twice.nodes = l.nodes;
    for (int x : l.nodes) twice.nodes.push_back(x);
    CHECK(loop_matrix(g, twice) == m * m);
    if (++checked >= 10) break;
  }
}

TEST_CASE("dilatation is rotation invariant and >= 1 on enumerated loops") {
  TypeGraph g = build_type_graph({seed_track(Surface(0, 5))}, 150, 2);
  auto loops = enumerate_loops(g, 5);
  REQUIRE(loops.loops.size() >= 3);
  int checked = 0;
  for (const auto& l : loops.loops) {
    IntMatrix m = loop_matrix(g, l);
    auto d0 = dilatation(m);
    CHECK(d0.lambda >= 1.0 - 1e-12);
    // rotate the loop and compare spectra
    PeriodicLoop rot;
    rot.nodes.assign(l.nodes.begin() + 1, l.nodes.end());
    rot.nodes.push_back(l.nodes[0]);
    auto d1 = dilatation(loop_matrix(g, rot));
    CHECK(d1.lambda == Approx(d0.lambda).epsilon(1e-12));
    // k-th power scaling up to k = 3
    PeriodicLoop rep = l;
    for (int k = 2; k <= 3; ++k) {
      for (int x : l.nodes) rep.nodes.push_back(x);
      auto dk = dilatation(loop_matrix(g, rep));
      CHECK(dk.lambda == Approx(std::pow(d0.lambda, k)).epsilon(1e-9));
    }
    if (++checked >= 8) break;
  }
}

TEST_CASE("roof values are nonnegative and sum to log lambda around a tight loop") {
  TypeGraph g = build_type_graph({seed_track(Surface(0, 5))}, 150, 2);
  auto word = find_tight_word_any(g, 40);
  REQUIRE(word.has_value());
  auto loop = close_word_into_loop(g, word->nodes);
  REQUIRE(loop.has_value());
  IntMatrix m = loop_matrix(g, *loop);
  REQUIRE(is_primitive_pattern(BoolMatrix::from(m)));
  auto d = dilatation(m);
  CHECK(d.lambda > 1.0 + 1e-9);
  int depth = std::max<int>(8, static_cast<int>(loop->nodes.size()) * 2);
  auto roofs = roof_around_loop(g, *loop, depth);
  double sum = 0, rad = 0;
  for (const auto& r : roofs) {
    CHECK(r.value >= 0.0);
    sum += r.value;
    rad += r.radius;
  }
  CHECK(std::abs(sum - d.period) <= rad + 1e-9);
  CHECK(sum > 0.0);  // tight loop: positive window sum
}

TEST_CASE("roof spread shrinks with depth on a tight loop") {
  TypeGraph g = build_type_graph({seed_track(Surface(0, 5))}, 150, 2);
  auto tight = find_tight_word_any(g, 40);
  REQUIRE(tight.has_value());
  auto loop = close_word_into_loop(g, tight->nodes);
  REQUIRE(loop.has_value());
  std::vector<int> word;
  while (word.size() < 80)
    for (int x : loop->nodes) word.push_back(x);
  double prev = 1e300;
  for (int depth : {4, 8, 16, 32}) {
    auto rv = roof_estimate(g, word, depth);
    CHECK(rv.radius <= prev + 1e-12);
    prev = rv.radius;
  }
}

TEST_CASE("count report: empty, monotone, additive") {
  Surface s(0, 5);
  std::vector<double> grid{1, 2, 3, 4};
  auto empty = count_report({}, s, grid);
  for (const auto& row : empty.rows) CHECK(row.count == 0);
  CHECK(empty.target == Approx(4.0));
  CHECK(empty.upper_bound == Approx(20.0));

  std::vector<double> p1{0.5, 1.5, 2.5}, p2{1.2, 3.3};
  auto r1 = count_report(p1, s, grid);
  auto r2 = count_report(p2, s, grid);
  std::vector<double> both = p1;
  both.insert(both.end(), p2.begin(), p2.end());
  auto rb = count_report(both, s, grid);
  long prev = -1;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(rb.rows[k].count == r1.rows[k].count + r2.rows[k].count);
    CHECK(rb.rows[k].count >= prev);
    prev = rb.rows[k].count;
  }
}

TEST_CASE("flow entropy: deterministic loop gives zero, synthetic roof scales") {
  StochasticMatrix perm;
  perm.p = {{rat(0), rat(1)}, {rat(1), rat(0)}};
  auto m = MarkovMeasure::from_matrix(perm);
  auto fe = flow_entropy(
      m, [](const std::vector<int>&) { return RoofValue{1.0, 0.0, 2, 0}; }, 3);
  CHECK(fe.value == Approx(0.0).margin(1e-15));

  StochasticMatrix gm;
  gm.p = {{rat(1, 2), rat(1, 2)}, {rat(1), rat(0)}};
  auto mg = MarkovMeasure::from_matrix(gm);
  auto f1 = flow_entropy(
      mg, [](const std::vector<int>&) { return RoofValue{1.0, 0.0, 2, 0}; }, 3);
  CHECK(f1.value == Approx(shift_entropy(mg)).epsilon(1e-12));
  auto f2 = flow_entropy(
      mg, [](const std::vector<int>&) { return RoofValue{2.0, 0.0, 2, 0}; }, 3);
  CHECK(f2.value == Approx(f1.value / 2).epsilon(1e-12));
}
