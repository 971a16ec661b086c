#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "trax/markov.hpp"
#include "trax/seeds.hpp"

using namespace trax;
using Catch::Approx;

namespace {

StochasticMatrix golden_mean() {
  StochasticMatrix m;
  m.p = {{rat(1, 2), rat(1, 2)}, {rat(1), rat(0)}};
  return m;
}

StochasticMatrix three_state() {
  StochasticMatrix m;
  m.p = {{rat(0), rat(1, 2), rat(1, 2)},
         {rat(1, 3), rat(1, 3), rat(1, 3)},
         {rat(1), rat(0), rat(0)}};
  return m;
}

// exhaustive path enumeration: mass of all admissible length-m words
// avoiding `pattern` as a contiguous subword
Rat brute_avoidance(const MarkovMeasure& m, const std::vector<int>& pattern, int horizon) {
  std::size_t n = m.P.size();
  Rat total(0);
  std::vector<int> word;
  std::function<void()> rec = [&]() {
    if (static_cast<int>(word.size()) == horizon) {
      for (std::size_t s = 0; s + pattern.size() <= word.size(); ++s) {
        bool hit = true;
        for (std::size_t k = 0; k < pattern.size(); ++k)
          if (word[s + k] != pattern[k]) {
            hit = false;
            break;
          }
        if (hit) return;
      }
      total += cylinder_mass(m, word).mass;
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!word.empty() && m.P.p[word.back()][j] == 0) continue;
      word.push_back(static_cast<int>(j));
      rec();
      word.pop_back();
    }
  };
  rec();
  return total;
}

}  // namespace

TEST_CASE("stationary vectors on the worked fixtures") {
  auto m = MarkovMeasure::from_matrix(golden_mean());
  CHECK(m.pi[0] == rat(2, 3));
  CHECK(m.pi[1] == rat(1, 3));

  StochasticMatrix one;
  one.p = {{rat(1)}};
  CHECK(stationary(one)[0] == rat(1));

  StochasticMatrix perm;
  perm.p = {{rat(0), rat(1), rat(0)}, {rat(0), rat(0), rat(1)}, {rat(1), rat(0), rat(0)}};
  auto pi = stationary(perm);
  for (const auto& x : pi) CHECK(x == rat(1, 3));
}

TEST_CASE("stationary rejects reducible support and bad rows") {
  StochasticMatrix red;
  red.p = {{rat(1), rat(0)}, {rat(1, 2), rat(1, 2)}};
  CHECK_THROWS_AS(stationary(red), InvalidMeasureError);

  StochasticMatrix bad;
  bad.p = {{rat(1, 2), rat(1, 3)}, {rat(1), rat(0)}};
  CHECK_THROWS_AS(stationary(bad), InvalidMeasureError);
}

TEST_CASE("stationary residual is tiny in floating point") {
  auto m = MarkovMeasure::from_matrix(three_state());
  double res = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    double pj = rat_to_double(m.pi[j]), acc = 0;
    for (std::size_t i = 0; i < 3; ++i) acc += rat_to_double(m.pi[i]) * rat_to_double(m.P.p[i][j]);
    res += std::abs(acc - pj);
  }
  CHECK(res <= 1e-12);
}

TEST_CASE("cylinder masses: base cases and normalization") {
  auto m = MarkovMeasure::from_matrix(golden_mean());
  CHECK(cylinder_mass(m, {0}).mass == m.pi[0]);
  CHECK(cylinder_mass(m, {1}).mass == m.pi[1]);
  // sum over all admissible length-2 words is one, exactly
  Rat sum(0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sum += cylinder_mass(m, {i, j}).mass;
  CHECK(sum == 1);
  auto dead = cylinder_mass(m, {1, 1});
  CHECK(dead.mass == 0);
  CHECK_FALSE(dead.admissible);
}

TEST_CASE("Kolmogorov consistency to length 5 on the 3-state fixture") {
  auto m = MarkovMeasure::from_matrix(three_state());
  std::vector<std::vector<int>> words{{}};
  for (int len = 1; len <= 5; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& w : words)
      for (int j = 0; j < 3; ++j) {
        std::vector<int> e = w;
        e.push_back(j);
        next.push_back(e);
      }
    words = std::move(next);
    for (const auto& w : words) {
      if (static_cast<int>(w.size()) >= 5) break;
      Rat mass = cylinder_mass(m, w).mass;
      Rat right(0), left(0);
      for (int j = 0; j < 3; ++j) {
        std::vector<int> r = w;
        r.push_back(j);
        right += cylinder_mass(m, r).mass;
        std::vector<int> l{j};
        l.insert(l.end(), w.begin(), w.end());
        left += cylinder_mass(m, l).mass;
      }
      CHECK(mass == right);
      CHECK(mass == left);  // stationarity
    }
  }
}

TEST_CASE("shift entropy fixtures") {
  StochasticMatrix perm;
  perm.p = {{rat(0), rat(1)}, {rat(1), rat(0)}};
  CHECK(shift_entropy(MarkovMeasure::from_matrix(perm)) == Approx(0.0).margin(1e-15));

  StochasticMatrix full;
  full.p = {{rat(1, 2), rat(1, 2)}, {rat(1, 2), rat(1, 2)}};
  CHECK(shift_entropy(MarkovMeasure::from_matrix(full)) == Approx(std::log(2.0)).epsilon(1e-12));

  auto gm = MarkovMeasure::from_matrix(golden_mean());
  CHECK(shift_entropy(gm) == Approx((2.0 / 3.0) * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("avoidance probability equals the exhaustive oracle exactly") {
  auto m = MarkovMeasure::from_matrix(golden_mean());
  for (int horizon = 2; horizon <= 10; ++horizon) {
    auto rep = avoidance_probability(m, {0, 0}, horizon);
    CHECK(rep.probability == brute_avoidance(m, {0, 0}, horizon));
  }
  auto m3 = MarkovMeasure::from_matrix(three_state());
  for (int horizon = 3; horizon <= 8; ++horizon) {
    auto rep = avoidance_probability(m3, {0, 1, 1}, horizon);
    CHECK(rep.probability == brute_avoidance(m3, {0, 1, 1}, horizon));
  }
}

TEST_CASE("avoidance probability is nonincreasing and decays for admissible words") {
  auto m = MarkovMeasure::from_matrix(golden_mean());
  Rat prev(1);
  for (int horizon = 2; horizon <= 12; ++horizon) {
    auto rep = avoidance_probability(m, {0, 0}, horizon);
    CHECK(rep.probability <= prev);
    prev = rep.probability;
  }
  auto rep = avoidance_probability(m, {0, 0}, 12);
  CHECK(rep.rate < 1.0);
  CHECK(rep.rate_below_one);
  // probability <= C * rate^m by the fit
  CHECK(rat_to_double(rep.probability) <= rep.fitted_c * std::pow(rep.rate, 12.0) + 1e-12);
}

TEST_CASE("forbidding an inadmissible word changes nothing") {
  auto m = MarkovMeasure::from_matrix(golden_mean());
  auto rep = avoidance_probability(m, {1, 1}, 8);
  CHECK(rep.probability == 1);
}

TEST_CASE("two distinct matrices with equal support disagree on a short cylinder") {
  auto a = MarkovMeasure::from_matrix(golden_mean());
  StochasticMatrix other;
  other.p = {{rat(1, 3), rat(2, 3)}, {rat(1), rat(0)}};
  auto b = MarkovMeasure::from_matrix(other);
  bool differ = false;
  for (int i = 0; i < 2 && !differ; ++i) {
    if (a.pi[i] != b.pi[i]) differ = true;
    for (int j = 0; j < 2 && !differ; ++j) {
      Rat da = cylinder_mass(a, {i, j}).mass - cylinder_mass(b, {i, j}).mass;
      if (da < 0) da = -da;
      if (da > rat(1, 1000000)) differ = true;
    }
  }
  CHECK(differ);
}

TEST_CASE("uniform stochastic matrix matches the adjacency support") {
  TypeGraph g = build_type_graph({seed_track(Surface(0, 5))}, 30, 2);
  auto a = g.adjacency();
  // restrict to nodes with outgoing edges: pad dead rows with a self-loop to
  // build a legal fixture, then check support verification catches mismatches
  bool any_dead = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool dead = true;
    for (std::size_t j = 0; j < a.size(); ++j) dead = dead && !a[i][j];
    if (dead) {
      a[i][i] = true;
      any_dead = true;
    }
  }
  (void)any_dead;
  auto m = uniform_stochastic(a);
  CHECK(m.support_mismatches(a).empty());
  m.p[0][0] += rat(1, 7);  // now support and row sums are both off
  CHECK_THROWS_AS(m.check_stochastic(), InvalidMeasureError);
}

TEST_CASE("monte-carlo transition rows: determinism and partition of counts") {
  TypeGraph g = build_type_graph({seed_track(Surface(0, 5))}, 20, 2);
  int node = 0;
  auto rows1 = lebesgue_transitions_mc(g, node, 400, 99);
  auto rows2 = lebesgue_transitions_mc(g, node, 400, 99);
  REQUIRE(rows1.size() == rows2.size());
  long total = 0;
  for (std::size_t k = 0; k < rows1.size(); ++k) {
    CHECK(rows1[k].count == rows2[k].count);
    CHECK(rows1[k].choices == rows2[k].choices);
    total += rows1[k].count;
  }
  CHECK(total == 400);  // counts partition the sample
  double fsum = 0;
  for (const auto& r : rows1) fsum += r.frequency;
  CHECK(fsum == Approx(1.0).margin(1e-12));
}

TEST_CASE("monte-carlo standard errors shrink like the sample size") {
  TypeGraph g = build_type_graph({seed_track(Surface(0, 5))}, 20, 2);
  auto small = lebesgue_transitions_mc(g, 0, 300, 7);
  auto big = lebesgue_transitions_mc(g, 0, 4 * 300, 7);
  // pick the most frequent bucket of the small run
  std::size_t k = 0;
  for (std::size_t i = 0; i < small.size(); ++i)
    if (small[i].count > small[k].count) k = i;
  REQUIRE(small[k].count > 0);
  CHECK(big[k].std_error <= 0.62 * small[k].std_error + 1e-12);
  // agreement within 3 sigma
  double diff = std::abs(big[k].frequency - small[k].frequency);
  CHECK(diff <= 3.0 * (big[k].std_error + small[k].std_error) + 1e-9);
}
