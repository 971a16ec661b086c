// Search for complete seed tracks with every large branch on a twist
// connector.  Candidates are random fat-graph matchings around pre-placed
// twist connectors; survivors are machine-checked (regions, completeness)
// and printed in canonical storage form.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trax/cones.hpp"
#include "trax/track.hpp"
#include "trax/track_io.hpp"

using namespace trax;

namespace {

struct EndRef {
  int sw;
  Slot slot;
};

// Renumber branches by first appearance in the canonical traversal, then
// store canonically.  Deterministic tidy form for shipping.
Track tidy(const Track& t) {
  Track c = canonical_form(t);
  std::vector<int> newnum(c.num_branches() + 1, 0);
  int next = 1;
  Track out = c;
  for (auto& sw : out.switches)
    for (auto& h : sw.slot) {
      if (newnum[h.branch] == 0) newnum[h.branch] = next++;
      h.branch = newnum[h.branch];
    }
  return canonical_form(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random search for complete seed tracks"};
  int g = 0, m = 5;
  long tries = 500000;
  unsigned long rng_seed = 20240601;
  int want = 1;
  app.add_option("--genus", g);
  app.add_option("--punctures", m);
  app.add_option("--tries", tries);
  app.add_option("--rng-seed", rng_seed);
  app.add_option("--count", want);
  CLI11_PARSE(app, argc, argv);

  Surface surf(g, m);
  int b = surf.branches_expected();
  int s = surf.switches_expected();
  int connectors = surf.complexity();  // 3g-3+m
  std::mt19937_64 rng(rng_seed);

  long combinatorial_pass = 0;
  int found = 0;
  for (long attempt = 0; attempt < tries && found < want; ++attempt) {
    Track t;
    t.surface = surf;
    t.branch_nums.resize(b);
    for (int i = 0; i < b; ++i) t.branch_nums[i] = i + 1;
    t.switches.assign(s, Switch{});
    int next_branch = 1;

    // twist connectors on switches (2i, 2i+1)
    std::vector<EndRef> free_ends;
    for (int i = 0; i < connectors; ++i) {
      int A = 2 * i, B = 2 * i + 1;
      int e = next_branch++;
      int f = next_branch++;
      t.switches[A][Slot::Large] = Half{e, 0};
      t.switches[B][Slot::Large] = Half{e, 1};
      Slot fa = (rng() & 1) ? Slot::SmallLeft : Slot::SmallRight;
      Slot fb = (rng() & 1) ? Slot::SmallLeft : Slot::SmallRight;
      t.switches[A][fa] = Half{f, 0};
      t.switches[B][fb] = Half{f, 1};
      free_ends.push_back({A, fa == Slot::SmallLeft ? Slot::SmallRight : Slot::SmallLeft});
      free_ends.push_back({B, fb == Slot::SmallLeft ? Slot::SmallRight : Slot::SmallLeft});
    }
    std::vector<EndRef> large_ends;
    for (int sw = 2 * connectors; sw < s; ++sw) {
      large_ends.push_back({sw, Slot::Large});
      free_ends.push_back({sw, Slot::SmallLeft});
      free_ends.push_back({sw, Slot::SmallRight});
    }
    // each remaining large slot pairs with a small-slot end, so the only
    // branches large at both ends are the connector branches
    std::shuffle(free_ends.begin(), free_ends.end(), rng);
    if (free_ends.size() < large_ends.size()) continue;
    std::size_t cursor = 0;
    for (const auto& le : large_ends) {
      const EndRef& se = free_ends[cursor++];
      int n = next_branch++;
      t.switches[le.sw][le.slot] = Half{n, 0};
      t.switches[se.sw][se.slot] = Half{n, 1};
    }
    for (; cursor + 1 < free_ends.size(); cursor += 2) {
      int n = next_branch++;
      t.switches[free_ends[cursor].sw][free_ends[cursor].slot] = Half{n, 0};
      t.switches[free_ends[cursor + 1].sw][free_ends[cursor + 1].slot] = Half{n, 1};
    }
    if (next_branch != b + 1) continue;

    Locator loc;
    try {
      loc = build_locator(t);
    } catch (const MalformedError&) {
      continue;
    }
    if (!is_connected(t, loc)) continue;
    std::vector<Region> regs;
    try {
      regs = regions(t);
    } catch (const MalformedError&) {
      continue;
    }
    int trigons = 0, monogons = 0;
    bool shapes = true;
    for (const auto& r : regs) {
      if (r.cusps == 3)
        ++trigons;
      else if (r.cusps == 1)
        ++monogons;
      else
        shapes = false;
    }
    if (!shapes || trigons != surf.trigons_expected() || monogons != surf.punctures) continue;
    if (s - b + static_cast<int>(regs.size()) != 2 - 2 * g) continue;
    ++combinatorial_pass;

    if (!is_recurrent(t) || !is_transversely_recurrent(t)) continue;

    Track out = tidy(t);
    auto rep = validate(out);
    if (!rep.passed) {
      std::cerr << "tidy form failed validation?!\n" << rep.summary();
      continue;
    }
    bool twist_ok = true;
    Locator oloc = build_locator(out);
    for (int e : large_branches(out)) twist_ok = twist_ok && on_twist_connector(out, oloc, e);
    if (!twist_ok) continue;
    if (!is_recurrent(out) || !is_transversely_recurrent(out)) {
      std::cerr << "tidy form lost completeness?!\n";
      continue;
    }
    ++found;
    std::cout << "# attempt " << attempt << " (combinatorial passes so far "
              << combinatorial_pass << ")\n";
    std::cout << track_to_text(out);
  }
  std::cerr << "found " << found << " seed(s); combinatorial passes " << combinatorial_pass
            << "\n";
  return found > 0 ? 0 : 1;
}
