#ifndef TRAX_TRACK_HPP
#define TRAX_TRACK_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "trax/common.hpp"
#include "trax/surface.hpp"

namespace trax {

// One endpoint of a branch.  branch is the persistent branch number (1-based),
// end distinguishes the two endpoints.  branch == 0 marks an unset slot.
struct Half {
  int branch = 0;
  int end = 0;

  bool defined() const { return branch > 0; }
  bool operator==(const Half& o) const { return branch == o.branch && end == o.end; }
  bool operator<(const Half& o) const {
    return branch != o.branch ? branch < o.branch : end < o.end;
  }
};

enum class Slot : int { Large = 0, SmallLeft = 1, SmallRight = 2 };

// Trivalent switch: one half-branch on the large side, two on the small side
// ordered (left, right) by the surface orientation.  The counterclockwise
// cyclic order of the three ends around the switch is fixed once and for all
// as Large -> SmallRight -> SmallLeft; the cusp of the switch is the wedge
// between the two small ends.
struct Switch {
  std::array<Half, 3> slot;  // indexed by Slot

  const Half& large() const { return slot[0]; }
  const Half& small_left() const { return slot[1]; }
  const Half& small_right() const { return slot[2]; }
  Half& operator[](Slot s) { return slot[static_cast<int>(s)]; }
  const Half& operator[](Slot s) const { return slot[static_cast<int>(s)]; }
};

// Combinatorial train track as an oriented fat graph.  Value type; all
// operations below are pure functions returning fresh tracks.
struct Track {
  Surface surface{0, 5};
  std::vector<int> branch_nums;
  std::vector<Switch> switches;

  int num_branches() const { return static_cast<int>(branch_nums.size()); }
  int num_switches() const { return static_cast<int>(switches.size()); }
};

enum class BranchClass { Large, Mixed, Small };

inline const char* to_string(BranchClass c) {
  switch (c) {
    case BranchClass::Large: return "large";
    case BranchClass::Mixed: return "mixed";
    default: return "small";
  }
}

struct HalfLoc {
  int sw = -1;
  Slot slot = Slot::Large;
};

// Where each half-branch sits.  Throws MalformedError when the occupancy is
// not a bijection; validate() performs the tolerant version of this scan.
struct Locator {
  int b = 0;
  std::vector<std::array<HalfLoc, 2>> loc;  // index branch number, 1-based

  const HalfLoc& of(const Half& h) const { return loc[h.branch][h.end]; }
  const HalfLoc& of(int branch, int end) const { return loc[branch][end]; }
};

inline Locator build_locator(const Track& t) {
  Locator l;
  l.b = t.num_branches();
  l.loc.assign(l.b + 1, {HalfLoc{}, HalfLoc{}});
  for (int si = 0; si < t.num_switches(); ++si) {
    for (int sl = 0; sl < 3; ++sl) {
      const Half& h = t.switches[si].slot[sl];
      if (!h.defined()) throw MalformedError("unset slot at switch " + std::to_string(si));
      if (h.branch < 1 || h.branch > l.b || (h.end != 0 && h.end != 1))
        throw MalformedError("slot references unknown half-branch");
      HalfLoc& dst = l.loc[h.branch][h.end];
      if (dst.sw >= 0) throw MalformedError("half-branch occupies two slots");
      dst = HalfLoc{si, static_cast<Slot>(sl)};
    }
  }
  for (int n = 1; n <= l.b; ++n)
    for (int e = 0; e < 2; ++e)
      if (l.loc[n][e].sw < 0)
        throw MalformedError("dangling half-branch (" + std::to_string(n) + "," +
                             std::to_string(e) + ")");
  return l;
}

inline bool half_is_large(const Locator& loc, const Half& h) {
  return loc.of(h).slot == Slot::Large;
}

inline BranchClass branch_class(const Locator& loc, int branch) {
  bool l0 = loc.of(branch, 0).slot == Slot::Large;
  bool l1 = loc.of(branch, 1).slot == Slot::Large;
  if (l0 && l1) return BranchClass::Large;
  if (!l0 && !l1) return BranchClass::Small;
  return BranchClass::Mixed;
}

// branch -> class, indexed by branch number (entry 0 unused).
inline std::vector<BranchClass> classify_branches(const Track& t) {
  Locator loc = build_locator(t);
  std::vector<BranchClass> out(t.num_branches() + 1, BranchClass::Small);
  for (int n = 1; n <= t.num_branches(); ++n) out[n] = branch_class(loc, n);
  return out;
}

inline std::vector<int> large_branches(const Track& t) {
  auto cls = classify_branches(t);
  std::vector<int> out;
  for (int n = 1; n <= t.num_branches(); ++n)
    if (cls[n] == BranchClass::Large) out.push_back(n);
  return out;
}

// --- complementary regions --------------------------------------------------

struct RegionStep {
  int branch = 0;       // branch traversed
  bool cusp_after = false;  // inward cusp between this traversal and the next
};

struct Region {
  std::vector<RegionStep> boundary;
  int cusps = 0;
  bool punctured = false;  // monogon regions carry the puncture

  // Maximal cusp-free runs of the boundary, as branch multiplicity vectors
  // indexed by branch number.  A trigon yields three sides.
  std::vector<std::vector<int>> sides(int num_branches) const {
    std::vector<std::vector<int>> out;
    if (cusps == 0) return out;
    int n = static_cast<int>(boundary.size());
    int start = 0;
    while (!boundary[start].cusp_after) ++start;  // cusps > 0 guarantees one
    start = (start + 1) % n;
    std::vector<int> side(num_branches + 1, 0);
    for (int k = 0; k < n; ++k) {
      const RegionStep& st = boundary[(start + k) % n];
      side[st.branch] += 1;
      if (st.cusp_after) {
        out.push_back(side);
        side.assign(num_branches + 1, 0);
      }
    }
    return out;
  }
};

namespace detail {

inline Slot ccw_next(Slot s) {
  switch (s) {
    case Slot::Large: return Slot::SmallRight;
    case Slot::SmallRight: return Slot::SmallLeft;
    default: return Slot::Large;
  }
}

}  // namespace detail

// Boundary traversal of the fat graph.  Throws MalformedError when the walk
// cannot close up (broken embedding data).
inline std::vector<Region> regions(const Track& t) {
  Locator loc = build_locator(t);
  int b = t.num_branches();
  // dart id: 2*(branch-1) + end, pointing out of the switch holding that end
  std::vector<bool> seen(2 * b, false);
  std::vector<Region> out;
  for (int d0 = 0; d0 < 2 * b; ++d0) {
    if (seen[d0]) continue;
    Region reg;
    int d = d0;
    do {
      if (seen[d]) throw MalformedError("boundary walk does not close up");
      seen[d] = true;
      int branch = d / 2 + 1, end = d % 2;
      // travel along `branch` to its far end, then turn ccw at that switch
      int far_end = 1 - end;
      const HalfLoc& arrive = loc.of(branch, far_end);
      Slot depart = detail::ccw_next(arrive.slot);
      bool cusp = (arrive.slot == Slot::SmallRight);  // (sr -> sl) wedge
      reg.boundary.push_back(RegionStep{branch, cusp});
      if (cusp) reg.cusps += 1;
      const Half& nh = t.switches[arrive.sw][depart];
      d = 2 * (nh.branch - 1) + nh.end;
    } while (d != d0);
    reg.punctured = (reg.cusps == 1);
    out.push_back(std::move(reg));
  }
  return out;
}

// --- validation --------------------------------------------------------------

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool passed = true;

  void add(const std::string& name, bool ok, const std::string& detail = "") {
    checks.push_back({name, ok, detail});
    passed = passed && ok;
  }
  std::string summary() const {
    std::string s;
    for (const auto& c : checks) {
      s += (c.pass ? "pass  " : "FAIL  ") + c.name;
      if (!c.detail.empty()) s += "  (" + c.detail + ")";
      s += "\n";
    }
    return s;
  }
};

inline bool is_connected(const Track& t, const Locator& loc) {
  if (t.switches.empty()) return false;
  std::vector<bool> vis(t.num_switches(), false);
  std::vector<int> stack{0};
  vis[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int sw = stack.back();
    stack.pop_back();
    for (int sl = 0; sl < 3; ++sl) {
      const Half& h = t.switches[sw].slot[sl];
      int other = loc.of(h.branch, 1 - h.end).sw;
      if (!vis[other]) {
        vis[other] = true;
        ++count;
        stack.push_back(other);
      }
    }
  }
  return count == t.num_switches();
}

inline ValidationReport validate(const Track& t) {
  ValidationReport rep;
  int b = t.num_branches(), s = t.num_switches();

  // structural layer
  {
    std::vector<int> nums = t.branch_nums;
    std::sort(nums.begin(), nums.end());
    bool ok = true;
    for (int i = 0; i < b; ++i) ok = ok && nums[i] == i + 1;
    rep.add("branch-numbering", ok, ok ? "" : "numbers are not a bijection onto 1..b");
  }
  {
    bool slots_ok = true;
    std::string why;
    std::vector<std::array<int, 2>> count(b + 1, {0, 0});
    for (int si = 0; si < s && slots_ok; ++si)
      for (int sl = 0; sl < 3; ++sl) {
        const Half& h = t.switches[si].slot[sl];
        if (!h.defined()) {
          slots_ok = false;
          why = "switch " + std::to_string(si) + " has an empty slot (not trivalent)";
          break;
        }
        if (h.branch < 1 || h.branch > b || (h.end != 0 && h.end != 1)) {
          slots_ok = false;
          why = "slot references unknown half-branch";
          break;
        }
        count[h.branch][h.end] += 1;
      }
    rep.add("trivalence", slots_ok, why);
    if (slots_ok) {
      bool occ = true;
      std::string det;
      for (int n = 1; n <= b && occ; ++n)
        for (int e = 0; e < 2; ++e)
          if (count[n][e] != 1) {
            occ = false;
            det = "half (" + std::to_string(n) + "," + std::to_string(e) + ") occupies " +
                  std::to_string(count[n][e]) + " slots";
          }
      rep.add("half-occupancy", occ, det);
    } else {
      rep.add("half-occupancy", false, "skipped: slot layer broken");
    }
  }
  rep.add("switch-count", 3 * s == 2 * b, "switches = 2*branches/3 required");
  if (!rep.passed) return rep;

  Locator loc = build_locator(t);
  rep.add("connected", is_connected(t, loc));
  if (!rep.passed) return rep;

  std::vector<Region> regs;
  try {
    regs = regions(t);
  } catch (const MalformedError& e) {
    rep.add("regions", false, e.what());
    return rep;
  }
  int f = static_cast<int>(regs.size());
  rep.add("euler", s - b + f == 2 - 2 * t.surface.genus,
          "V-E+F = " + std::to_string(s - b + f) + ", expected " +
              std::to_string(2 - 2 * t.surface.genus));
  int trigons = 0, monogons = 0, cusps = 0;
  bool shapes = true;
  for (const auto& r : regs) {
    cusps += r.cusps;
    if (r.cusps == 3)
      ++trigons;
    else if (r.cusps == 1)
      ++monogons;
    else
      shapes = false;
  }
  rep.add("region-shapes", shapes, shapes ? "" : "region with cusp count outside {1,3}");
  rep.add("region-counts",
          trigons == t.surface.trigons_expected() && monogons == t.surface.punctures,
          std::to_string(trigons) + " trigons / " + std::to_string(monogons) + " monogons");
  rep.add("cusp-count", cusps == s);
  rep.add("complexity-counts",
          b == t.surface.branches_expected() && s == t.surface.switches_expected(),
          "b=" + std::to_string(b) + " s=" + std::to_string(s));
  return rep;
}

// --- canonical code ----------------------------------------------------------

namespace detail {

// Deterministic BFS encoding from a fixed root.  Together with the branch
// numbering this is a complete isomorphism invariant of the oriented fat
// graph (orientation enters through the left/right slot asymmetry).
inline std::string code_from_root(const Track& t, const Locator& loc, int root) {
  int b = t.num_branches();
  std::vector<int> order;
  std::vector<bool> visited(t.num_switches(), false);
  std::vector<int> queue{root};
  visited[root] = true;
  std::size_t qi = 0;
  while (qi < queue.size()) {
    int sw = queue[qi++];
    order.push_back(sw);
    for (int sl = 0; sl < 3; ++sl) {
      const Half& h = t.switches[sw].slot[sl];
      int other = loc.of(h.branch, 1 - h.end).sw;
      if (!visited[other]) {
        visited[other] = true;
        queue.push_back(other);
      }
    }
  }
  std::string code;
  code.reserve(order.size() * 6);
  std::vector<int> first_end(b + 1, -1);
  for (int sw : order) {
    for (int sl = 0; sl < 3; ++sl) {
      const Half& h = t.switches[sw].slot[sl];
      if (first_end[h.branch] < 0) first_end[h.branch] = h.end;
      code.push_back(static_cast<char>(h.branch));
      code.push_back(h.end == first_end[h.branch] ? '\x00' : '\x01');
    }
  }
  return code;
}

}  // namespace detail

// Invariant under switch relabeling/storage order; depends on branch numbers.
inline std::string canonical_code(const Track& t) {
  Locator loc = build_locator(t);
  if (!is_connected(t, loc)) throw MalformedError("canonical_code: track not connected");
  std::string best;
  for (int root = 0; root < t.num_switches(); ++root) {
    std::string c = detail::code_from_root(t, loc, root);
    if (best.empty() || c < best) best = std::move(c);
  }
  return best;
}

// Rebuilds a track from a code string; inverse of canonical_code on
// canonical-form tracks.
inline Track track_from_code(const Surface& surf, const std::string& code) {
  if (code.size() % 6 != 0) throw MalformedError("bad code length");
  int s = static_cast<int>(code.size() / 6);
  int b = 3 * s / 2;
  Track t;
  t.surface = surf;
  t.branch_nums.resize(b);
  for (int i = 0; i < b; ++i) t.branch_nums[i] = i + 1;
  t.switches.resize(s);
  std::vector<int> first_end(b + 1, -1);
  std::size_t pos = 0;
  for (int sw = 0; sw < s; ++sw)
    for (int sl = 0; sl < 3; ++sl) {
      int branch = static_cast<unsigned char>(code[pos++]);
      int tok = static_cast<unsigned char>(code[pos++]);
      if (branch < 1 || branch > b) throw MalformedError("bad code entry");
      if (first_end[branch] < 0) first_end[branch] = 0;
      int end = (tok == 0) ? first_end[branch] : 1 - first_end[branch];
      t.switches[sw].slot[sl] = Half{branch, end};
    }
  return t;
}

// Storage-canonical copy: switches renumbered along the code traversal.
inline Track canonical_form(const Track& t) {
  return track_from_code(t.surface, canonical_code(t));
}

// Hex rendering of a code, for JSON and filenames.
inline std::string code_to_hex(const std::string& code) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(code.size() * 2);
  for (unsigned char c : code) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

inline std::string code_from_hex(const std::string& hex) {
  if (hex.size() % 2) throw MalformedError("bad hex code");
  auto val = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw MalformedError("bad hex digit");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<char>(val(hex[i]) * 16 + val(hex[i + 1])));
  return out;
}

// Embedded closed trainpath of length 2 through the large branch e: a small
// branch whose two halves sit on the small sides of e's two switches.
inline bool on_twist_connector(const Track& t, const Locator& loc, int e) {
  const HalfLoc& l0 = loc.of(e, 0);
  const HalfLoc& l1 = loc.of(e, 1);
  if (l0.slot != Slot::Large || l1.slot != Slot::Large) return false;
  for (int n = 1; n <= t.num_branches(); ++n) {
    if (n == e) continue;
    const HalfLoc& a = loc.of(n, 0);
    const HalfLoc& b = loc.of(n, 1);
    bool small_both = a.slot != Slot::Large && b.slot != Slot::Large;
    if (!small_both) continue;
    if ((a.sw == l0.sw && b.sw == l1.sw) || (a.sw == l1.sw && b.sw == l0.sw)) return true;
  }
  return false;
}

}  // namespace trax

#endif
