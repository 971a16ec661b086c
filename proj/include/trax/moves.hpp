#ifndef TRAX_MOVES_HPP
#define TRAX_MOVES_HPP

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "trax/cones.hpp"
#include "trax/linalg.hpp"
#include "trax/track.hpp"

namespace trax {

// A right split at a large branch is fixed by the surface orientation alone:
// with the stored (left,right) small-slot order at each endpoint switch, the
// winners of a right split are the two small_right half-branches and the
// losers the two small_left ones; a left split swaps the roles.  Swapping
// this constant globally relabels Left <-> Right everywhere.
enum class SplitDirection { Left, Right };

inline const char* to_string(SplitDirection d) {
  return d == SplitDirection::Right ? "R" : "L";
}

struct MoveRecord {
  enum class Kind { Shift, Split, FullSplit } kind = Kind::Split;
  std::vector<int> locations;                 // branch numbers acted on
  std::vector<SplitDirection> directions;     // parallel to locations (splits)
  // Shift weight transfer: the carried measure on the shifted track agrees
  // with the source on every branch except the shifted one, whose weight is
  // the sum of the two listed branches.
  int shift_branch = 0;
  int shift_sum_a = 0;
  int shift_sum_b = 0;
};

struct SplitResult {
  Track track;
  IntMatrix carry;  // maps split-track weights to pre-split weights
  MoveRecord record;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw InvalidMoveError(msg);
}

}  // namespace detail

// Split at a large branch.  Winners/losers and the post-split switch layout
// follow the convention documented at SplitDirection.
inline SplitResult split(const Track& t, int e, SplitDirection dir) {
  Locator loc = build_locator(t);
  detail::require(e >= 1 && e <= t.num_branches(), "split: no such branch");
  detail::require(branch_class(loc, e) == BranchClass::Large, "split: branch is not large");
  const HalfLoc& lu = loc.of(e, 0);
  const HalfLoc& lw = loc.of(e, 1);
  int u = lu.sw, w = lw.sw;

  Half a = t.switches[u][Slot::SmallRight];  // winners of a right split: a, c
  Half bb = t.switches[u][Slot::SmallLeft];
  Half c = t.switches[w][Slot::SmallRight];
  Half d = t.switches[w][Slot::SmallLeft];

  SplitResult res;
  res.track = t;
  Switch& p = res.track.switches[u];
  Switch& q = res.track.switches[w];
  if (dir == SplitDirection::Right) {
    p[Slot::Large] = a;
    p[Slot::SmallLeft] = d;
    p[Slot::SmallRight] = Half{e, 0};
    q[Slot::Large] = c;
    q[Slot::SmallLeft] = bb;
    q[Slot::SmallRight] = Half{e, 1};
  } else {
    p[Slot::Large] = bb;
    p[Slot::SmallLeft] = Half{e, 0};
    p[Slot::SmallRight] = c;
    q[Slot::Large] = d;
    q[Slot::SmallLeft] = Half{e, 1};
    q[Slot::SmallRight] = a;
  }

  res.carry = IntMatrix::identity(t.num_branches());
  int l1 = (dir == SplitDirection::Right) ? bb.branch : a.branch;
  int l2 = (dir == SplitDirection::Right) ? d.branch : c.branch;
  res.carry.at(e - 1, l1 - 1) += 1;
  res.carry.at(e - 1, l2 - 1) += 1;

  res.record.kind = MoveRecord::Kind::Split;
  res.record.locations = {e};
  res.record.directions = {dir};
  return res;
}

// Inverse of split: collapse along a diagonal branch.  The configuration is
// recognized by the chirality of the diagonal's two small slots.
inline Track unsplit(const Track& t, int diag, SplitDirection dir) {
  Locator loc = build_locator(t);
  detail::require(diag >= 1 && diag <= t.num_branches(), "unsplit: no such branch");
  const HalfLoc& l0 = loc.of(diag, 0);
  const HalfLoc& l1 = loc.of(diag, 1);
  Slot want = (dir == SplitDirection::Right) ? Slot::SmallRight : Slot::SmallLeft;
  detail::require(l0.slot == want && l1.slot == want,
                  "unsplit: branch is not a split diagonal of this direction");
  int P = l0.sw, Q = l1.sw;
  detail::require(P != Q, "unsplit: diagonal is a loop");

  Track out = t;
  Switch& su = out.switches[P];
  Switch& sw = out.switches[Q];
  if (dir == SplitDirection::Right) {
    Half a = t.switches[P][Slot::Large];
    Half d = t.switches[P][Slot::SmallLeft];
    Half c = t.switches[Q][Slot::Large];
    Half bb = t.switches[Q][Slot::SmallLeft];
    su[Slot::Large] = Half{diag, 0};
    su[Slot::SmallLeft] = bb;
    su[Slot::SmallRight] = a;
    sw[Slot::Large] = Half{diag, 1};
    sw[Slot::SmallLeft] = d;
    sw[Slot::SmallRight] = c;
  } else {
    Half bb = t.switches[P][Slot::Large];
    Half c = t.switches[P][Slot::SmallRight];
    Half d = t.switches[Q][Slot::Large];
    Half a = t.switches[Q][Slot::SmallRight];
    su[Slot::Large] = Half{diag, 0};
    su[Slot::SmallLeft] = bb;
    su[Slot::SmallRight] = a;
    sw[Slot::Large] = Half{diag, 1};
    sw[Slot::SmallLeft] = d;
    sw[Slot::SmallRight] = c;
  }
  return out;
}

struct ShiftResult {
  Track track;
  MoveRecord record;
};

// Shift along a mixed branch: the tooth at its small end slides past the
// switch at its large end, staying on its own side of the strand.
inline ShiftResult shift(const Track& t, int f) {
  Locator loc = build_locator(t);
  detail::require(f >= 1 && f <= t.num_branches(), "shift: no such branch");
  detail::require(branch_class(loc, f) == BranchClass::Mixed, "shift: branch is not mixed");
  int large_end = loc.of(f, 0).slot == Slot::Large ? 0 : 1;
  const HalfLoc& lv = loc.of(f, large_end);
  const HalfLoc& lx = loc.of(f, 1 - large_end);
  int v = lv.sw, x = lx.sw;
  detail::require(v != x, "shift: mixed loop cannot be shifted");

  Half g = t.switches[v][Slot::SmallLeft];
  Half h = t.switches[v][Slot::SmallRight];
  Half k = t.switches[x][Slot::Large];
  Half f_large{f, large_end};
  Half f_small{f, 1 - large_end};

  ShiftResult res;
  res.track = t;
  Switch& vs = res.track.switches[v];
  Switch& xs = res.track.switches[x];
  res.record.kind = MoveRecord::Kind::Shift;
  res.record.locations = {f};
  res.record.shift_branch = f;
  if (lx.slot == Slot::SmallRight) {
    Half j = t.switches[x][Slot::SmallLeft];
    vs[Slot::Large] = k;
    vs[Slot::SmallLeft] = f_small;
    vs[Slot::SmallRight] = h;
    xs[Slot::Large] = f_large;
    xs[Slot::SmallLeft] = j;
    xs[Slot::SmallRight] = g;
    res.record.shift_sum_a = g.branch;
    res.record.shift_sum_b = j.branch;
  } else {
    Half j = t.switches[x][Slot::SmallRight];
    vs[Slot::Large] = k;
    vs[Slot::SmallLeft] = g;
    vs[Slot::SmallRight] = f_small;
    xs[Slot::Large] = f_large;
    xs[Slot::SmallLeft] = h;
    xs[Slot::SmallRight] = j;
    res.record.shift_sum_a = h.branch;
    res.record.shift_sum_b = j.branch;
  }
  return res;
}

// Carried-measure transport along a shift; identity except on the shifted
// branch.  Bijective between the two switch-condition cones.
inline WeightVector shift_pushforward(const MoveRecord& rec, const WeightVector& mu) {
  WeightVector out = mu;
  out[rec.shift_branch - 1] = mu[rec.shift_sum_a - 1] + mu[rec.shift_sum_b - 1];
  return out;
}

inline std::vector<Int> shift_pushforward_int(const MoveRecord& rec, const std::vector<Int>& mu) {
  std::vector<Int> out = mu;
  out[rec.shift_branch - 1] = mu[rec.shift_sum_a - 1] + mu[rec.shift_sum_b - 1];
  return out;
}

struct FullSplitResult {
  Track track;
  IntMatrix carry;
  MoveRecord record;
};

// One split at every large branch.  Splits at different large branches touch
// disjoint switches, so the result and the matrix do not depend on the
// processing order; we fix ascending branch number.
inline FullSplitResult full_split(const Track& t,
                                  const std::map<int, SplitDirection>& choices) {
  auto larges = large_branches(t);
  detail::require(choices.size() == larges.size(),
                  "full_split: choices must cover exactly the large branches");
  for (int e : larges)
    detail::require(choices.count(e) == 1, "full_split: missing choice for a large branch");

  FullSplitResult res;
  res.track = t;
  res.carry = IntMatrix::identity(t.num_branches());
  res.record.kind = MoveRecord::Kind::FullSplit;
  for (int e : larges) {
    SplitResult step = split(res.track, e, choices.at(e));
    res.track = std::move(step.track);
    res.carry = res.carry * step.carry;
    res.record.locations.push_back(e);
    res.record.directions.push_back(choices.at(e));
  }
  return res;
}

// Direction selected by a carried measure at a large branch: the one whose
// post-split weights stay nonnegative; ties break Right.
inline SplitDirection compatible_direction(const Track& t, const WeightVector& mu, int e) {
  if (!check_switch_conditions(t, mu))
    throw InvalidMeasureError("compatible_direction: switch conditions fail");
  for (const auto& q : mu)
    if (q < 0) throw InvalidMeasureError("compatible_direction: negative weight");
  Locator loc = build_locator(t);
  detail::require(branch_class(loc, e) == BranchClass::Large,
                  "compatible_direction: branch is not large");
  const HalfLoc& lu = loc.of(e, 0);
  const HalfLoc& lw = loc.of(e, 1);
  Rat diag_right = mu[e - 1] - mu[t.switches[lu.sw][Slot::SmallLeft].branch - 1] -
                   mu[t.switches[lw.sw][Slot::SmallLeft].branch - 1];
  return diag_right >= 0 ? SplitDirection::Right : SplitDirection::Left;
}

inline SplitDirection compatible_direction_int(const Track& t, const Locator& loc,
                                               const std::vector<Int>& mu, int e) {
  const HalfLoc& lu = loc.of(e, 0);
  const HalfLoc& lw = loc.of(e, 1);
  Int diag_right = mu[e - 1] - mu[t.switches[lu.sw][Slot::SmallLeft].branch - 1] -
                   mu[t.switches[lw.sw][Slot::SmallLeft].branch - 1];
  return diag_right >= 0 ? SplitDirection::Right : SplitDirection::Left;
}

// Tangential measures ride the transposed carrying map onto the split track.
inline TangentialVector tangential_pushforward(const IntMatrix& carry,
                                               const TangentialVector& nu) {
  if (carry.n != nu.size()) throw InvalidMeasureError("tangential_pushforward: size mismatch");
  return carry.transpose().apply(nu);
}

inline nlohmann::ordered_json move_record_to_json(const MoveRecord& rec) {
  nlohmann::ordered_json j;
  switch (rec.kind) {
    case MoveRecord::Kind::Shift: j["kind"] = "shift"; break;
    case MoveRecord::Kind::Split: j["kind"] = "split"; break;
    default: j["kind"] = "full_split";
  }
  j["locations"] = rec.locations;
  std::string dirs;
  for (auto d : rec.directions) dirs += to_string(d);
  j["directions"] = dirs;
  if (rec.kind == MoveRecord::Kind::Shift) {
    // the number bijection is the identity on branch numbers; the carried
    // weight transfer rewrites the shifted branch as a sum of two others
    j["weight_transfer"] = nlohmann::ordered_json{{"branch", rec.shift_branch},
                                                  {"sum_of", {rec.shift_sum_a, rec.shift_sum_b}}};
  }
  return j;
}

// Dense integer rows for external verification.
inline std::string matrix_to_csv(const IntMatrix& m) {
  std::string s;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      if (j) s += ",";
      s += m.at(i, j).get_str();
    }
    s += "\n";
  }
  return s;
}

}  // namespace trax

#endif
