#ifndef TRAX_SEEDS_HPP
#define TRAX_SEEDS_HPP

#include <string>

#include "trax/track.hpp"
#include "trax/track_io.hpp"

namespace trax {

// Built-in seed tracks, shipped as data.  Both are complete, in canonical
// storage form, and every large branch lies on a twist connector; the test
// suite re-checks all of that.  data/ holds the same tracks as files.

inline const char* kSeedG0M5 = R"json({"surface":{"g":0,"m":5},"branches":[{"num":1},{"num":2},{"num":3},{"num":4},{"num":5},{"num":6},{"num":7},{"num":8},{"num":9},{"num":10},{"num":11},{"num":12}],"switches":[{"large":{"branch":1,"end":0},"small_left":{"branch":2,"end":0},"small_right":{"branch":3,"end":0}},{"large":{"branch":1,"end":1},"small_left":{"branch":2,"end":1},"small_right":{"branch":4,"end":0}},{"large":{"branch":3,"end":1},"small_left":{"branch":5,"end":0},"small_right":{"branch":5,"end":1}},{"large":{"branch":6,"end":0},"small_left":{"branch":4,"end":1},"small_right":{"branch":7,"end":0}},{"large":{"branch":8,"end":0},"small_left":{"branch":6,"end":1},"small_right":{"branch":9,"end":0}},{"large":{"branch":7,"end":1},"small_left":{"branch":10,"end":0},"small_right":{"branch":10,"end":1}},{"large":{"branch":8,"end":1},"small_left":{"branch":11,"end":0},"small_right":{"branch":9,"end":1}},{"large":{"branch":11,"end":1},"small_left":{"branch":12,"end":0},"small_right":{"branch":12,"end":1}}]})json";

inline const char* kSeedG2M0 = R"json({"surface":{"g":2,"m":0},"branches":[{"num":1},{"num":2},{"num":3},{"num":4},{"num":5},{"num":6},{"num":7},{"num":8},{"num":9},{"num":10},{"num":11},{"num":12},{"num":13},{"num":14},{"num":15},{"num":16},{"num":17},{"num":18}],"switches":[{"large":{"branch":1,"end":0},"small_left":{"branch":2,"end":0},"small_right":{"branch":3,"end":0}},{"large":{"branch":1,"end":1},"small_left":{"branch":4,"end":0},"small_right":{"branch":3,"end":1}},{"large":{"branch":2,"end":1},"small_left":{"branch":5,"end":0},"small_right":{"branch":6,"end":0}},{"large":{"branch":4,"end":1},"small_left":{"branch":6,"end":1},"small_right":{"branch":7,"end":0}},{"large":{"branch":8,"end":0},"small_left":{"branch":5,"end":1},"small_right":{"branch":7,"end":1}},{"large":{"branch":9,"end":0},"small_left":{"branch":10,"end":0},"small_right":{"branch":8,"end":1}},{"large":{"branch":9,"end":1},"small_left":{"branch":10,"end":1},"small_right":{"branch":11,"end":0}},{"large":{"branch":11,"end":1},"small_left":{"branch":12,"end":0},"small_right":{"branch":13,"end":0}},{"large":{"branch":14,"end":0},"small_left":{"branch":12,"end":1},"small_right":{"branch":15,"end":0}},{"large":{"branch":16,"end":0},"small_left":{"branch":15,"end":1},"small_right":{"branch":13,"end":1}},{"large":{"branch":17,"end":0},"small_left":{"branch":14,"end":1},"small_right":{"branch":18,"end":0}},{"large":{"branch":17,"end":1},"small_left":{"branch":16,"end":1},"small_right":{"branch":18,"end":1}}]})json";

inline Track seed_track(const Surface& surf) {
  if (surf.genus == 0 && surf.punctures == 5) return track_from_text(kSeedG0M5);
  if (surf.genus == 2 && surf.punctures == 0) return track_from_text(kSeedG2M0);
  throw UnsupportedError("no builtin seed for surface (" + std::to_string(surf.genus) + "," +
                         std::to_string(surf.punctures) + ")");
}

inline Track seed_track_by_id(const std::string& id) {
  if (id == "g0m5") return track_from_text(kSeedG0M5);
  if (id == "g2m0") return track_from_text(kSeedG2M0);
  throw UnsupportedError("unknown builtin seed id: " + id);
}

}  // namespace trax

#endif
