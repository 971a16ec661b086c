#ifndef TRAX_SURFACE_HPP
#define TRAX_SURFACE_HPP

#include <string>

#include "trax/common.hpp"

namespace trax {

// Oriented surface of genus g with m punctures, 3g-3+m >= 2.
struct Surface {
  int genus = 0;
  int punctures = 0;

  Surface() = default;
  Surface(int g, int m) : genus(g), punctures(m) {
    if (g < 0 || m < 0 || complexity() < 2)
      throw UnsupportedError("surface (" + std::to_string(g) + "," + std::to_string(m) +
                             ") is exceptional: need 3g-3+m >= 2");
  }

  int complexity() const { return 3 * genus - 3 + punctures; }
  int dim() const { return 6 * genus - 6 + 2 * punctures; }
  int branches_expected() const { return 18 * genus - 18 + 6 * punctures; }
  int switches_expected() const { return 12 * genus - 12 + 4 * punctures; }
  int trigons_expected() const { return 4 * genus - 4 + punctures; }
  int euler_characteristic() const { return 2 - 2 * genus - punctures; }

  bool operator==(const Surface& o) const {
    return genus == o.genus && punctures == o.punctures;
  }
};

}  // namespace trax

#endif
