#ifndef TRAX_TRACK_IO_HPP
#define TRAX_TRACK_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "trax/track.hpp"

namespace trax {

using ordered_json = nlohmann::ordered_json;

inline ordered_json half_to_json(const Half& h) {
  return ordered_json{{"branch", h.branch}, {"end", h.end}};
}

inline Half half_from_json(const ordered_json& j) {
  Half h;
  h.branch = j.at("branch").get<int>();
  h.end = j.at("end").get<int>();
  return h;
}

inline ordered_json track_to_json(const Track& t) {
  ordered_json j;
  j["surface"] = ordered_json{{"g", t.surface.genus}, {"m", t.surface.punctures}};
  j["branches"] = ordered_json::array();
  for (int n : t.branch_nums) j["branches"].push_back(ordered_json{{"num", n}});
  j["switches"] = ordered_json::array();
  for (const auto& sw : t.switches)
    j["switches"].push_back(ordered_json{{"large", half_to_json(sw.large())},
                                         {"small_left", half_to_json(sw.small_left())},
                                         {"small_right", half_to_json(sw.small_right())}});
  return j;
}

inline Track track_from_json(const ordered_json& j) {
  Track t;
  try {
    t.surface = Surface(j.at("surface").at("g").get<int>(), j.at("surface").at("m").get<int>());
    for (const auto& bj : j.at("branches")) t.branch_nums.push_back(bj.at("num").get<int>());
    for (const auto& sj : j.at("switches")) {
      Switch sw;
      sw[Slot::Large] = half_from_json(sj.at("large"));
      sw[Slot::SmallLeft] = half_from_json(sj.at("small_left"));
      sw[Slot::SmallRight] = half_from_json(sj.at("small_right"));
      t.switches.push_back(sw);
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(std::string("track json: ") + e.what());
  }
  return t;
}

// Canonical emission: two-space indent, fixed key order.  save(load(x)) == x
// for files produced here.
inline std::string track_to_text(const Track& t) { return track_to_json(t).dump(2) + "\n"; }

inline Track track_from_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(std::string("json parse: ") + e.what());
  }
  return track_from_json(j);
}

inline Track load_track(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return track_from_text(ss.str());
}

inline void save_track(const Track& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << track_to_text(t);
}

}  // namespace trax

#endif
