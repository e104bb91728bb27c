#pragma once

#include <string>
#include <vector>

#include "bridgecp/model.hpp"

namespace fixture {

inline bridgecp::ChargeRecord rec(std::string id, int year, double age, int rep, int sev, int y) {
  bridgecp::ChargeRecord r;
  r.youth_id = std::move(id);
  r.year = year;
  r.age = age;
  r.repeat_offense = rep;
  r.severe = sev;
  r.outcome = y;
  return r;
}

// Five youths, twelve charges spread across the candidate years.
inline std::vector<bridgecp::ChargeRecord> toy_records() {
  return {rec("a", 1990, 13.2, 0, 1, 1), rec("a", 1993, 16.0, 1, 1, 0),
          rec("b", 1994, 14.8, 0, 0, 1), rec("b", 1995, 15.9, 1, 1, 1),
          rec("b", 1997, 17.4, 1, 0, 0), rec("c", 1992, 12.1, 0, 1, 1),
          rec("c", 1996, 16.3, 1, 1, 1), rec("d", 1999, 14.0, 0, 1, 0),
          rec("d", 2001, 16.2, 1, 1, 1), rec("d", 2003, 18.1, 1, 0, 1),
          rec("e", 1995, 15.0, 0, 1, 1), rec("e", 1996, 16.0, 1, 1, 0)};
}

inline bridgecp::Panel toy_panel() { return bridgecp::Panel(toy_records()); }

// Same youths and years with every outcome removed from the likelihood:
// the youths are kept through the extra-youth list only.
inline bridgecp::Panel empty_toy_panel() {
  bridgecp::PanelOptions opt;
  opt.strict = false;
  opt.design.age_center = 15.0;
  return bridgecp::Panel({}, opt, {"a", "b", "c", "d", "e"});
}

}  // namespace fixture
