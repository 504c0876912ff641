#pragma once

#include <string>

#include "harm/law.hpp"

namespace harm::testing {

/// One level; marginal strata (0.1, 0.3, 0.2, 0.4); A* = 1 only for strata 1 and 3.
inline FullLaw law_e1() {
  FullLevel lv;
  lv.label = "l0";
  lv.p_level = 1.0;
  lv.p_trial = 0.5;
  lv.p_treat = 0.5;
  lv.p_astar = 0.3;
  lv.strata[1] << 1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0;
  lv.strata[0] << 0.0, 3.0 / 7.0, 0.0, 4.0 / 7.0;
  FullLaw law;
  law.levels.push_back(lv);
  return validate_full_law(law);
}

/// Same strata in both intention groups.
inline FullLaw single_level(const Strata& strata, double p_astar = 0.4, double p_treat = 0.5) {
  FullLevel lv;
  lv.label = "l0";
  lv.p_level = 1.0;
  lv.p_trial = 0.5;
  lv.p_treat = p_treat;
  lv.p_astar = p_astar;
  lv.strata = {strata, strata};
  FullLaw law;
  law.levels.push_back(lv);
  return validate_full_law(law);
}

inline std::string data_path(const std::string& name) { return std::string(HARM_DATA_DIR) + "/" + name; }

}  // namespace harm::testing
