#pragma once

#include <string_view>

#include "sklarsomega/sklarsomega.hpp"

namespace fixtures {

// Four coders, twelve units, nominal codes 1..5 (unit 12 has a single score).
inline constexpr std::string_view kReliability =
    "c.1.1,c.2.1,c.3.1,c.4.1\n"
    "1,1,NA,1\n"
    "2,2,3,2\n"
    "3,3,3,3\n"
    "3,3,3,3\n"
    "2,2,2,2\n"
    "1,2,3,4\n"
    "4,4,4,4\n"
    "1,1,2,1\n"
    "2,2,2,2\n"
    "NA,5,5,5\n"
    "NA,NA,1,1\n"
    "NA,3,NA,NA\n";

inline sklarsomega::AgreementData reliability() {
  return sklarsomega::parse_csv(kReliability, sklarsomega::Level::nominal);
}

inline sklarsomega::Fit reliability_dt_fit() {
  sklarsomega::FitOptions o;
  o.model.method = sklarsomega::Method::DT;
  return sklarsomega::fit(reliability(), o);
}

}  // namespace fixtures
