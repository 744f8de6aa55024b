#include "schoolchoice/types.hpp"

#include <cmath>

namespace schoolchoice {

namespace {
constexpr std::array<std::string_view, kNumNeighborhoods> kNeighborhoods = {
    "Allston-Brighton", "Charlestown",      "Downtown",    "East Boston",
    "Hyde Park",        "Jamaica Plain",    "Mattapan",    "North Dorchester",
    "Roslindale",       "Roxbury",          "South Boston", "South Dorchester",
    "South End",        "West Roxbury"};
}

std::string_view to_string(Grade g) {
  switch (g) {
    case Grade::K0: return "K0";
    case Grade::K1: return "K1";
    case Grade::K2: return "K2";
  }
  return "?";
}

std::string_view to_string(Race r) {
  switch (r) {
    case Race::Black: return "black";
    case Race::Hispanic: return "hispanic";
    case Race::White: return "white";
    case Race::Asian: return "asian";
    case Race::Other: return "other";
    case Race::Unknown: return "unknown";
  }
  return "unknown";
}

Grade parse_grade(std::string_view s) {
  if (s == "K0") return Grade::K0;
  if (s == "K1") return Grade::K1;
  if (s == "K2") return Grade::K2;
  throw DataError("unknown grade '" + std::string(s) + "'");
}

Race parse_race(std::string_view s) {
  for (Race r : {Race::Black, Race::Hispanic, Race::White, Race::Asian, Race::Other,
                 Race::Unknown}) {
    if (s == to_string(r)) return r;
  }
  throw DataError("unknown race '" + std::string(s) + "'");
}

std::string_view neighborhood_name(int id) {
  if (id < 0 || id >= kNumNeighborhoods) return "?";
  return kNeighborhoods[static_cast<std::size_t>(id)];
}

Priority priority_of(const Student& s, const ProgramOption& p) {
  // Walk-zone priority is intentionally absent.
  int level = 2;
  if (s.continuing_program && *s.continuing_program == p.id) {
    level = 0;
  } else if (s.sibling_schools.count(p.school) != 0) {
    level = 1;
  }
  return {level, s.lottery};
}

void validate(const Student& s) {
  if (!(s.lottery >= 0.0 && s.lottery <= 1.0))
    throw DataError("student " + s.id + ": lottery number outside [0,1]");
  if (!(s.income >= 0.0) || !std::isfinite(s.income))
    throw DataError("student " + s.id + ": income estimate must be finite and >= 0");
  if (s.neighborhood < 0 || s.neighborhood >= kNumNeighborhoods)
    throw DataError("student " + s.id + ": neighborhood out of range");
}

void validate(const ProgramOption& p) {
  if (p.capacity < 0) throw DataError("program " + p.id + ": negative capacity");
  if (!(p.mcas_share >= 0.0 && p.mcas_share <= 1.0))
    throw DataError("program " + p.id + ": mcas_share outside [0,1]");
  if (!(p.pct_white_asian >= 0.0 && p.pct_white_asian <= 1.0))
    throw DataError("program " + p.id + ": pct_white_asian outside [0,1]");
  if (p.tier < 1 || p.tier > kNumTiers)
    throw DataError("program " + p.id + ": tier must be in 1..4");
}

}  // namespace schoolchoice
