#include "schoolchoice/geo.hpp"

#include <cmath>
#include <numbers>

#include "schoolchoice/csv.hpp"

namespace schoolchoice {

double haversine_miles(LatLon a, LatLon b) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * deg;
  const double dlon = (b.lon - a.lon) * deg;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(a.lat * deg) * std::cos(b.lat * deg) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

void DistanceModel::set_entry(const GeocodeId& geocode, const SchoolId& school, double miles) {
  if (!(miles >= 0.0) || !std::isfinite(miles))
    throw DataError("distance for (" + geocode + ", " + school + ") must be finite and >= 0");
  matrix_[{geocode, school}] = miles;
}

double DistanceModel::operator()(const Student& s, const ProgramOption& p) const {
  if (!matrix_.empty()) {
    auto it = matrix_.find({s.geocode, p.school});
    if (it != matrix_.end()) return it->second;
  }
  if (!fallback_)
    throw DataError("no distance entry for geocode " + s.geocode + " and school " + p.school +
                    " (haversine fallback disabled)");
  return haversine_miles(s.home, p.location);
}

DistanceModel DistanceModel::load_csv(const std::string& path, bool haversine_fallback) {
  DistanceModel dm(haversine_fallback);
  auto t = csv::read(path);
  const int g = t.require("geocode", path);
  const int s = t.require("school_id", path);
  const int m = t.require("miles", path);
  for (const auto& row : t.rows)
    dm.set_entry(row[g], row[s], csv::parse_double(row[m], "miles"));
  return dm;
}

void DistanceModel::save_csv(const std::string& path) const {
  csv::Writer w(path);
  w.row({"geocode", "school_id", "miles"});
  for (const auto& [key, miles] : matrix_)
    w.row({key.first, key.second, csv::format_double(miles)});
}

}  // namespace schoolchoice
