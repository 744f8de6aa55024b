#pragma once

#include <map>
#include <string>
#include <utility>

#include "schoolchoice/types.hpp"

namespace schoolchoice {

inline constexpr double kEarthRadiusMiles = 3958.8;
inline constexpr double kWalkZoneMiles = 1.0;

double haversine_miles(LatLon a, LatLon b);

// Student-to-school distances: a (geocode, school) matrix when loaded, with
// an optional great-circle fallback for missing entries.
class DistanceModel {
 public:
  DistanceModel() = default;
  explicit DistanceModel(bool haversine_fallback) : fallback_(haversine_fallback) {}

  void set_entry(const GeocodeId& geocode, const SchoolId& school, double miles);
  bool has_matrix() const { return !matrix_.empty(); }
  bool fallback_enabled() const { return fallback_; }
  const std::map<std::pair<GeocodeId, SchoolId>, double>& entries() const { return matrix_; }

  // Throws DataError when the entry is missing and fallback is disabled.
  double operator()(const Student& s, const ProgramOption& p) const;

  static DistanceModel load_csv(const std::string& path, bool haversine_fallback);
  void save_csv(const std::string& path) const;

 private:
  std::map<std::pair<GeocodeId, SchoolId>, double> matrix_;
  bool fallback_ = true;
};

}  // namespace schoolchoice
