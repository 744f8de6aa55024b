#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "schoolchoice/types.hpp"

namespace schoolchoice {

// Student-program characteristic, optionally interacted with a student trait.
enum class Attribute { Distance, Continuing, Sibling, EllMatch, EllLanguageMatch, WalkZone, Mcas,
                       PctWhiteAsian };
enum class Modifier { None, Income, Black, Hispanic, Asian, Other, Unknown, BlackHispanic };

struct Feature {
  Attribute attribute = Attribute::Distance;
  Modifier modifier = Modifier::None;

  std::string name() const;  // e.g. "distance*income"
  friend bool operator==(const Feature&, const Feature&) = default;
};

Feature parse_feature(std::string_view name);

double feature_value(const Feature& f, const Student& s, const ProgramOption& p, double miles);

// Fixed features carry population-wide coefficients; random features carry
// per-student coefficients (empty for plain logit specifications).
struct FeatureSpec {
  std::string name;
  std::vector<Feature> fixed;
  std::vector<Feature> random;

  std::vector<std::string> fixed_names() const;
  std::vector<std::string> random_names() const;
  int fixed_index(std::string_view feature_name) const;  // -1 when absent
};

// Registry: "simple", "full", "reduced" (logit) and "mixed".
FeatureSpec feature_spec(std::string_view name);

// Component order of F_ij and G_ij for the mixed model:
//   F: continuing, sibling, ell language match, distance*black/hispanic,
//      distance*income, mcas*black, mcas*income, %white/asian*black/hispanic,
//      %white/asian*income
//   G: ell match, walk zone, distance, mcas, %white/asian
struct FeatureVectors {
  Eigen::VectorXd fixed;
  Eigen::VectorXd random;
  int school_index = 0;
};

FeatureVectors extract_features(const FeatureSpec& spec, const Student& s, const ProgramOption& p,
                                double miles, int school_index);

}  // namespace schoolchoice
