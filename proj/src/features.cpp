#include "schoolchoice/features.hpp"

#include "schoolchoice/geo.hpp"

namespace schoolchoice {

namespace {

struct AttributeName {
  Attribute a;
  std::string_view name;
};
constexpr AttributeName kAttributes[] = {
    {Attribute::Distance, "distance"},
    {Attribute::Continuing, "continuing"},
    {Attribute::Sibling, "sibling"},
    {Attribute::EllMatch, "ell match"},
    {Attribute::EllLanguageMatch, "ell language match"},
    {Attribute::WalkZone, "walk zone"},
    {Attribute::Mcas, "mcas"},
    {Attribute::PctWhiteAsian, "% white/asian"},
};

struct ModifierName {
  Modifier m;
  std::string_view name;
};
constexpr ModifierName kModifiers[] = {
    {Modifier::Income, "income est."}, {Modifier::Black, "black"},
    {Modifier::Hispanic, "hispanic"},  {Modifier::Asian, "asian"},
    {Modifier::Other, "other"},        {Modifier::Unknown, "unknown"},
    {Modifier::BlackHispanic, "black/hispanic"},
};

double attribute_value(Attribute a, const Student& s, const ProgramOption& p, double miles) {
  switch (a) {
    case Attribute::Distance: return miles;
    case Attribute::Continuing:
      return s.continuing_program && *s.continuing_program == p.id ? 1.0 : 0.0;
    case Attribute::Sibling: return s.sibling_schools.count(p.school) ? 1.0 : 0.0;
    case Attribute::EllMatch: return s.is_ell && p.is_ell_program ? 1.0 : 0.0;
    case Attribute::EllLanguageMatch:
      return s.is_ell && p.is_ell_program && !p.ell_language.empty() &&
                     p.ell_language == s.ell_language
                 ? 1.0
                 : 0.0;
    case Attribute::WalkZone: return miles <= kWalkZoneMiles ? 1.0 : 0.0;
    case Attribute::Mcas: return p.mcas_share;
    case Attribute::PctWhiteAsian: return p.pct_white_asian;
  }
  return 0.0;
}

double modifier_value(Modifier m, const Student& s) {
  switch (m) {
    case Modifier::None: return 1.0;
    case Modifier::Income: return s.income;
    case Modifier::Black: return s.race == Race::Black;
    case Modifier::Hispanic: return s.race == Race::Hispanic;
    case Modifier::Asian: return s.race == Race::Asian;
    case Modifier::Other: return s.race == Race::Other;
    case Modifier::Unknown: return s.race == Race::Unknown;
    case Modifier::BlackHispanic: return s.is_black_or_hispanic();
  }
  return 0.0;
}

std::vector<std::string> names_of(const std::vector<Feature>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(f.name());
  return out;
}

constexpr Feature F(Attribute a, Modifier m = Modifier::None) { return {a, m}; }

}  // namespace

std::string Feature::name() const {
  std::string out;
  for (const auto& an : kAttributes)
    if (an.a == attribute) out = an.name;
  if (modifier != Modifier::None)
    for (const auto& mn : kModifiers)
      if (mn.m == modifier) out += "*" + std::string(mn.name);
  return out;
}

Feature parse_feature(std::string_view name) {
  std::string_view attr = name;
  std::string_view mod;
  if (auto star = name.find('*'); star != std::string_view::npos) {
    attr = name.substr(0, star);
    mod = name.substr(star + 1);
  }
  Feature f;
  bool found = false;
  for (const auto& an : kAttributes)
    if (an.name == attr) {
      f.attribute = an.a;
      found = true;
    }
  if (!found) throw DataError("unknown feature '" + std::string(name) + "'");
  if (!mod.empty()) {
    found = false;
    for (const auto& mn : kModifiers)
      if (mn.name == mod) {
        f.modifier = mn.m;
        found = true;
      }
    if (!found) throw DataError("unknown feature modifier in '" + std::string(name) + "'");
  }
  return f;
}

double feature_value(const Feature& f, const Student& s, const ProgramOption& p, double miles) {
  return attribute_value(f.attribute, s, p, miles) * modifier_value(f.modifier, s);
}

std::vector<std::string> FeatureSpec::fixed_names() const { return names_of(fixed); }
std::vector<std::string> FeatureSpec::random_names() const { return names_of(random); }

int FeatureSpec::fixed_index(std::string_view feature_name) const {
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i].name() == feature_name) return static_cast<int>(i);
  return -1;
}

FeatureSpec feature_spec(std::string_view name) {
  using A = Attribute;
  using M = Modifier;
  const std::vector<Feature> simple = {F(A::Distance), F(A::Continuing),       F(A::Sibling),
                                       F(A::EllMatch), F(A::EllLanguageMatch), F(A::WalkZone)};
  if (name == "simple") return {"simple", simple, {}};
  if (name == "full") {
    FeatureSpec s{"full", simple, {}};
    for (M m : {M::Income, M::Black, M::Asian, M::Hispanic, M::Other, M::Unknown})
      for (A a : {A::Mcas, A::PctWhiteAsian, A::Distance}) s.fixed.push_back(F(a, m));
    return s;
  }
  const std::vector<Feature> interactions = {
      F(A::Distance, M::BlackHispanic),      F(A::Distance, M::Income),
      F(A::Mcas, M::Black),                  F(A::Mcas, M::Income),
      F(A::PctWhiteAsian, M::BlackHispanic), F(A::PctWhiteAsian, M::Income)};
  if (name == "reduced") {
    FeatureSpec s{"reduced", simple, {}};
    s.fixed.insert(s.fixed.end(), interactions.begin(), interactions.end());
    return s;
  }
  if (name == "mixed") {
    FeatureSpec s{"mixed", {F(A::Continuing), F(A::Sibling), F(A::EllLanguageMatch)}, {}};
    s.fixed.insert(s.fixed.end(), interactions.begin(), interactions.end());
    s.random = {F(A::EllMatch), F(A::WalkZone), F(A::Distance), F(A::Mcas), F(A::PctWhiteAsian)};
    return s;
  }
  throw UsageError("unknown feature specification '" + std::string(name) +
                   "' (expected simple, full, reduced or mixed)");
}

FeatureVectors extract_features(const FeatureSpec& spec, const Student& s, const ProgramOption& p,
                                double miles, int school_index) {
  FeatureVectors fv;
  fv.school_index = school_index;
  fv.fixed.resize(static_cast<Eigen::Index>(spec.fixed.size()));
  fv.random.resize(static_cast<Eigen::Index>(spec.random.size()));
  for (std::size_t k = 0; k < spec.fixed.size(); ++k)
    fv.fixed[static_cast<Eigen::Index>(k)] = feature_value(spec.fixed[k], s, p, miles);
  for (std::size_t k = 0; k < spec.random.size(); ++k)
    fv.random[static_cast<Eigen::Index>(k)] = feature_value(spec.random[k], s, p, miles);
  return fv;
}

}  // namespace schoolchoice
