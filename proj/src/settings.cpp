#include "schoolchoice/settings.hpp"

#include "schoolchoice/csv.hpp"

namespace schoolchoice {

namespace {

int to_int(const Config& c, const std::string& key, int fallback) {
  const long v = c.get_int(key, fallback);
  if (v < INT32_MIN || v > INT32_MAX) throw UsageError("config key " + key + ": out of range");
  return static_cast<int>(v);
}

std::vector<int> ints(const Config& c, const std::string& key) {
  std::vector<int> out;
  for (double d : c.get_doubles(key)) {
    if (d != static_cast<int>(d)) throw UsageError("config key " + key + ": expected integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

}  // namespace

MenuPolicy menu_policy_from(const Config& c) {
  MenuPolicy p;
  p.kind = parse_menu_policy(c.get_string("menu.policy", "home_based"));
  p.walk_radius_miles = c.get_double("menu.walk_radius", p.walk_radius_miles);
  if (p.walk_radius_miles < 0) throw UsageError("config key menu.walk_radius: must be >= 0");
  if (c.has("menu.closest")) {
    const auto k = ints(c, "menu.closest");
    if (k.size() != 3) throw UsageError("config key menu.closest: expected three counts (tiers <=1, <=2, <=3)");
    p.closest_by_tier = {{1, k[0]}, {2, k[1]}, {3, k[2]}};
  }
  p.option_schools = c.get_strings("menu.option_schools");
  p.closest_option_schools = to_int(c, "menu.closest_option_schools", p.closest_option_schools);

  if (c.has("menu.neighborhood_zones")) {
    const auto z = ints(c, "menu.neighborhood_zones");
    if (z.size() != static_cast<std::size_t>(kNumNeighborhoods))
      throw UsageError("config key menu.neighborhood_zones: expected 14 zones");
    for (int n = 0; n < kNumNeighborhoods; ++n) p.neighborhood_zone[n] = z[static_cast<std::size_t>(n)];
  }
  if (c.has("menu.school_zones_file")) {
    const std::string path = c.get_string("menu.school_zones_file", "");
    const auto t = csv::read(path);
    const int cs = t.require("school_id", path), cz = t.require("zone", path);
    for (const auto& row : t.rows) p.school_zone[row[cs]] = static_cast<int>(csv::parse_int(row[cz], "zone"));
  }
  for (const auto& s : c.get_strings("menu.citywide")) p.citywide_schools.insert(s);
  if (c.has("menu.custom_file")) {
    const std::string path = c.get_string("menu.custom_file", "");
    const auto t = csv::read(path);
    const int cs = t.require("student_id", path), cp = t.require("program_id", path);
    for (const auto& row : t.rows) p.custom_menus[row[cs]].push_back(row[cp]);
  }
  if (p.kind == MenuPolicyKind::ThreeZone && (p.neighborhood_zone.empty() || p.school_zone.empty()))
    throw UsageError("three_zone menus need menu.neighborhood_zones and menu.school_zones_file");
  if (p.kind == MenuPolicyKind::Custom && p.custom_menus.empty())
    throw UsageError("custom menus need menu.custom_file");
  return p;
}

SyntheticConfig synthetic_config_from(const Config& c) {
  SyntheticConfig s;
  s.year = c.get_string("synthetic.year", s.year);
  if (c.has("synthetic.students")) {
    const auto n = ints(c, "synthetic.students");
    if (n.size() != 3) throw UsageError("config key synthetic.students: expected [K0, K1, K2]");
    for (std::size_t g = 0; g < 3; ++g) s.students_per_grade[g] = n[g];
  }
  s.n_schools = to_int(c, "synthetic.schools", s.n_schools);
  s.programs_per_school = to_int(c, "synthetic.programs_per_school", s.programs_per_school);
  s.spec = c.get_string("synthetic.spec", s.spec);
  s.geography_seed = static_cast<std::uint64_t>(c.get_int("synthetic.geography_seed", static_cast<long>(s.geography_seed)));
  s.seed = static_cast<std::uint64_t>(c.get_int("run.seed", static_cast<long>(s.seed)));
  s.capacity_ratio = c.get_double("synthetic.capacity_ratio", s.capacity_ratio);
  s.city_miles = c.get_double("synthetic.city_miles", s.city_miles);
  s.school_spread = c.get_double("synthetic.school_spread", s.school_spread);
  s.ell_share = c.get_double("synthetic.ell_share", s.ell_share);
  s.sibling_share = c.get_double("synthetic.sibling_share", s.sibling_share);
  s.mean_choices = c.get_double("synthetic.mean_choices", s.mean_choices);
  s.policy = menu_policy_from(c);
  s.validate();
  return s;
}

HistoryConfig history_config_from(const Config& c) {
  HistoryConfig h;
  h.first_year = to_int(c, "history.first_year", h.first_year);
  h.n_years = to_int(c, "history.years", h.n_years);
  h.growth = c.get_double("history.growth", h.growth);
  h.count_noise = c.get_double("history.count_noise", h.count_noise);
  if (c.has("history.continue_rate")) {
    const auto r = c.get_doubles("history.continue_rate");
    if (r.size() != 3) throw UsageError("config key history.continue_rate: expected [K0, K1, K2]");
    for (std::size_t g = 0; g < 3; ++g) {
      if (r[g] < 0 || r[g] > 1) throw UsageError("config key history.continue_rate: rates must lie in [0, 1]");
      h.continue_rate[g] = r[g];
    }
  }
  if (h.n_years < 1) throw UsageError("config key history.years: must be >= 1");
  return h;
}

ChainConfig chain_config_from(const Config& c) {
  ChainConfig m;
  m.iterations = c.get_int("mcmc.iterations", m.iterations);
  m.burn_in = c.get_int("mcmc.burn_in", m.burn_in);
  m.thin = c.get_int("mcmc.thin", m.thin);
  m.seed = static_cast<std::uint64_t>(c.get_int("run.seed", static_cast<long>(m.seed)));
  m.tuning_growth = c.get_double("mcmc.tuning_growth", m.tuning_growth);
  m.tuning_growth_every = c.get_int("mcmc.tuning_growth_every", m.tuning_growth_every);
  m.validate();
  return m;
}

SimulationConfig simulation_config_from(const Config& c) {
  SimulationConfig s;
  s.n_simulations = to_int(c, "simulation.n", s.n_simulations);
  s.seed = static_cast<std::uint64_t>(c.get_int("run.seed", static_cast<long>(s.seed)));
  if (c.has("simulation.lottery_seed"))
    s.lottery_seed = static_cast<std::uint64_t>(c.get_int("simulation.lottery_seed", 0));
  if (c.has("simulation.grades")) {
    s.grades.clear();
    for (const auto& g : c.get_strings("simulation.grades")) {
      try {
        s.grades.push_back(parse_grade(g));
      } catch (const DataError&) {
        throw UsageError("config key simulation.grades: unknown grade '" + g + "'");
      }
    }
  }
  s.walk_zone_priority = c.get_bool("simulation.walk_zone_priority", s.walk_zone_priority);
  s.threads = to_int(c, "run.threads", s.threads);
  s.policy = menu_policy_from(c);
  s.validate();
  return s;
}

Reference reference_from(const Config& c) {
  return parse_reference(c.get_string("evaluation.reference", "leave_one_out"));
}

std::map<Grade, std::vector<int>> read_capacity_table(const std::string& path, const ProgramTable& programs) {
  const auto t = csv::read(path);
  const int cp = t.require("program_id", path), cg = t.require("grade", path), cc = t.require("capacity", path);
  std::map<Grade, std::vector<int>> out;
  std::vector<std::string> errors;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path + ":" + std::to_string(t.line_numbers[r]) + ": ";
    try {
      const int j = programs.find(row[cp]);
      if (j < 0) throw DataError("unknown program " + row[cp]);
      const Grade g = parse_grade(row[cg]);
      const long cap = csv::parse_int(row[cc], "capacity");
      if (cap < 0) throw DataError("negative capacity");
      auto& v = out[g];
      if (v.empty()) v.assign(programs.size(), 0);
      v[static_cast<std::size_t>(j)] = static_cast<int>(cap);
    } catch (const DataError& e) {
      errors.push_back(where + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = path + ": " + std::to_string(errors.size()) + " validation error(s)";
    for (const auto& e : errors) msg += "\n  " + e;
    throw DataError(msg);
  }
  return out;
}

void write_capacity_table(const std::string& path, const ProgramTable& programs,
                          const std::map<Grade, std::vector<int>>& capacity) {
  csv::Writer w(path);
  w.row({"program_id", "grade", "capacity"});
  for (const auto& [g, caps] : capacity)
    for (std::size_t j = 0; j < programs.size(); ++j)
      w.row({programs[j].id, std::string(to_string(g)), std::to_string(caps[j])});
}

}  // namespace schoolchoice
