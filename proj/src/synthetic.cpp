#include "schoolchoice/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "schoolchoice/matching.hpp"

namespace schoolchoice {

namespace {

constexpr double kOriginLat = 42.30;
constexpr double kOriginLon = -71.08;
constexpr double kMilesPerDegreeLat = 69.09;

LatLon offset_miles(double north, double east) {
  const double lat = kOriginLat + north / kMilesPerDegreeLat;
  const double lon = kOriginLon + east / (kMilesPerDegreeLat * std::cos(kOriginLat * M_PI / 180.0));
  return {lat, lon};
}

const char* const kLanguages[] = {"spanish", "chinese", "vietnamese", "haitian"};

std::string school_id(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", k + 1);
  return buf;
}

int draw_list_length(double mean, Rng& rng) {
  if (mean <= 0.0) return kMaxRankedChoices;
  if (mean <= 1.0) return 1;
  return 1 + std::poisson_distribution<int>(mean - 1.0)(rng);
}

}  // namespace

void SyntheticConfig::validate() const {
  int total = 0;
  for (int n : students_per_grade) {
    if (n < 0) throw UsageError("synthetic student counts must be non-negative");
    total += n;
  }
  if (total <= 0) throw UsageError("synthetic config needs at least one student");
  if (n_schools < 2) throw UsageError("synthetic config needs at least two schools");
  if (programs_per_school < 1) throw UsageError("programs_per_school must be positive");
  if (!(capacity_ratio >= 0.0)) throw UsageError("capacity_ratio must be non-negative");
  if (!(city_miles > 0.0)) throw UsageError("city_miles must be positive");
  if (!(school_spread >= 0.0)) throw UsageError("school_spread must be non-negative");
  if (ell_share < 0.0 || ell_share > 1.0 || sibling_share < 0.0 || sibling_share > 1.0)
    throw UsageError("ell_share and sibling_share must lie in [0, 1]");
  const FeatureSpec s = feature_spec(spec);
  if (logit && logit->beta.size() != static_cast<Eigen::Index>(s.fixed.size()))
    throw UsageError("true beta has " + std::to_string(logit->beta.size()) + " entries; spec " +
                     spec + " has " + std::to_string(s.fixed.size()) + " fixed features");
  if (logit && logit->alpha.size() != 0 && logit->alpha.size() != n_schools - 1)
    throw UsageError("true alpha must have n_schools - 1 entries");
  if (mixed) {
    if (s.random.empty()) throw UsageError("mixed true parameters need a spec with random features");
    const auto g = static_cast<Eigen::Index>(s.random.size());
    if (mixed->beta.size() != static_cast<Eigen::Index>(s.fixed.size()) || mixed->b.size() != g ||
        mixed->W.rows() != g || mixed->W.cols() != g)
      throw UsageError("mixed true parameters do not match spec " + spec);
    if (mixed->alpha.size() != 0 && mixed->alpha.size() != n_schools - 1)
      throw UsageError("true alpha must have n_schools - 1 entries");
    if (!is_spd(mixed->W) && !mixed->W.isZero()) throw UsageError("true W must be positive definite");
  }
}

Eigen::VectorXd default_beta(const FeatureSpec& spec) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.fixed.size()));
  const std::pair<const char*, double> known[] = {
      {"distance", -0.365},         {"continuing", 4.027},
      {"sibling", 2.104},           {"ell match", 1.548},
      {"ell language match", 0.606}, {"walk zone", 0.5},
      {"distance*black/hispanic", 0.115}, {"distance*income est.", -0.262},
      {"mcas*black", -0.874},       {"mcas*income est.", 0.424},
      {"% white/asian*black/hispanic", -2.581}, {"% white/asian*income est.", 1.982}};
  for (const auto& [name, value] : known) {
    const int k = spec.fixed_index(name);
    if (k >= 0) beta[k] = value;
  }
  return beta;
}

MixedLogitParams default_mixed(const FeatureSpec& spec, int n_schools) {
  MixedLogitParams p;
  p.beta = default_beta(spec);
  const auto g = static_cast<Eigen::Index>(spec.random.size());
  p.b = Eigen::VectorXd::Zero(g);
  p.W = Eigen::MatrixXd::Zero(g, g);
  const auto names = spec.random_names();
  for (Eigen::Index k = 0; k < g; ++k) {
    const auto& n = names[static_cast<std::size_t>(k)];
    if (n == "ell match") p.b[k] = 1.5, p.W(k, k) = 0.5;
    else if (n == "walk zone") p.b[k] = 0.5, p.W(k, k) = 0.3;
    else if (n == "distance") p.b[k] = -0.4, p.W(k, k) = 0.04;
    else if (n == "mcas") p.b[k] = 0.5, p.W(k, k) = 0.25;
    else if (n == "% white/asian") p.b[k] = 0.5, p.W(k, k) = 0.25;
    else p.W(k, k) = 0.1;
  }
  p.alpha = Eigen::VectorXd::Zero(n_schools - 1);
  return p;
}

SyntheticWorld make_world(const SyntheticConfig& config) {
  config.validate();
  Rng rng = make_rng(config.geography_seed, "geography");
  SyntheticWorld w;
  w.spec = feature_spec(config.spec);

  // 4 x 4 grid without two corners, jittered.
  const double cell = config.city_miles / 4.0;
  w.scatter_miles = 0.35 * cell;
  int n = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      if ((r == 0 && c == 3) || (r == 3 && c == 0)) continue;
      const double north = (r + 0.5) * cell + (uniform01(rng) - 0.5) * 0.5 * cell;
      const double east = (c + 0.5) * cell + (uniform01(rng) - 0.5) * 0.5 * cell;
      w.centers[static_cast<std::size_t>(n)] = offset_miles(north, east);
      w.weight[static_cast<std::size_t>(n)] = 0.5 + uniform01(rng);
      w.minority_share[static_cast<std::size_t>(n)] = 0.2 + 0.6 * uniform01(rng);
      w.income_mean[static_cast<std::size_t>(n)] = 0.3 + 0.9 * uniform01(rng);
      ++n;
    }
  const double wsum = std::accumulate(w.weight.begin(), w.weight.end(), 0.0);
  for (double& x : w.weight) x /= wsum;

  std::vector<int> tiers(static_cast<std::size_t>(config.n_schools));
  for (int k = 0; k < config.n_schools; ++k) tiers[static_cast<std::size_t>(k)] = 1 + k % kNumTiers;
  std::shuffle(tiers.begin(), tiers.end(), rng);

  std::vector<LatLon> sites;
  std::vector<ProgramOption> programs;
  for (int k = 0; k < config.n_schools; ++k) {
    const double span = config.city_miles * config.school_spread;
    const double north = config.city_miles / 2 + (uniform01(rng) - 0.5) * span;
    const double east = config.city_miles / 2 + (uniform01(rng) - 0.5) * span;
    const LatLon site = offset_miles(north, east);
    sites.push_back(site);
    const int tier = tiers[static_cast<std::size_t>(k)];
    const double mcas = std::clamp(0.8 - 0.12 * (tier - 1) + 0.05 * standard_normal(rng), 0.05, 0.95);
    const double white_asian = 0.1 + 0.6 * uniform01(rng);
    for (int p = 0; p < config.programs_per_school; ++p) {
      ProgramOption o;
      o.id = school_id(k) + "-" + std::to_string(p + 1);
      o.school = school_id(k);
      o.tier = tier;
      o.location = site;
      o.mcas_share = std::clamp(mcas + (p == 0 ? 0.0 : 0.1 * standard_normal(rng)), 0.0, 1.0);
      o.pct_white_asian = std::clamp(white_asian + (p == 0 ? 0.0 : 0.1 * standard_normal(rng)), 0.0, 1.0);
      if (p == 1 && k % 2 == 0) {
        o.is_ell_program = true;
        o.ell_language = kLanguages[(k / 2) % 4];
      }
      programs.push_back(o);
      w.seat_weight.push_back(0.6 + 0.8 * uniform01(rng));
    }
  }
  double spread = 0.0;
  for (std::size_t a = 0; a < sites.size(); ++a)
    for (std::size_t b = a + 1; b < sites.size(); ++b) spread = std::max(spread, haversine_miles(sites[a], sites[b]));
  if (spread < 0.05)
    throw UsageError("degenerate synthetic geography: all schools are co-located");

  const int k2 = config.students_per_grade[2] > 0 ? config.students_per_grade[2]
                                                  : *std::max_element(config.students_per_grade.begin(),
                                                                      config.students_per_grade.end());
  w.programs = ProgramTable(programs);
  {
    auto progs = w.programs.programs();
    for (std::size_t j = 0; j < progs.size(); ++j)
      progs[j].capacity = grade_capacity(w, j, k2, config.capacity_ratio);
    w.programs = ProgramTable(std::move(progs));
  }

  const int n_schools = static_cast<int>(w.programs.num_schools());
  Eigen::VectorXd alpha(n_schools - 1);
  for (int k = 0; k + 1 < n_schools; ++k) alpha[k] = 0.5 * standard_normal(rng);
  if (config.mixed) {
    w.mixed = *config.mixed;
    if (w.mixed->alpha.size() == 0) w.mixed->alpha = alpha;
    w.logit = w.mixed->fixed_part();
  } else if (config.logit) {
    w.logit = *config.logit;
    if (w.logit.alpha.size() == 0) w.logit.alpha = alpha;
  } else if (!w.spec.random.empty()) {
    w.mixed = default_mixed(w.spec, n_schools);
    w.mixed->alpha = alpha;
    w.logit = w.mixed->fixed_part();
  } else {
    w.logit = {default_beta(w.spec), alpha};
  }
  return w;
}

int grade_capacity(const SyntheticWorld& world, std::size_t program, int applicants, double ratio) {
  const double total = std::accumulate(world.seat_weight.begin(), world.seat_weight.end(), 0.0);
  const double seats = ratio * applicants * world.seat_weight[program] / total;
  return std::max(0, static_cast<int>(std::lround(seats)));
}

namespace {

Student draw_student(const SyntheticWorld& w, const SyntheticConfig& config, const std::string& id,
                     Grade grade, const DistanceModel& distance, Rng& rng) {
  Student s;
  s.id = id;
  s.grade = grade;
  std::discrete_distribution<int> pick(w.weight.begin(), w.weight.end());
  s.neighborhood = pick(rng);
  const LatLon c = w.centers[static_cast<std::size_t>(s.neighborhood)];
  const double scale = w.scatter_miles / kMilesPerDegreeLat;
  s.home = {c.lat + scale * standard_normal(rng),
            c.lon + scale * standard_normal(rng) / std::cos(kOriginLat * M_PI / 180.0)};
  s.geocode = "G-" + id;
  const double u = uniform01(rng);
  const double minority = w.minority_share[static_cast<std::size_t>(s.neighborhood)];
  if (u < minority / 2) s.race = Race::Black;
  else if (u < minority) s.race = Race::Hispanic;
  else {
    const double v = (u - minority) / (1.0 - minority);
    s.race = v < 0.6 ? Race::White : v < 0.85 ? Race::Asian : v < 0.95 ? Race::Other : Race::Unknown;
  }
  s.income = w.income_mean[static_cast<std::size_t>(s.neighborhood)] * std::exp(0.4 * standard_normal(rng) - 0.08);
  s.is_ell = uniform01(rng) < config.ell_share;
  if (s.is_ell)
    s.ell_language = s.race == Race::Hispanic ? "spanish" : kLanguages[1 + static_cast<int>(uniform01(rng) * 3) % 3];
  if (uniform01(rng) < config.sibling_share) {
    const auto& programs = w.programs;
    std::vector<std::pair<double, int>> near;
    for (std::size_t k = 0; k < programs.num_schools(); ++k)
      near.emplace_back(distance(s, programs[programs.programs_of_school(k).front()]), static_cast<int>(k));
    std::sort(near.begin(), near.end());
    const int pick_k = static_cast<int>(uniform01(rng) * std::min<std::size_t>(4, near.size()));
    s.sibling_schools.insert(programs.schools()[static_cast<std::size_t>(near[static_cast<std::size_t>(pick_k)].second)]);
  }
  return s;
}

void assign_by_grade(Dataset& d, const SyntheticWorld& w, const SyntheticConfig& config) {
  d.assignments.assign(d.students.size(), std::nullopt);
  for (Grade g : {Grade::K0, Grade::K1, Grade::K2}) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < d.students.size(); ++i)
      if (d.students[i].grade == g) idx.push_back(static_cast<int>(i));
    if (idx.empty()) continue;
    std::vector<Student> students;
    std::vector<std::vector<int>> rankings;
    for (int i : idx) {
      students.push_back(d.students[static_cast<std::size_t>(i)]);
      rankings.push_back(d.rankings[static_cast<std::size_t>(i)]);
    }
    std::vector<int> cap(w.programs.size());
    const int n = config.students_per_grade[static_cast<std::size_t>(g)];
    for (std::size_t j = 0; j < cap.size(); ++j)
      cap[j] = grade_capacity(w, j, n > 0 ? n : static_cast<int>(idx.size()), config.capacity_ratio);
    const Matching m = deferred_acceptance(make_market(students, rankings, w.programs, cap));
    for (std::size_t k = 0; k < idx.size(); ++k)
      if (m.student_program[k] >= 0) d.assignments[static_cast<std::size_t>(idx[k])] = m.student_program[k];
  }
}

Dataset make_year(const SyntheticWorld& w, const SyntheticConfig& config, const std::string& year,
                  std::vector<Student> students, std::uint64_t year_index) {
  Dataset d;
  d.year = year;
  d.programs = w.programs;
  d.distance = DistanceModel(true);
  Rng lottery = make_rng(config.seed, "lottery", year_index);
  for (auto& s : students) s.lottery = uniform01(lottery);
  Rng pref = make_rng(config.seed, "preferences", year_index);
  d.rankings = draw_true_rankings(w, config, students, d.distance, pref);
  d.students = std::move(students);
  if (config.assign) assign_by_grade(d, w, config);
  return d;
}

std::vector<Student> new_applicants(const SyntheticWorld& w, const SyntheticConfig& config,
                                    const std::string& year, const std::array<int, 3>& counts,
                                    const DistanceModel& distance, Rng& rng) {
  std::vector<Student> out;
  int serial = 0;
  for (Grade g : {Grade::K0, Grade::K1, Grade::K2})
    for (int k = 0; k < counts[static_cast<std::size_t>(g)]; ++k) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%05d", year.c_str(), ++serial);
      out.push_back(draw_student(w, config, buf, g, distance, rng));
    }
  return out;
}

}  // namespace

std::vector<std::vector<int>> draw_true_rankings(const SyntheticWorld& w, const SyntheticConfig& config,
                                                 const std::vector<Student>& students,
                                                 const DistanceModel& distance, Rng& rng) {
  std::vector<std::vector<int>> out;
  out.reserve(students.size());
  const MatrixXd factor = w.mixed ? covariance_factor(w.mixed->W) : MatrixXd();
  for (const auto& s : students) {
    const ChoiceMenu menu = build_menu(s, w.programs, config.policy, distance);
    auto r = w.mixed ? simulate_ranking_mixed(*w.mixed, factor, w.spec, s, menu, w.programs, distance, rng)
                     : simulate_ranking(w.logit, w.spec, s, menu, w.programs, distance, rng);
    const int len = draw_list_length(config.mean_choices, rng);
    if (static_cast<int>(r.size()) > len) r.resize(static_cast<std::size_t>(len));
    out.push_back(std::move(r));
  }
  return out;
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  const SyntheticWorld w = make_world(config);
  Rng rng = make_rng(config.seed, "population");
  const DistanceModel distance(true);
  auto students = new_applicants(w, config, config.year, config.students_per_grade, distance, rng);
  return make_year(w, config, config.year, std::move(students), 0);
}

std::vector<Dataset> generate_history(const SyntheticConfig& config, const HistoryConfig& history) {
  if (history.n_years < 1) throw UsageError("history needs at least one year");
  if (!config.assign) throw UsageError("history generation needs assignments");
  const SyntheticWorld w = make_world(config);
  const DistanceModel distance(true);
  std::vector<Dataset> years;
  for (int t = 0; t < history.n_years; ++t) {
    const std::string year = std::to_string(history.first_year + t);
    Rng rng = make_rng(config.seed, "population", static_cast<std::uint64_t>(t));
    std::array<int, 3> counts{};
    for (std::size_t g = 0; g < 3; ++g) {
      const double mean = config.students_per_grade[g] * std::pow(1.0 + history.growth, t);
      counts[g] = std::max(0, static_cast<int>(std::lround(mean * (1.0 + history.count_noise * standard_normal(rng)))));
    }
    auto students = new_applicants(w, config, year, counts, distance, rng);
    if (t > 0) {
      const Dataset& prev = years.back();
      for (std::size_t i = 0; i < prev.students.size(); ++i) {
        const Student& s = prev.students[i];
        if (s.grade == Grade::K2 || !prev.assignments[i]) continue;
        const auto next = static_cast<Grade>(static_cast<int>(s.grade) + 1);
        if (uniform01(rng) >= history.continue_rate[static_cast<std::size_t>(next)]) continue;
        Student c = s;
        c.grade = next;
        c.continuing_program = prev.programs[static_cast<std::size_t>(*prev.assignments[i])].id;
        students.push_back(std::move(c));
      }
    }
    years.push_back(make_year(w, config, year, std::move(students), static_cast<std::uint64_t>(t)));
  }
  return years;
}

}  // namespace schoolchoice
