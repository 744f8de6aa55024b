#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "schoolchoice/csv.hpp"
#include "schoolchoice/dataset.hpp"
#include "schoolchoice/logit.hpp"
#include "schoolchoice/naive.hpp"
#include "schoolchoice/synthetic.hpp"
#include "support.hpp"

using namespace schoolchoice;
using testing::miles_to_lat;
using testing::program;
using testing::student;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// Independent reading of the Home-Based rule: schools within the walk
// radius, the closest 2/4/6 among tiers <=1/2/3, siblings and the
// continuing school, expanded to programs.
std::set<int> menu_oracle(const Student& s, const ProgramTable& t, const DistanceModel& dist) {
  std::map<SchoolId, double> d;
  std::map<SchoolId, int> tier;
  for (const auto& p : t.programs())
    if (!d.count(p.school)) d[p.school] = dist(s, p), tier[p.school] = p.tier;
  std::set<SchoolId> chosen;
  for (const auto& [sid, miles] : d)
    if (miles <= 1.0) chosen.insert(sid);
  for (auto [max_tier, k] : {std::pair{1, 2}, std::pair{2, 4}, std::pair{3, 6}}) {
    std::vector<std::pair<double, SchoolId>> c;
    for (const auto& [sid, miles] : d)
      if (tier[sid] <= max_tier) c.emplace_back(miles, sid);
    std::sort(c.begin(), c.end());
    for (int i = 0; i < k && i < static_cast<int>(c.size()); ++i) chosen.insert(c[static_cast<std::size_t>(i)].second);
  }
  for (const auto& sid : s.sibling_schools) chosen.insert(sid);
  if (s.continuing_program) chosen.insert(t.at(*s.continuing_program).school);
  std::set<int> out;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (chosen.count(t[j].school)) out.insert(static_cast<int>(j));
  return out;
}

std::vector<ProgramOption> random_programs(Rng& rng, int n_schools, int per_school) {
  std::vector<ProgramOption> out;
  for (int k = 0; k < n_schools; ++k) {
    const double lat = 42.30 + 0.08 * uniform01(rng);
    const double lon = -71.10 + 0.1 * uniform01(rng);
    const int tier = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int p = 0; p < per_school; ++p)
      out.push_back(program("P" + std::to_string(k) + "-" + std::to_string(p), "S" + std::to_string(k), tier, lat, lon));
  }
  return out;
}

}  // namespace

TEST_CASE("distance: identical points, matrix precedence, one degree of latitude") {
  const ProgramOption p = program("A-1", "A", 1, 42.3, -71.0);
  Student s = student("s", 42.3, -71.0);
  DistanceModel d(true);
  CHECK(d(s, p) == 0.0);
  d.set_entry(s.geocode, "A", 1.37);
  CHECK(d(s, p) == 1.37);
  const Student far = student("f", 43.3, -71.0);
  CHECK(std::abs(d(far, p) - 69.0) < 0.5);
  DistanceModel strict(false);
  CHECK_THROWS_AS(strict(far, p), DataError);
  Rng rng = make_rng(1, "dist");
  for (int t = 0; t < 100; ++t) {
    const LatLon a{42 + uniform01(rng), -71 + uniform01(rng)}, b{42 + uniform01(rng), -71 + uniform01(rng)};
    CHECK(haversine_miles(a, b) == doctest::Approx(haversine_miles(b, a)));
    CHECK(haversine_miles(a, b) >= 0.0);
  }
}

TEST_CASE("priority levels") {
  const ProgramOption p = program("A-1", "A", 1, 42.3, -71.0);
  Student s = student("s", 42.3, -71.0, 0.3);
  CHECK(priority_of(s, p).level == 2);
  s.sibling_schools.insert("A");
  CHECK(priority_of(s, p).level == 1);
  s.continuing_program = "A-1";
  CHECK(priority_of(s, p).level == 0);
  CHECK(priority_of(s, p).lottery == 0.3);
  CHECK(Priority{1, 0.9} < Priority{2, 0.1});
  CHECK(Priority{2, 0.1} < Priority{2, 0.2});
}

TEST_CASE("Home-Based menu examples") {
  const DistanceModel dist(true);
  MenuPolicy policy;
  SUBCASE("a student at a Tier 1 school gets it") {
    std::vector<ProgramOption> ps;
    for (int k = 0; k < 10; ++k)
      ps.push_back(program("P" + std::to_string(k), "S" + std::to_string(k), 1 + k % 4,
                           42.3 + miles_to_lat(0.3 * k), -71.0));
    const ProgramTable t(ps);
    const auto m = build_menu(student("s", 42.3 + miles_to_lat(2.7), -71.0), t, policy, dist);
    CHECK(m.contains(9));
  }
  SUBCASE("all Tier 1: the closest schools plus everything within a mile") {
    std::vector<ProgramOption> ps;
    for (int k = 0; k < 12; ++k)
      ps.push_back(program("P" + std::to_string(k), "S" + std::to_string(k), 1, 42.3 + miles_to_lat(0.5 * k), -71.0));
    const ProgramTable t(ps);
    const auto m = build_menu(student("s", 42.3, -71.0), t, policy, dist);
    // Closest-6 among tier <= 3 dominates; schools 0..2 are within a mile.
    CHECK(m.options == std::vector<int>{0, 1, 2, 3, 4, 5});
    MenuPolicy two = policy;
    two.closest_by_tier = {{1, 2}};
    const auto m2 = build_menu(student("s", 42.3 + miles_to_lat(10), -71.0), t, two, dist);
    CHECK(m2.options == std::vector<int>{10, 11});
  }
  SUBCASE("continuing and sibling schools are always included") {
    std::vector<ProgramOption> ps;
    for (int k = 0; k < 12; ++k)
      ps.push_back(program("P" + std::to_string(k), "S" + std::to_string(k), 1, 42.3 + miles_to_lat(2.0 * k), -71.0));
    const ProgramTable t(ps);
    Student s = student("s", 42.3, -71.0);
    s.continuing_program = "P11";
    s.sibling_schools.insert("S10");
    const auto m = build_menu(s, t, policy, dist);
    CHECK(m.contains(11));
    CHECK(m.contains(10));
  }
  SUBCASE("empty menu is an explicit error") {
    const ProgramTable t({program("P0", "S0", 4, 42.3 + miles_to_lat(5), -71.0)});
    MenuPolicy none = policy;
    none.closest_by_tier.clear();
    CHECK_THROWS_AS(build_menu(student("s", 42.3, -71.0), t, none, dist), EmptyMenuError);
  }
  CHECK_THROWS_AS(parse_menu_policy("lottery"), UsageError);
}

TEST_CASE("menus match a brute-force reconstruction on random 50-program instances") {
  Rng rng = make_rng(42, "menu-oracle");
  const DistanceModel dist(true);
  MenuPolicy policy;
  for (int t = 0; t < 50; ++t) {
    const ProgramTable table(random_programs(rng, 25, 2));
    for (int i = 0; i < 20; ++i) {
      Student s = student("s" + std::to_string(i), 42.30 + 0.08 * uniform01(rng), -71.10 + 0.1 * uniform01(rng));
      if (uniform01(rng) < 0.3) s.sibling_schools.insert("S" + std::to_string(i % 25));
      if (uniform01(rng) < 0.3) s.continuing_program = table[static_cast<std::size_t>(i)].id;
      const auto m = build_menu(s, table, policy, dist);
      const auto oracle = menu_oracle(s, table, dist);
      CHECK(std::set<int>(m.options.begin(), m.options.end()) == oracle);
      CHECK(std::is_sorted(m.options.begin(), m.options.end()));
    }
  }
}

TEST_CASE("three-zone and custom menus") {
  const DistanceModel dist(true);
  const ProgramTable t({program("A-1", "A", 1, 42.3, -71.0), program("B-1", "B", 2, 42.4, -71.0),
                        program("C-1", "C", 3, 42.5, -71.0)});
  MenuPolicy z;
  z.kind = MenuPolicyKind::ThreeZone;
  z.neighborhood_zone = {{0, 1}};
  z.school_zone = {{"A", 2}, {"B", 1}, {"C", 2}};
  z.citywide_schools = {"C"};
  Student s = student("s", 42.2, -71.0);
  CHECK(build_menu(s, t, z, dist).options == std::vector<int>{1, 2});
  MenuPolicy c;
  c.kind = MenuPolicyKind::Custom;
  c.custom_menus["s"] = {"C-1"};
  CHECK(build_menu(s, t, c, dist).options == std::vector<int>{2});
}

TEST_CASE("menu monotonicity when programs are added") {
  Rng rng = make_rng(77, "monotone");
  const DistanceModel dist(true);
  MenuPolicy zone;
  zone.kind = MenuPolicyKind::ThreeZone;
  for (int n = 0; n < kNumNeighborhoods; ++n) zone.neighborhood_zone[n] = n % 3;
  for (int trial = 0; trial < 100; ++trial) {
    auto base = random_programs(rng, 10, 1);
    auto grown = base;
    // New programs at existing schools.
    for (int k = 0; k < 10; ++k)
      if (uniform01(rng) < 0.5) {
        auto p = base[static_cast<std::size_t>(k)];
        p.id += "-extra";
        grown.push_back(p);
      }
    // New schools (zone policy only).
    auto grown_schools = base;
    for (int k = 0; k < 5; ++k) {
      auto extra = random_programs(rng, 1, 1)[0];
      extra.id = "N" + std::to_string(k);
      extra.school = "NS" + std::to_string(k);
      grown_schools.push_back(extra);
    }
    for (const auto& p : base) zone.school_zone[p.school] = std::uniform_int_distribution<int>(0, 2)(rng);
    zone.citywide_schools = {base[0].school};
    for (int k = 0; k < 5; ++k) zone.school_zone["NS" + std::to_string(k)] = k % 3;
    const ProgramTable tb(base), tg(grown), ts(grown_schools);
    for (int i = 0; i < 10; ++i) {
      Student s = student("s" + std::to_string(i), 42.30 + 0.08 * uniform01(rng), -71.10 + 0.1 * uniform01(rng));
      s.neighborhood = i % kNumNeighborhoods;
      auto ids = [](const ChoiceMenu& m, const ProgramTable& t) {
        std::set<ProgramId> out;
        for (int j : m.options) out.insert(t[static_cast<std::size_t>(j)].id);
        return out;
      };
      for (const MenuPolicy* pol : {static_cast<const MenuPolicy*>(&zone)}) {
        const auto before = ids(build_menu(s, tb, *pol, dist), tb);
        const auto after = ids(build_menu(s, ts, *pol, dist), ts);
        CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
      }
      const MenuPolicy home;
      const auto before = ids(build_menu(s, tb, home, dist), tb);
      const auto after = ids(build_menu(s, tg, home, dist), tg);
      CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    }
  }
}

TEST_CASE("closest-k rules are not monotone in new schools") {
  const DistanceModel dist(true);
  const MenuPolicy home;
  std::vector<ProgramOption> ps = {program("A", "A", 1, 42.3 + miles_to_lat(3), -71.0),
                                   program("B", "B", 1, 42.3 + miles_to_lat(4), -71.0),
                                   program("F", "F", 4, 42.3 + miles_to_lat(9), -71.0)};
  const Student s = student("s", 42.3, -71.0);
  MenuPolicy two;
  two.closest_by_tier = {{1, 2}};
  const auto before = build_menu(s, ProgramTable(ps), two, dist);
  CHECK(before.options == std::vector<int>{0, 1});
  ps.push_back(program("C", "C", 1, 42.3 + miles_to_lat(2), -71.0));
  const ProgramTable grown(ps);
  const auto after = build_menu(s, grown, two, dist);
  CHECK_FALSE(after.contains(grown.index_of("B")));
}

TEST_CASE("naive hierarchy") {
  const DistanceModel dist(true);
  const ProgramTable t({program("A-1", "A", 2, 42.3 + miles_to_lat(0.5), -71.0),
                        program("A-2", "A", 2, 42.3 + miles_to_lat(0.5), -71.0),
                        program("B-1", "B", 1, 42.3 - miles_to_lat(0.5), -71.0),
                        program("C-1", "C", 2, 42.3 + miles_to_lat(2.0), -71.0)});
  const ChoiceMenu menu{"s", {0, 1, 2, 3}};
  Student s = student("s", 42.3, -71.0);
  CHECK(rank_naive(s, menu, t, dist) == std::vector<int>{2, 0, 1, 3});
  s.continuing_program = "A-2";
  CHECK(rank_naive(s, menu, t, dist) == std::vector<int>{1, 0, 2, 3});
  Student sib = student("t", 42.3, -71.0);
  sib.sibling_schools.insert("C");
  CHECK(rank_naive(sib, menu, t, dist).front() == 3);
  SUBCASE("output is a permutation and removal keeps relative order") {
    Rng rng = make_rng(9, "naive");
    const ProgramTable big(random_programs(rng, 20, 2));
    for (int i = 0; i < 50; ++i) {
      Student x = student("x", 42.30 + 0.08 * uniform01(rng), -71.10 + 0.1 * uniform01(rng));
      x.is_ell = uniform01(rng) < 0.5;
      const auto m = build_menu(x, big, MenuPolicy{}, dist);
      const auto r = rank_naive(x, m, big, dist);
      auto sorted = r;
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == m.options);
      ChoiceMenu smaller = m;
      smaller.options.erase(std::find(smaller.options.begin(), smaller.options.end(), r.back()));
      auto expect = r;
      expect.pop_back();
      CHECK(rank_naive(x, smaller, big, dist) == expect);
    }
  }
}

TEST_CASE("dataset loading") {
  testing::TempDir dir("load");
  write_file(dir.path() / "programs.csv",
             "program_id,school_id,tier,capacity,is_ell_program,ell_language,mcas_share,pct_white_asian,lat,lon\n"
             "A-1,A,1,2,0,,0.5,0.3,42.30,-71.00\n"
             "B-1,B,2,1,1,spanish,0.4,0.2,42.31,-71.00\n");
  const std::string students_header =
      "student_id,grade,neighborhood,geocode,lat,lon,race,income,is_ell,ell_language,continuing_program,"
      "sibling_schools,lottery\n";
  write_file(dir.path() / "students.csv", students_header +
                                              "s1,K2,0,g1,42.30,-71.00,black,0.5,0,,,,0.1\n"
                                              "s2,K2,3,g2,42.30,-71.00,white,1.2,1,spanish,,B,0.2\n"
                                              "s3,K1,5,g3,42.30,-71.00,asian,0.8,0,,A-1,,0.3\n");
  write_file(dir.path() / "rankings.csv",
             "student_id,rank,program_id\ns1,1,A-1\ns2,1,B-1\ns2,2,A-1\ns3,1,A-1\n");
  SUBCASE("well-formed fixture") {
    const Dataset d = load_dataset(dir.str());
    CHECK(d.size() == 3);
    CHECK(d.rankings[1] == std::vector<int>{1, 0});
    CHECK(d.students[2].continuing_program == std::optional<ProgramId>("A-1"));
  }
  SUBCASE("unknown program is reported with its row") {
    write_file(dir.path() / "rankings.csv", "student_id,rank,program_id\ns1,1,A-1\ns2,1,Z-9\ns3,1,A-1\n");
    try {
      load_dataset(dir.str());
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("Z-9") != std::string::npos);
      CHECK(msg.find("rankings.csv:3") != std::string::npos);
    }
  }
  SUBCASE("empty ranking is an error") {
    write_file(dir.path() / "rankings.csv", "student_id,rank,program_id\ns1,1,A-1\ns2,1,B-1\n");
    CHECK_THROWS_AS(load_dataset(dir.str()), DataError);
  }
  SUBCASE("twelve choices are truncated to ten with a warning") {
    std::string progs =
        "program_id,school_id,tier,capacity,is_ell_program,ell_language,mcas_share,pct_white_asian,lat,lon\n";
    std::string ranks = "student_id,rank,program_id\n";
    for (int k = 0; k < 12; ++k) {
      progs += "P" + std::to_string(k) + ",S" + std::to_string(k) + ",1,1,0,,0.5,0.5,42.3,-71\n";
      ranks += "s1," + std::to_string(k + 1) + ",P" + std::to_string(k) + "\n";
    }
    write_file(dir.path() / "programs.csv", progs);
    write_file(dir.path() / "students.csv", students_header + "s1,K2,0,g1,42.30,-71.00,black,0.5,0,,,,0.1\n");
    write_file(dir.path() / "rankings.csv", ranks);
    const Dataset d = load_dataset(dir.str());
    CHECK(d.rankings[0].size() == 10u);
    CHECK(d.warnings.size() == 1u);
  }
  SUBCASE("invalid field values") {
    write_file(dir.path() / "students.csv", students_header +
                                                "s1,K2,0,g1,42.30,-71.00,black,-0.5,0,,,,0.1\n"
                                                "s2,K2,3,g2,42.30,-71.00,white,1.2,1,spanish,,B,1.5\n"
                                                "s3,K1,5,g3,42.30,-71.00,asian,0.8,0,,Q-1,,0.3\n");
    try {
      load_dataset(dir.str());
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("income") != std::string::npos);
      CHECK(msg.find("lottery") != std::string::npos);
      CHECK(msg.find("Q-1") != std::string::npos);
    }
  }
  SUBCASE("schema version mismatch") {
    LoadOptions o;
    o.schema_version = 2;
    CHECK_THROWS_AS(load_dataset(dir.str(), o), DataError);
  }
}

TEST_CASE("capacity inference") {
  const ProgramTable t({program("A", "A", 1, 42.3, -71), program("B", "B", 1, 42.3, -71),
                        program("C", "C", 1, 42.3, -71)});
  std::vector<std::optional<int>> a(22, 1);
  a.push_back(std::nullopt);
  a.push_back(0);
  CHECK(infer_capacities(t, a) == std::vector<int>{1, 22, 0});
  Rng rng = make_rng(4, "cap");
  std::vector<std::optional<int>> r;
  std::map<int, int> tally;
  for (int i = 0; i < 500; ++i) {
    const int p = std::uniform_int_distribution<int>(-1, 2)(rng);
    r.push_back(p < 0 ? std::nullopt : std::optional<int>(p));
    if (p >= 0) ++tally[p];
  }
  const auto cap = infer_capacities(t, r);
  for (int j = 0; j < 3; ++j) CHECK(cap[static_cast<std::size_t>(j)] == tally[j]);
}

TEST_CASE("synthetic datasets: determinism, validity and round trip") {
  SyntheticConfig cfg;
  cfg.students_per_grade = {30, 60, 150};
  cfg.n_schools = 8;
  cfg.seed = 12;
  const Dataset a = generate_synthetic(cfg);
  const Dataset b = generate_synthetic(cfg);
  testing::TempDir da("syn_a"), db("syn_b");
  save_dataset(a, da.str());
  save_dataset(b, db.str());
  for (const char* f : {"students.csv", "programs.csv", "rankings.csv", "assignments.csv", "meta.json"})
    CHECK(slurp(da.path() / f) == slurp(db.path() / f));

  const Dataset back = load_dataset(da.str());
  CHECK(same_content(a, back));

  const DistanceModel dist(true);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto menu = build_menu(a.students[i], a.programs, cfg.policy, dist);
    const auto& r = a.rankings[i];
    CHECK(!r.empty());
    CHECK(r.size() <= 10u);
    std::set<int> u(r.begin(), r.end());
    CHECK(u.size() == r.size());
    for (int p : r) CHECK(menu.contains(p));
  }
  validate(a, &cfg.policy);

  cfg.seed = 13;
  const Dataset c = generate_synthetic(cfg);
  CHECK_FALSE(same_content(a, c));
}

TEST_CASE("synthetic validity across seeds and histories") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticConfig cfg;
    cfg.students_per_grade = {20, 40, 60};
    cfg.n_schools = 6;
    cfg.seed = seed;
    cfg.geography_seed = seed * 7;
    cfg.spec = seed % 2 ? "mixed" : "reduced";
    HistoryConfig h;
    h.n_years = 3;
    for (const auto& d : generate_history(cfg, h)) {
      validate(d, &cfg.policy);
      for (std::size_t i = 0; i < d.size(); ++i)
        if (d.students[i].is_continuing()) CHECK(d.students[i].grade != Grade::K0);
    }
  }
}

TEST_CASE("synthetic config errors") {
  SyntheticConfig cfg;
  cfg.students_per_grade = {0, 0, 0};
  CHECK_THROWS_AS(generate_synthetic(cfg), UsageError);
  cfg.students_per_grade = {10, 10, 10};
  cfg.school_spread = 0.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), UsageError);
  cfg.school_spread = 1.0;
  cfg.logit = LogitParams{Eigen::VectorXd::Zero(3), {}};
  CHECK_THROWS_AS(generate_synthetic(cfg), UsageError);
}

TEST_CASE("closer-school top-choice share follows the logistic prediction") {
  SyntheticConfig cfg;
  cfg.spec = "simple";
  cfg.mean_choices = 0;
  cfg.students_per_grade = {0, 0, 1};
  SyntheticWorld w;
  w.spec = feature_spec("simple");
  // Two Tier 1 schools due north; the student sits 1.5 and 2.5 miles away.
  w.programs = ProgramTable({program("A-1", "A", 1, 42.3 + miles_to_lat(1.5), -71.0),
                             program("B-1", "B", 1, 42.3 + miles_to_lat(2.5), -71.0)});
  w.logit.beta = Eigen::VectorXd::Zero(6);
  w.logit.beta[w.spec.fixed_index("distance")] = -0.4;
  w.logit.alpha = Eigen::VectorXd::Zero(1);
  const DistanceModel dist(true);
  const std::vector<Student> one = {student("s", 42.3, -71.0)};
  Rng rng = make_rng(3, "binary");
  const int n = 100000;
  int closer = 0;
  for (int t = 0; t < n; ++t) closer += draw_true_rankings(w, cfg, one, dist, rng)[0][0] == 0;
  const double expect = 1.0 / (1.0 + std::exp(-0.4));
  const double se = std::sqrt(expect * (1 - expect) / n);
  CHECK(std::abs(static_cast<double>(closer) / n - expect) < 4 * se);
}
