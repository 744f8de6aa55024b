#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "schoolchoice/csv.hpp"
#include "schoolchoice/matching.hpp"
#include "da_oracle.hpp"
#include "support.hpp"

using namespace schoolchoice;
using testing::brute_force_student_optimal;
using testing::random_market;
using testing::rank_of;
using testing::stable;

namespace {

Market simple_market(const std::vector<std::vector<int>>& rankings, const std::vector<double>& lottery,
                     const std::vector<int>& capacity) {
  Market m;
  m.capacity = capacity;
  m.rankings = rankings;
  for (std::size_t i = 0; i < rankings.size(); ++i)
    m.priority.emplace_back(rankings[i].size(), Priority{2, lottery[i]});
  return m;
}

}  // namespace

TEST_CASE("ample capacity gives every student their first choice") {
  const Market m = simple_market({{0, 1}, {1, 0}, {0}}, {0.3, 0.1, 0.2}, {5, 5});
  const Matching r = deferred_acceptance(m);
  CHECK(r.student_program == std::vector<int>{0, 1, 0});
  CHECK(r.round_admitted == std::vector<int>{1, 1, 1});
  CHECK(r.rounds == 1);
}

TEST_CASE("lottery breaks ties at equal priority") {
  const Market m = simple_market({{0}, {0}}, {0.2, 0.7}, {1});
  const Matching r = deferred_acceptance(m);
  CHECK(r.student_program == std::vector<int>{0, -1});
  CHECK(r.cutoff[0]->lottery == doctest::Approx(0.2));
}

TEST_CASE("priority level dominates lottery") {
  Market m = simple_market({{0}, {0}}, {0.9, 0.1}, {1});
  m.priority[0][0].level = 0;
  CHECK(deferred_acceptance(m).student_program == std::vector<int>{0, -1});
}

TEST_CASE("rejected students move down their lists in later rounds") {
  const Market m = simple_market({{0, 1}, {0, 1}, {0}}, {0.5, 0.1, 0.3}, {1, 1});
  const Matching r = deferred_acceptance(m);
  CHECK(r.student_program == std::vector<int>{1, 0, -1});
  CHECK(r.round_admitted[0] == 2);
  CHECK(r.round_admitted[1] == 1);
  CHECK(r.round_admitted[2] == 0);
}

TEST_CASE("duplicate lottery numbers at one priority level are an error") {
  const Market m = simple_market({{0}, {0}}, {0.4, 0.4}, {1});
  CHECK_THROWS_AS(deferred_acceptance(m), DataError);
}

TEST_CASE("deferred acceptance matches the brute-force student-optimal stable matching") {
  Rng rng = make_rng(2024, "da-oracle");
  int mismatches = 0, blocking = 0, no_optimum = 0;
  for (int t = 0; t < 1000; ++t) {
    const Market m = random_market(rng, 5, 4);
    const Matching r = deferred_acceptance(m);
    int n_stable = 0;
    const auto oracle = brute_force_student_optimal(m, &n_stable);
    if (oracle.empty()) ++no_optimum;
    if (oracle != r.student_program) ++mismatches;
    if (!blocking_pairs(m, r).empty() || !stable(m, r.student_program)) ++blocking;
  }
  CHECK(no_optimum == 0);
  CHECK(mismatches == 0);
  CHECK(blocking == 0);
}

TEST_CASE("capacity feasibility and consistency on larger random markets") {
  Rng rng = make_rng(5, "da-capacity");
  for (int t = 0; t < 200; ++t) {
    const Market m = random_market(rng, 40, 8);
    const Matching r = deferred_acceptance(m);
    for (std::size_t j = 0; j < m.n_programs(); ++j) {
      CHECK(static_cast<int>(r.admitted[j].size()) <= m.capacity[j]);
      for (int i : r.admitted[j]) CHECK(r.student_program[static_cast<std::size_t>(i)] == static_cast<int>(j));
    }
    for (std::size_t i = 0; i < m.n_students(); ++i) {
      const int p = r.student_program[i];
      if (p < 0) {
        // Unmatched students were rejected everywhere they applied.
        for (int q : m.rankings[i]) CHECK(r.is_full(static_cast<std::size_t>(q), m));
      } else {
        const auto& adm = r.admitted[static_cast<std::size_t>(p)];
        CHECK(std::find(adm.begin(), adm.end(), static_cast<int>(i)) != adm.end());
      }
    }
    CHECK(blocking_pairs(m, r).empty());
    CHECK(deferred_acceptance(m).student_program == r.student_program);
  }
}

TEST_CASE("misreports never help a student") {
  Rng rng = make_rng(11, "da-strategy");
  int better = 0;
  for (int t = 0; t < 500; ++t) {
    const Market m = random_market(rng, 5, 4);
    const int i = std::uniform_int_distribution<int>(0, static_cast<int>(m.n_students()) - 1)(rng);
    const auto truthful = deferred_acceptance(m).student_program[static_cast<std::size_t>(i)];
    Market lie = m;
    auto& r = lie.rankings[static_cast<std::size_t>(i)];
    auto& pr = lie.priority[static_cast<std::size_t>(i)];
    std::vector<std::size_t> order(r.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::uniform_int_distribution<std::size_t>(0, order.size())(rng));
    std::vector<int> nr;
    std::vector<Priority> np;
    for (auto k : order) nr.push_back(r[k]), np.push_back(pr[k]);
    r = nr;
    pr = np;
    const auto outcome = deferred_acceptance(lie).student_program[static_cast<std::size_t>(i)];
    if (rank_of(m, i, outcome) < rank_of(m, i, truthful)) ++better;
  }
  CHECK(better == 0);
}

TEST_CASE("access to quality") {
  using testing::program;
  using testing::student;
  const ProgramTable programs({program("A-1", "A", 1, 42.30, -71.0, 2), program("B-1", "B", 3, 42.31, -71.0, 5),
                               program("C-1", "C", 2, 42.32, -71.0, 0)});
  ChoiceMenu all{"x", {0, 1, 2}};
  ChoiceMenu low{"x", {1}};
  std::vector<Student> students = {student("s1", 42.3, -71, 0.10), student("s2", 42.3, -71, 0.41),
                                   student("s3", 42.3, -71, 0.80)};
  std::vector<std::vector<int>> rankings = {{0}, {0}, {0, 1}};
  const Market m = make_market(students, rankings, programs, {2, 5, 0});
  const Matching r = deferred_acceptance(m);
  REQUIRE(r.student_program == std::vector<int>{0, 0, 1});

  SUBCASE("oversubscribed program: cutoff of the marginal admit") {
    CHECK(access_to_quality(r, m, programs, students[2], all) == doctest::Approx(0.41));
    // Replay with a probe applicant at several lottery values.
    double worst_admitted = 0.0;
    for (double x = 0.005; x < 1.0; x += 0.01) {
      auto probe_students = students;
      auto probe_rankings = rankings;
      probe_students.push_back(student("probe", 42.3, -71, x));
      probe_rankings.push_back({0});
      const Market pm = make_market(probe_students, probe_rankings, programs, {2, 5, 0});
      if (deferred_acceptance(pm).student_program.back() == 0) worst_admitted = x;
    }
    CHECK(worst_admitted < 0.41);
    CHECK(worst_admitted > 0.40);
  }
  SUBCASE("undersubscribed Tier 1 program gives 1") {
    const Market big = make_market(students, rankings, programs, {5, 5, 0});
    CHECK(access_to_quality(deferred_acceptance(big), big, programs, students[2], all) == 1.0);
  }
  SUBCASE("no Tier 1/2 program in the menu gives 0") {
    CHECK(access_to_quality(r, m, programs, students[2], low) == 0.0);
  }
  SUBCASE("higher priority level than the marginal admit gives 1") {
    Student sib = students[2];
    sib.sibling_schools.insert("A");
    CHECK(access_to_quality(r, m, programs, sib, all) == 1.0);
  }
}

TEST_CASE("walk-zone priority plug-in ranks nearby students first") {
  using testing::program;
  using testing::student;
  const ProgramTable programs({program("A-1", "A", 1, 42.30, -71.0, 1)});
  const DistanceModel dist(true);
  std::vector<Student> s = {student("far", 42.30 + testing::miles_to_lat(3), -71.0, 0.1),
                            student("near", 42.30 + testing::miles_to_lat(0.5), -71.0, 0.9)};
  const Market standard = make_market(s, {{0}, {0}}, programs, {1});
  const Market walk = make_market(s, {{0}, {0}}, programs, {1}, walk_zone_priority(dist));
  CHECK(deferred_acceptance(standard).student_program == std::vector<int>{0, -1});
  CHECK(deferred_acceptance(walk).student_program == std::vector<int>{-1, 0});
}

TEST_CASE("matching CSV lists every student") {
  using testing::program;
  using testing::student;
  const ProgramTable programs({program("A-1", "A", 1, 42.30, -71.0, 1)});
  std::vector<Student> s = {student("a", 42.3, -71, 0.1), student("b", 42.3, -71, 0.2)};
  const Market m = make_market(s, {{0}, {0}}, programs, {1});
  testing::TempDir dir("matching");
  const auto path = (dir.path() / "m.csv").string();
  write_matching_csv(path, s, programs, deferred_acceptance(m));
  const auto t = csv::read(path);
  CHECK(t.header == std::vector<std::string>{"student_id", "program_id", "round_admitted"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"a", "A-1", "1"});
  CHECK(t.rows[1] == std::vector<std::string>{"b", "UNASSIGNED", "0"});
}
