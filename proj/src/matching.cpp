#include "schoolchoice/matching.hpp"

#include <algorithm>

#include "schoolchoice/csv.hpp"

namespace schoolchoice {

PriorityRule standard_priority() {
  return [](const Student& s, const ProgramOption& p) { return priority_of(s, p); };
}

PriorityRule walk_zone_priority(const DistanceModel& distance, double radius) {
  return [distance, radius](const Student& s, const ProgramOption& p) {
    Priority pr = priority_of(s, p);
    if (pr.level == 2 && distance(s, p) > radius) pr.level = 3;
    return pr;
  };
}

Market make_market(const std::vector<Student>& students,
                   const std::vector<std::vector<int>>& rankings, const ProgramTable& programs,
                   const std::vector<int>& capacity, const PriorityRule& rule) {
  if (students.size() != rankings.size())
    throw DataError("market has " + std::to_string(students.size()) + " students but " +
                    std::to_string(rankings.size()) + " rankings");
  if (capacity.size() != programs.size())
    throw DataError("capacity table has " + std::to_string(capacity.size()) +
                    " entries for " + std::to_string(programs.size()) + " programs");
  for (std::size_t j = 0; j < capacity.size(); ++j)
    if (capacity[j] < 0) throw DataError("negative capacity for program " + programs[j].id);
  Market m;
  m.capacity = capacity;
  m.rankings = rankings;
  m.priority.resize(students.size());
  for (std::size_t i = 0; i < students.size(); ++i) {
    m.priority[i].reserve(rankings[i].size());
    for (int p : rankings[i]) {
      if (p < 0 || p >= static_cast<int>(programs.size()))
        throw DataError("student " + students[i].id + " ranks an unknown program index");
      m.priority[i].push_back(rule(students[i], programs[static_cast<std::size_t>(p)]));
    }
  }
  return m;
}

namespace {

struct Applicant {
  int student;
  Priority priority;
};

}  // namespace

Matching deferred_acceptance(const Market& market) {
  const std::size_t n = market.n_students();
  const std::size_t np = market.n_programs();
  Matching out;
  out.student_program.assign(n, -1);
  out.round_admitted.assign(n, 0);
  out.cutoff.assign(np, std::nullopt);

  std::vector<std::vector<Applicant>> held(np);
  std::vector<std::size_t> next(n, 0);
  std::vector<int> proposed_round(n, 0);
  std::vector<int> free;
  for (std::size_t i = 0; i < n; ++i) free.push_back(static_cast<int>(i));

  int round = 0;
  std::vector<std::vector<Applicant>> incoming(np);
  while (true) {
    bool any = false;
    for (int i : free) {
      auto& pos = next[static_cast<std::size_t>(i)];
      const auto& rank = market.rankings[static_cast<std::size_t>(i)];
      if (pos >= rank.size()) continue;
      const int p = rank[pos];
      incoming[static_cast<std::size_t>(p)].push_back({i, market.priority[static_cast<std::size_t>(i)][pos]});
      ++pos;
      any = true;
    }
    if (!any) break;
    ++round;
    free.clear();
    for (std::size_t j = 0; j < np; ++j) {
      if (incoming[j].empty()) continue;
      for (const auto& a : incoming[j]) proposed_round[static_cast<std::size_t>(a.student)] = round;
      auto& pool = held[j];
      pool.insert(pool.end(), incoming[j].begin(), incoming[j].end());
      incoming[j].clear();
      std::sort(pool.begin(), pool.end(), [](const Applicant& a, const Applicant& b) {
        if (a.priority == b.priority) return a.student < b.student;
        return a.priority < b.priority;
      });
      for (std::size_t k = 1; k < pool.size(); ++k)
        if (pool[k].priority == pool[k - 1].priority)
          throw DataError("duplicate lottery number " + csv::format_double(pool[k].priority.lottery) +
                          " at priority level " + std::to_string(pool[k].priority.level) +
                          " for program index " + std::to_string(j));
      const std::size_t cap = static_cast<std::size_t>(market.capacity[j]);
      for (std::size_t k = cap; k < pool.size(); ++k) free.push_back(pool[k].student);
      if (pool.size() > cap) pool.resize(cap);
    }
    std::sort(free.begin(), free.end());
  }

  out.rounds = round;
  out.admitted.resize(np);
  for (std::size_t j = 0; j < np; ++j) {
    for (const auto& a : held[j]) {
      out.admitted[j].push_back(a.student);
      out.student_program[static_cast<std::size_t>(a.student)] = static_cast<int>(j);
      out.round_admitted[static_cast<std::size_t>(a.student)] =
          proposed_round[static_cast<std::size_t>(a.student)];
    }
    if (!held[j].empty() && static_cast<int>(held[j].size()) >= market.capacity[j])
      out.cutoff[j] = held[j].back().priority;
  }
  return out;
}

double access_to_quality(const Matching& matching, const Market& market,
                         const ProgramTable& programs, const Student& student,
                         const ChoiceMenu& menu, const PriorityRule& rule) {
  double best = 0.0;
  for (int p : menu.options) {
    const auto j = static_cast<std::size_t>(p);
    const auto& prog = programs[j];
    if (prog.tier > 2) continue;
    if (!matching.is_full(j, market)) return 1.0;
    const auto& cut = matching.cutoff[j];
    if (!cut) continue;  // zero capacity
    const int level = rule(student, prog).level;
    double a = 0.0;
    if (level < cut->level) a = 1.0;
    else if (level == cut->level) a = cut->lottery;
    best = std::max(best, a);
  }
  return best;
}

std::vector<std::pair<int, int>> blocking_pairs(const Market& market, const Matching& matching) {
  std::vector<std::pair<int, int>> out;
  const std::size_t np = market.n_programs();
  // Worst admitted priority per program, from the market's own priorities.
  std::vector<std::optional<Priority>> worst(np);
  std::vector<int> count(np, 0);
  for (std::size_t i = 0; i < market.n_students(); ++i) {
    const int p = matching.student_program[i];
    if (p < 0) continue;
    const auto& rank = market.rankings[i];
    const auto at = std::find(rank.begin(), rank.end(), p) - rank.begin();
    const Priority pr = market.priority[i][static_cast<std::size_t>(at)];
    auto& w = worst[static_cast<std::size_t>(p)];
    if (!w || *w < pr) w = pr;
    ++count[static_cast<std::size_t>(p)];
  }
  for (std::size_t i = 0; i < market.n_students(); ++i) {
    const auto& rank = market.rankings[i];
    for (std::size_t k = 0; k < rank.size(); ++k) {
      const int p = rank[k];
      if (p == matching.student_program[i]) break;
      const auto j = static_cast<std::size_t>(p);
      const bool seat = count[j] < market.capacity[j];
      const bool displaces = worst[j] && market.priority[i][k] < *worst[j];
      if (seat || displaces) out.emplace_back(static_cast<int>(i), p);
    }
  }
  return out;
}

void write_matching_csv(const std::string& path, const std::vector<Student>& students,
                        const ProgramTable& programs, const Matching& matching) {
  csv::Writer w(path);
  w.row({"student_id", "program_id", "round_admitted"});
  for (std::size_t i = 0; i < students.size(); ++i) {
    const int p = matching.student_program[i];
    w.row({students[i].id, p < 0 ? std::string("UNASSIGNED") : programs[static_cast<std::size_t>(p)].id,
           std::to_string(matching.round_admitted[i])});
  }
}

}  // namespace schoolchoice
