#include "schoolchoice/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "json.hpp"

#include "schoolchoice/csv.hpp"

namespace fs = std::filesystem;

namespace schoolchoice {

namespace {

std::string join(const std::set<SchoolId>& s, char sep) {
  std::string out;
  for (const auto& x : s) {
    if (!out.empty()) out += sep;
    out += x;
  }
  return out;
}

bool parse_bool(std::string_view s, std::string_view what) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw DataError("invalid boolean '" + std::string(s) + "' for " + std::string(what));
}

class ErrorList {
 public:
  void add(std::string msg) { errors_.push_back(std::move(msg)); }
  void throw_if_any(const std::string& context) const {
    if (errors_.empty()) return;
    std::string msg = context + ": " + std::to_string(errors_.size()) + " validation error(s)";
    for (const auto& e : errors_) msg += "\n  " + e;
    throw DataError(msg);
  }

 private:
  std::vector<std::string> errors_;
};

template <class F>
void guarded(ErrorList& errs, const std::string& where, F&& f) {
  try {
    f();
  } catch (const DataError& e) {
    errs.add(where + ": " + e.what());
  }
}

std::vector<ProgramOption> read_programs(const std::string& path, ErrorList& errs) {
  auto t = csv::read(path);
  const int c_id = t.require("program_id", path), c_school = t.require("school_id", path),
            c_tier = t.require("tier", path), c_cap = t.require("capacity", path),
            c_ell = t.require("is_ell_program", path), c_lang = t.require("ell_language", path),
            c_mcas = t.require("mcas_share", path), c_wa = t.require("pct_white_asian", path),
            c_lat = t.require("lat", path), c_lon = t.require("lon", path);
  std::vector<ProgramOption> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    guarded(errs, path + ":" + std::to_string(t.line_numbers[r]), [&] {
      ProgramOption p;
      p.id = row[c_id];
      p.school = row[c_school];
      p.tier = static_cast<int>(csv::parse_int(row[c_tier], "tier"));
      p.capacity = static_cast<int>(csv::parse_int(row[c_cap], "capacity"));
      p.is_ell_program = parse_bool(row[c_ell], "is_ell_program");
      p.ell_language = row[c_lang];
      p.mcas_share = csv::parse_double(row[c_mcas], "mcas_share");
      p.pct_white_asian = csv::parse_double(row[c_wa], "pct_white_asian");
      p.location = {csv::parse_double(row[c_lat], "lat"), csv::parse_double(row[c_lon], "lon")};
      validate(p);
      out.push_back(std::move(p));
    });
  }
  return out;
}

std::vector<Student> read_students(const std::string& path, const ProgramTable& programs,
                                   ErrorList& errs) {
  auto t = csv::read(path);
  const int c_id = t.require("student_id", path), c_grade = t.require("grade", path),
            c_nb = t.require("neighborhood", path), c_geo = t.require("geocode", path),
            c_lat = t.require("lat", path), c_lon = t.require("lon", path),
            c_race = t.require("race", path), c_inc = t.require("income", path),
            c_ell = t.require("is_ell", path), c_lang = t.require("ell_language", path),
            c_cont = t.require("continuing_program", path),
            c_sib = t.require("sibling_schools", path), c_lot = t.require("lottery", path);
  std::vector<Student> out;
  std::set<StudentId> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    guarded(errs, path + ":" + std::to_string(t.line_numbers[r]), [&] {
      Student s;
      s.id = row[c_id];
      if (!seen.insert(s.id).second) throw DataError("duplicate student id " + s.id);
      s.grade = parse_grade(row[c_grade]);
      s.neighborhood = static_cast<int>(csv::parse_int(row[c_nb], "neighborhood"));
      s.geocode = row[c_geo];
      s.home = {csv::parse_double(row[c_lat], "lat"), csv::parse_double(row[c_lon], "lon")};
      s.race = parse_race(row[c_race]);
      s.income = csv::parse_double(row[c_inc], "income");
      s.is_ell = parse_bool(row[c_ell], "is_ell");
      s.ell_language = row[c_lang];
      if (!row[c_cont].empty()) {
        if (programs.find(row[c_cont]) < 0)
          throw DataError("continuing program " + row[c_cont] + " not in program table");
        s.continuing_program = row[c_cont];
      }
      if (!row[c_sib].empty())
        for (auto& sib : csv::split(row[c_sib], ';')) s.sibling_schools.insert(sib);
      s.lottery = csv::parse_double(row[c_lot], "lottery");
      validate(s);
      out.push_back(std::move(s));
    });
  }
  return out;
}

}  // namespace

int Dataset::find_student(const StudentId& id) const {
  for (std::size_t i = 0; i < students.size(); ++i)
    if (students[i].id == id) return static_cast<int>(i);
  return -1;
}

bool same_content(const Dataset& a, const Dataset& b) {
  return a.year == b.year && a.students == b.students &&
         a.programs.programs() == b.programs.programs() && a.rankings == b.rankings &&
         a.assignments == b.assignments && a.distance.entries() == b.distance.entries();
}

Dataset load_dataset(const std::string& dir, const LoadOptions& options) {
  if (options.schema_version != kSchemaVersion)
    throw DataError("unsupported schema version " + std::to_string(options.schema_version));
  Dataset d;
  d.year = fs::path(dir).filename().string();
  if (fs::exists(fs::path(dir) / "meta.json")) {
    std::ifstream in(fs::path(dir) / "meta.json");
    auto meta = nlohmann::json::parse(in);
    if (meta.value("schema_version", kSchemaVersion) != options.schema_version)
      throw DataError(dir + "/meta.json: schema version mismatch");
    d.year = meta.value("year", d.year);
  }

  ErrorList errs;
  const std::string ppath = (fs::path(dir) / "programs.csv").string();
  d.programs = ProgramTable(read_programs(ppath, errs));
  errs.throw_if_any(ppath);
  const std::string spath = (fs::path(dir) / "students.csv").string();
  d.students = read_students(spath, d.programs, errs);
  errs.throw_if_any(spath);

  std::map<StudentId, int> index;
  for (std::size_t i = 0; i < d.students.size(); ++i) index[d.students[i].id] = static_cast<int>(i);

  // rankings.csv: student_id, rank (1-based), program_id
  const std::string rpath = (fs::path(dir) / "rankings.csv").string();
  auto rt = csv::read(rpath);
  const int r_sid = rt.require("student_id", rpath), r_rank = rt.require("rank", rpath),
            r_pid = rt.require("program_id", rpath);
  std::vector<std::map<long, int>> ranked(d.students.size());
  for (std::size_t r = 0; r < rt.rows.size(); ++r) {
    const auto& row = rt.rows[r];
    guarded(errs, rpath + ":" + std::to_string(rt.line_numbers[r]), [&] {
      auto it = index.find(row[r_sid]);
      if (it == index.end()) throw DataError("unknown student " + row[r_sid]);
      const long rank = csv::parse_int(row[r_rank], "rank");
      if (rank < 1) throw DataError("rank must be >= 1");
      const int p = d.programs.find(row[r_pid]);
      if (p < 0) throw DataError("ranking references unknown program " + row[r_pid]);
      if (!ranked[it->second].emplace(rank, p).second)
        throw DataError("duplicate rank " + std::to_string(rank) + " for student " + row[r_sid]);
    });
  }
  errs.throw_if_any(rpath);
  d.rankings.resize(d.students.size());
  for (std::size_t i = 0; i < d.students.size(); ++i) {
    for (auto [rank, p] : ranked[i]) d.rankings[i].push_back(p);
    if (d.rankings[i].size() > static_cast<std::size_t>(kMaxRankedChoices)) {
      std::string w = "student " + d.students[i].id + " ranked " +
                      std::to_string(d.rankings[i].size()) + " choices; truncated to " +
                      std::to_string(kMaxRankedChoices);
      std::cerr << "warning: " << w << "\n";
      d.warnings.push_back(std::move(w));
      d.rankings[i].resize(kMaxRankedChoices);
    }
  }

  const auto apath = fs::path(dir) / "assignments.csv";
  if (fs::exists(apath)) {
    auto at = csv::read(apath.string());
    const int a_sid = at.require("student_id", apath.string()),
              a_pid = at.require("program_id", apath.string());
    d.assignments.assign(d.students.size(), std::nullopt);
    for (std::size_t r = 0; r < at.rows.size(); ++r) {
      const auto& row = at.rows[r];
      guarded(errs, apath.string() + ":" + std::to_string(at.line_numbers[r]), [&] {
        auto it = index.find(row[a_sid]);
        if (it == index.end()) throw DataError("unknown student " + row[a_sid]);
        if (row[a_pid] != "UNASSIGNED") d.assignments[it->second] = d.programs.index_of(row[a_pid]);
      });
    }
    errs.throw_if_any(apath.string());
  }

  const auto dpath = fs::path(dir) / "distances.csv";
  d.distance = fs::exists(dpath) ? DistanceModel::load_csv(dpath.string(), options.haversine_fallback)
                                 : DistanceModel(options.haversine_fallback);
  validate(d, options.menu_policy);
  return d;
}

void validate(const Dataset& d, const MenuPolicy* menu_policy) {
  ErrorList errs;
  if (d.rankings.size() != d.students.size())
    throw DataError("rankings/students size mismatch");
  for (std::size_t i = 0; i < d.students.size(); ++i) {
    const auto& s = d.students[i];
    const auto& r = d.rankings[i];
    if (r.empty()) {
      errs.add("student " + s.id + ": empty ranking");
      continue;
    }
    if (r.size() > static_cast<std::size_t>(kMaxRankedChoices))
      errs.add("student " + s.id + ": more than 10 ranked choices");
    std::set<int> uniq(r.begin(), r.end());
    if (uniq.size() != r.size()) errs.add("student " + s.id + ": duplicate ranked program");
    for (int p : r)
      if (p < 0 || static_cast<std::size_t>(p) >= d.programs.size())
        errs.add("student " + s.id + ": ranked program index out of range");
    if (menu_policy) {
      try {
        auto menu = build_menu(s, d.programs, *menu_policy, d.distance);
        for (int p : r)
          if (!menu.contains(p))
            errs.add("student " + s.id + ": ranked program " + d.programs[p].id +
                     " is not in the student's menu");
      } catch (const DataError& e) {
        errs.add(e.what());
      }
    }
  }
  errs.throw_if_any("dataset " + d.year);
}

void save_dataset(const Dataset& d, const std::string& dir) {
  fs::create_directories(dir);
  {
    csv::Writer w((fs::path(dir) / "programs.csv").string());
    w.row({"program_id", "school_id", "tier", "capacity", "is_ell_program", "ell_language",
           "mcas_share", "pct_white_asian", "lat", "lon"});
    for (const auto& p : d.programs.programs())
      w.row({p.id, p.school, std::to_string(p.tier), std::to_string(p.capacity),
             p.is_ell_program ? "1" : "0", p.ell_language, csv::format_double(p.mcas_share),
             csv::format_double(p.pct_white_asian), csv::format_double(p.location.lat),
             csv::format_double(p.location.lon)});
  }
  {
    csv::Writer w((fs::path(dir) / "students.csv").string());
    w.row({"student_id", "grade", "neighborhood", "geocode", "lat", "lon", "race", "income",
           "is_ell", "ell_language", "continuing_program", "sibling_schools", "lottery"});
    for (const auto& s : d.students)
      w.row({s.id, std::string(to_string(s.grade)), std::to_string(s.neighborhood), s.geocode,
             csv::format_double(s.home.lat), csv::format_double(s.home.lon),
             std::string(to_string(s.race)), csv::format_double(s.income), s.is_ell ? "1" : "0",
             s.ell_language, s.continuing_program.value_or(""), join(s.sibling_schools, ';'),
             csv::format_double(s.lottery)});
  }
  {
    csv::Writer w((fs::path(dir) / "rankings.csv").string());
    w.row({"student_id", "rank", "program_id"});
    for (std::size_t i = 0; i < d.students.size(); ++i)
      for (std::size_t k = 0; k < d.rankings[i].size(); ++k)
        w.row({d.students[i].id, std::to_string(k + 1), d.programs[d.rankings[i][k]].id});
  }
  if (d.has_assignments()) {
    csv::Writer w((fs::path(dir) / "assignments.csv").string());
    w.row({"student_id", "program_id"});
    for (std::size_t i = 0; i < d.students.size(); ++i)
      w.row({d.students[i].id,
             d.assignments[i] ? d.programs[*d.assignments[i]].id : std::string("UNASSIGNED")});
  }
  if (d.distance.has_matrix()) d.distance.save_csv((fs::path(dir) / "distances.csv").string());
  std::ofstream meta(fs::path(dir) / "meta.json");
  meta << nlohmann::json{{"schema_version", kSchemaVersion}, {"year", d.year}}.dump(2) << "\n";
}

std::vector<int> infer_capacities(const ProgramTable& programs,
                                  const std::vector<std::optional<int>>& assignments) {
  std::vector<int> cap(programs.size(), 0);
  for (const auto& a : assignments)
    if (a) ++cap[static_cast<std::size_t>(*a)];
  return cap;
}

std::vector<int> infer_capacities(const Dataset& d, Grade grade) {
  if (!d.has_assignments())
    throw DataError("dataset " + d.year + " has no assignments to infer capacities from");
  std::vector<std::optional<int>> filtered;
  for (std::size_t i = 0; i < d.students.size(); ++i)
    if (d.students[i].grade == grade) filtered.push_back(d.assignments[i]);
  return infer_capacities(d.programs, filtered);
}

std::vector<std::string> list_years(const std::string& history_dir) {
  std::vector<std::string> years;
  if (!fs::is_directory(history_dir)) throw DataError("not a directory: " + history_dir);
  for (const auto& e : fs::directory_iterator(history_dir))
    if (e.is_directory() && fs::exists(e.path() / "students.csv"))
      years.push_back(e.path().filename().string());
  std::sort(years.begin(), years.end());
  return years;
}

}  // namespace schoolchoice
