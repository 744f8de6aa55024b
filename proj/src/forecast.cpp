#include "schoolchoice/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "schoolchoice/csv.hpp"

namespace schoolchoice {

TrendFit fit_trend(const std::vector<double>& years, const std::vector<double>& values, double target_year) {
  const std::size_t n = years.size();
  if (n != values.size()) throw DataError("trend series has mismatched year and value counts");
  if (n < 3) throw DataError("trend regression needs at least 3 points, got " + std::to_string(n));
  for (std::size_t i = 1; i < n; ++i)
    if (!(years[i] > years[i - 1])) throw DataError("trend series years must be strictly increasing");

  TrendFit fit;
  fit.years = years;
  fit.values = values;
  const double xbar = std::accumulate(years.begin(), years.end(), 0.0) / n;
  const double ybar = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (years[i] - xbar) * (years[i] - xbar);
    sxy += (years[i] - xbar) * (values[i] - ybar);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.prediction = fit.intercept + fit.slope * target_year;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = values[i] - fit.intercept - fit.slope * years[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(n) - 2.0;
  fit.standard_error = std::sqrt(rss / dof);
  // Scale-aware zero test so an exact line reads as significant.
  const double scale = std::max(1.0, std::abs(ybar));
  const double se_slope = fit.standard_error / std::sqrt(sxx);
  if (se_slope <= 1e-12 * scale) {
    fit.standard_error = std::max(0.0, fit.standard_error);
    fit.slope_p_value = std::abs(fit.slope) * std::sqrt(sxx) > 1e-12 * scale ? 0.0 : 1.0;
  } else {
    const boost::math::students_t dist(dof);
    const double t = std::abs(fit.slope / se_slope);
    fit.slope_p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
  }
  return fit;
}

NormalCell fit_trend_or_mean(const std::vector<double>& years, const std::vector<double>& values,
                             double target_year, double level) {
  const TrendFit fit = fit_trend(years, values, target_year);
  NormalCell c;
  c.n_points = static_cast<int>(values.size());
  if (fit.slope_p_value < level) {
    c.mean = fit.prediction;
    c.sd = fit.standard_error;
    c.method = "trend";
    return c;
  }
  const double n = static_cast<double>(values.size());
  c.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - c.mean) * (v - c.mean);
  c.sd = std::sqrt(ss / (n - 1.0));
  c.method = "mean";
  return c;
}

namespace {

nlohmann::json cell_json(const NormalCell& c) {
  return {{"mean", c.mean}, {"sd", c.sd}, {"method", c.method}, {"n_points", c.n_points}};
}

NormalCell cell_from(const nlohmann::json& j) {
  NormalCell c;
  c.mean = j.at("mean").get<double>();
  c.sd = j.at("sd").get<double>();
  c.method = j.value("method", std::string("mean"));
  c.n_points = j.value("n_points", 0);
  if (!(c.sd >= 0.0)) throw DataError("participation model has a negative SD");
  return c;
}

nlohmann::json cells_json(const std::map<Cell, NormalCell>& cells) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [key, c] : cells) {
    auto j = cell_json(c);
    j["grade"] = std::string(to_string(key.first));
    j["neighborhood"] = key.second;
    arr.push_back(j);
  }
  return arr;
}

std::map<Cell, NormalCell> cells_from(const nlohmann::json& arr) {
  std::map<Cell, NormalCell> out;
  for (const auto& j : arr)
    out[{parse_grade(j.at("grade").get<std::string>()), j.at("neighborhood").get<int>()}] = cell_from(j);
  return out;
}

int year_number(const std::string& label) {
  return static_cast<int>(csv::parse_int(label, "year label"));
}

const Grade kTargetGrades[] = {Grade::K1, Grade::K2};

// Short series: mean and SD of what there is, with a warning.
NormalCell short_series(const std::vector<double>& values, const std::string& what,
                        std::vector<std::string>& warnings) {
  NormalCell c;
  c.n_points = static_cast<int>(values.size());
  c.method = "mean";
  if (values.empty()) {
    warnings.push_back(what + ": no observations; using 0");
    return c;
  }
  const double n = static_cast<double>(values.size());
  c.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - c.mean) * (v - c.mean);
    c.sd = std::sqrt(ss / (n - 1.0));
  }
  warnings.push_back(what + ": only " + std::to_string(values.size()) +
                     " observation(s); using the sample mean and SD");
  return c;
}

}  // namespace

nlohmann::json to_json(const ParticipationModel& m) {
  return {{"model", "participation"},
          {"target_year", m.target_year},
          {"total_new", cell_json(m.total_new)},
          {"proportions", cells_json(m.proportion)},
          {"continuing_ratios", cells_json(m.continuing_ratio)},
          {"warnings", m.warnings}};
}

ParticipationModel participation_from_json(const nlohmann::json& j) {
  try {
    ParticipationModel m;
    m.target_year = j.at("target_year").get<int>();
    m.total_new = cell_from(j.at("total_new"));
    m.proportion = cells_from(j.at("proportions"));
    m.continuing_ratio = cells_from(j.at("continuing_ratios"));
    m.warnings = j.value("warnings", std::vector<std::string>{});
    for (Grade g : kTargetGrades)
      for (int n = 0; n < kNumNeighborhoods; ++n)
        if (!m.proportion.count({g, n}))
          throw DataError("participation model lacks a proportion for " + std::string(to_string(g)) +
                          " neighborhood " + std::to_string(n));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed participation model: ") + e.what());
  }
}

ParticipationModel fit_participation(const std::vector<Dataset>& history, int target_year) {
  std::vector<const Dataset*> years;
  for (const auto& d : history) years.push_back(&d);
  std::sort(years.begin(), years.end(),
            [](const Dataset* a, const Dataset* b) { return year_number(a->year) < year_number(b->year); });
  if (years.size() < 3)
    throw DataError("participation model needs at least 3 history years, got " + std::to_string(years.size()));

  ParticipationModel m;
  m.target_year = target_year;
  std::vector<double> x, total;
  std::map<Cell, std::vector<double>> share;
  for (const Dataset* d : years) {
    const int y = year_number(d->year);
    if (y >= target_year) throw DataError("history year " + d->year + " is not before the target year");
    x.push_back(y);
    std::map<Cell, double> counts;
    double n_new = 0.0;
    for (const auto& s : d->students) {
      if (s.is_continuing()) continue;
      n_new += 1.0;
      if (s.grade != Grade::K0) counts[{s.grade, s.neighborhood}] += 1.0;
    }
    total.push_back(n_new);
    for (Grade g : kTargetGrades)
      for (int n = 0; n < kNumNeighborhoods; ++n)
        share[{g, n}].push_back(n_new > 0 ? counts[{g, n}] / n_new : 0.0);
  }

  const TrendFit t = fit_trend(x, total, target_year);
  m.total_new = {t.prediction, t.standard_error, "trend", static_cast<int>(x.size())};
  for (const auto& [cell, values] : share) m.proportion[cell] = fit_trend_or_mean(x, values, target_year);

  std::map<Cell, std::vector<double>> ratio_x, ratio;
  for (std::size_t k = 1; k < years.size(); ++k) {
    const Dataset& prev = *years[k - 1];
    const Dataset& cur = *years[k];
    if (year_number(cur.year) != year_number(prev.year) + 1) continue;
    if (!prev.has_assignments())
      throw DataError("history year " + prev.year + " has no assignments to derive enrollment from");
    std::map<Cell, double> enrolled, continuing;
    for (std::size_t i = 0; i < prev.students.size(); ++i) {
      const Student& s = prev.students[i];
      if (s.grade == Grade::K2 || !prev.assignments[i]) continue;
      enrolled[{static_cast<Grade>(static_cast<int>(s.grade) + 1), s.neighborhood}] += 1.0;
    }
    for (const auto& s : cur.students)
      if (s.is_continuing() && s.grade != Grade::K0) continuing[{s.grade, s.neighborhood}] += 1.0;
    for (const auto& [cell, n] : enrolled) {
      ratio_x[cell].push_back(year_number(cur.year));
      ratio[cell].push_back(continuing[cell] / n);
    }
  }
  for (Grade g : kTargetGrades)
    for (int n = 0; n < kNumNeighborhoods; ++n) {
      const Cell cell{g, n};
      const auto& v = ratio[cell];
      const std::string what = "continuing ratio " + std::string(to_string(g)) + " neighborhood " + std::to_string(n);
      m.continuing_ratio[cell] = v.size() >= 3 ? fit_trend_or_mean(ratio_x[cell], v, target_year)
                                               : short_series(v, what, m.warnings);
    }
  return m;
}

ApplicantBase make_applicant_base(const Dataset& prev) {
  if (!prev.has_assignments())
    throw DataError("base year " + prev.year + " has no assignments to derive enrollment from");
  ApplicantBase base;
  for (std::size_t i = 0; i < prev.students.size(); ++i) {
    const Student& s = prev.students[i];
    if (!s.is_continuing() && s.grade != Grade::K0) base.new_applicants[{s.grade, s.neighborhood}].push_back(s);
    if (s.grade != Grade::K2 && prev.assignments[i]) {
      Student c = s;
      c.grade = static_cast<Grade>(static_cast<int>(s.grade) + 1);
      c.continuing_program = prev.programs[static_cast<std::size_t>(*prev.assignments[i])].id;
      base.potential_continuing[{c.grade, c.neighborhood}].push_back(std::move(c));
    }
  }
  return base;
}

PoolDraw draw_applicant_pool(const ParticipationModel& model, const ApplicantBase& base, Rng& rng) {
  PoolDraw out;
  out.total = model.total_new.mean + model.total_new.sd * standard_normal(rng);
  int serial = 0;
  for (const auto& [cell, dist] : model.proportion) {
    const double share = dist.mean + dist.sd * standard_normal(rng);
    const double product = out.total * share;
    const int count = static_cast<int>(std::lround(std::max(0.0, product)));
    out.new_counts[cell] = count;
    auto it = base.new_applicants.find(cell);
    if (count > 0 && (it == base.new_applicants.end() || it->second.empty())) {
      out.warnings.push_back("no base-year new applicants in " + std::string(to_string(cell.first)) +
                             " neighborhood " + std::to_string(cell.second) + "; drew 0 instead of " +
                             std::to_string(count));
      out.new_counts[cell] = 0;
      continue;
    }
    for (int k = 0; k < count; ++k) {
      const auto& pool = it->second;
      const auto pick = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
      Student s = pool[pick];
      s.id += "#" + std::to_string(++serial);
      out.students.push_back(std::move(s));
    }
  }
  for (const auto& [cell, dist] : model.continuing_ratio) {
    const double r = std::clamp(dist.mean + dist.sd * standard_normal(rng), 0.0, 1.0);
    out.ratios[cell] = r;
    auto it = base.potential_continuing.find(cell);
    if (it == base.potential_continuing.end()) continue;
    for (const auto& s : it->second)
      if (uniform01(rng) < r) out.students.push_back(s);
  }
  return out;
}

}  // namespace schoolchoice
