#include "schoolchoice/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <numeric>

#include "schoolchoice/csv.hpp"
#include "schoolchoice/kernels.hpp"
#include "schoolchoice/naive.hpp"

namespace schoolchoice {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

DemandKind parse_demand_kind(std::string_view id) {
  if (id == "naive") return DemandKind::Naive;
  if (id == "logit") return DemandKind::Logit;
  if (id == "mixed" || id == "mixed_logit") return DemandKind::Mixed;
  throw UsageError("unknown model '" + std::string(id) + "' (expected naive, logit or mixed)");
}

std::string_view to_string(DemandKind k) {
  switch (k) {
    case DemandKind::Naive: return "naive";
    case DemandKind::Logit: return "logit";
    case DemandKind::Mixed: return "mixed";
  }
  return "?";
}

std::vector<std::vector<double>> market_shares(const std::vector<Student>& students,
                                               const std::vector<std::vector<int>>& rankings,
                                               const ProgramTable& programs, int k) {
  if (k < 1 || k > 3) throw UsageError("market shares need k in 1..3");
  const std::size_t ns = programs.num_schools();
  std::vector<std::vector<double>> votes(kNumNeighborhoods, std::vector<double>(ns, 0.0));
  std::vector<double> total(kNumNeighborhoods, 0.0);
  for (std::size_t i = 0; i < students.size(); ++i) {
    const auto nb = static_cast<std::size_t>(students[i].neighborhood);
    const auto& r = rankings[i];
    for (std::size_t c = 0; c < r.size() && c < static_cast<std::size_t>(k); ++c) {
      votes[nb][static_cast<std::size_t>(programs.school_index_of_program(static_cast<std::size_t>(r[c])))] += 1.0;
      total[nb] += 1.0;
    }
  }
  for (std::size_t nb = 0; nb < votes.size(); ++nb) {
    if (total[nb] == 0.0) {
      votes[nb].clear();
      continue;
    }
    for (double& v : votes[nb]) v /= total[nb];
  }
  return votes;
}

GradeOutcome evaluate_market(const std::vector<Student>& students,
                             const std::vector<std::vector<int>>& rankings,
                             const ProgramTable& programs, const DistanceModel& distance,
                             const MenuPolicy& policy, const std::vector<int>& capacity,
                             const PriorityRule& rule, Matching* matching_out) {
  const Market market = make_market(students, rankings, programs, capacity, rule);
  Matching matching = deferred_acceptance(market);

  GradeOutcome out;
  out.n_students = static_cast<int>(students.size());
  out.unassigned.assign(kNumNeighborhoods, 0.0);
  std::vector<double> access_sum(kNumNeighborhoods, 0.0), dist_sum(kNumNeighborhoods, 0.0);
  std::vector<int> count(kNumNeighborhoods, 0), assigned(kNumNeighborhoods, 0);
  for (std::size_t i = 0; i < students.size(); ++i) {
    const Student& s = students[i];
    const auto nb = static_cast<std::size_t>(s.neighborhood);
    ++count[nb];
    const ChoiceMenu menu = build_menu(s, programs, policy, distance);
    access_sum[nb] += access_to_quality(matching, market, programs, s, menu, rule);
    const int p = matching.student_program[i];
    if (p < 0) {
      out.unassigned[nb] += 1.0;
    } else {
      ++assigned[nb];
      ++out.n_assigned;
      dist_sum[nb] += distance(s, programs[static_cast<std::size_t>(p)]);
    }
  }
  out.access.assign(kNumNeighborhoods, kNaN);
  out.distance.assign(kNumNeighborhoods, kNaN);
  for (std::size_t nb = 0; nb < kNumNeighborhoods; ++nb) {
    if (count[nb] > 0) out.access[nb] = access_sum[nb] / count[nb];
    if (assigned[nb] > 0) out.distance[nb] = dist_sum[nb] / assigned[nb];
  }
  for (int k = 1; k <= 3; ++k) out.shares.push_back(market_shares(students, rankings, programs, k));
  if (matching_out) *matching_out = std::move(matching);
  return out;
}

void SimulationConfig::validate() const {
  if (n_simulations < 1) throw UsageError("n_simulations must be at least 1");
  if (grades.empty()) throw UsageError("no grades selected for simulation");
  for (Grade g : grades)
    if (g == Grade::K0) throw UsageError("simulation covers K1 and K2 only");
}

SimulatedMarket simulate_market(const SimulationConfig& config, const SimulationInputs& in,
                                std::uint64_t index) {
  const ProgramTable& programs = *in.programs;
  const DistanceModel& distance = *in.distance;
  const DemandModel& demand = *in.demand;

  // Layer 1: applicant pool.
  Rng pop = make_rng(config.seed, "population", index);
  PoolDraw pool = draw_applicant_pool(*in.participation, *in.base, pop);
  SimulatedMarket m;
  m.warnings = std::move(pool.warnings);
  for (auto& s : pool.students)
    if (std::find(config.grades.begin(), config.grades.end(), s.grade) != config.grades.end())
      m.students.push_back(std::move(s));

  // Layer 2: coefficients.
  Rng coef = make_rng(config.seed, "coefficients", index);
  LogitParams logit;
  MixedLogitParams mixed;
  MatrixXd factor;
  switch (demand.kind) {
    case DemandKind::Naive: break;
    case DemandKind::Logit: {
      const LogitFit& fit = *demand.logit;
      const VectorXd theta = fit.params.pack() +
                             covariance_factor(fit.covariance) * standard_normal_vector(coef, fit.covariance.rows());
      logit = LogitParams::unpack(theta, static_cast<int>(fit.params.beta.size()));
      break;
    }
    case DemandKind::Mixed: {
      if (demand.posterior.empty()) throw DataError("mixed-logit model has no posterior samples");
      const auto k = std::uniform_int_distribution<std::size_t>(0, demand.posterior.size() - 1)(coef);
      mixed = demand.posterior[k].params;
      factor = covariance_factor(mixed.W);
      break;
    }
  }

  // Layer 3: preferences.
  Rng pref = make_rng(config.seed, "preferences", index);
  m.rankings.reserve(m.students.size());
  for (const auto& s : m.students) {
    const ChoiceMenu menu = build_menu(s, programs, config.policy, distance);
    std::vector<int> r;
    switch (demand.kind) {
      case DemandKind::Naive: r = rank_naive(s, menu, programs, distance); break;
      case DemandKind::Logit: r = simulate_ranking(logit, demand.spec, s, menu, programs, distance, pref); break;
      case DemandKind::Mixed:
        r = simulate_ranking_mixed(mixed, factor, demand.spec, s, menu, programs, distance, pref);
        break;
    }
    if (r.size() > static_cast<std::size_t>(kMaxRankedChoices)) r.resize(kMaxRankedChoices);
    m.rankings.push_back(std::move(r));
  }

  // Layer 4: lotteries.
  Rng lot = make_rng(config.lottery_seed.value_or(config.seed), "lottery", index);
  for (auto& s : m.students) s.lottery = uniform01(lot);
  return m;
}

SimulationOutcome evaluate_simulated(const SimulationConfig& config, const SimulationInputs& in,
                                     const SimulatedMarket& market) {
  const PriorityRule rule = config.walk_zone_priority ? walk_zone_priority(*in.distance) : standard_priority();
  SimulationOutcome out;
  for (Grade g : config.grades) {
    auto cap = in.capacity.find(g);
    if (cap == in.capacity.end())
      throw DataError("no capacity table for grade " + std::string(to_string(g)));
    std::vector<Student> students;
    std::vector<std::vector<int>> rankings;
    for (std::size_t i = 0; i < market.students.size(); ++i)
      if (market.students[i].grade == g) {
        students.push_back(market.students[i]);
        rankings.push_back(market.rankings[i]);
      }
    out.grades[g] = evaluate_market(students, rankings, *in.programs, *in.distance, config.policy,
                                    cap->second, rule);
  }
  return out;
}

SimulationOutcome evaluate_observed(const SimulationConfig& config, const SimulationInputs& in,
                                    const Dataset& observed) {
  if (!in.programs || !in.distance) throw UsageError("simulation inputs are incomplete");
  const ProgramTable& programs = *in.programs;
  bool same = observed.programs.size() == programs.size();
  for (std::size_t j = 0; same && j < programs.size(); ++j) same = observed.programs[j].id == programs[j].id;
  if (!same) throw DataError("observed year " + observed.year + " uses a different program table");
  SimulatedMarket m;
  m.students = observed.students;
  m.rankings = observed.rankings;
  return evaluate_simulated(config, in, m);
}

std::vector<SimulationOutcome> run_simulation(const SimulationConfig& config, const SimulationInputs& in) {
  config.validate();
  if (!in.demand || !in.participation || !in.base || !in.programs || !in.distance)
    throw UsageError("simulation inputs are incomplete");
  if (in.demand->kind == DemandKind::Logit && !in.demand->logit)
    throw UsageError("logit demand model has no fit");

  const int n = config.n_simulations;
  std::vector<SimulationOutcome> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  const int threads = config.threads > 0 ? config.threads : kernels::max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int s = 0; s < n; ++s) {
    try {
      const auto market = simulate_market(config, in, static_cast<std::uint64_t>(s));
      out[static_cast<std::size_t>(s)] = evaluate_simulated(config, in, market);
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  for (int s = 0; s < n; ++s) {
    if (!errors[static_cast<std::size_t>(s)]) continue;
    const std::string where = "simulation " + std::to_string(s) + ": ";
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(s)]);
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(where + e.what());
    }
  }
  return out;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw UsageError("TV distance of vectors with lengths " + std::to_string(p.size()) + " and " +
                     std::to_string(q.size()));
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(p[j] - q[j]);
  return 0.5 * s;
}

double rmse(const std::vector<double>& errors) {
  if (errors.empty()) throw UsageError("RMSE of an empty error vector");
  double s = 0.0;
  for (double e : errors) s += e * e;
  return std::sqrt(s / static_cast<double>(errors.size()));
}

Reference parse_reference(std::string_view id) {
  if (id == "leave_one_out" || id == "loo") return Reference::LeaveOneOut;
  if (id == "self" || id == "leave_self_in") return Reference::Self;
  throw UsageError("unknown RMSE reference '" + std::string(id) + "' (expected leave_one_out or self)");
}

namespace {

// Mean of finite entries per neighborhood, optionally excluding one simulation.
std::vector<double> reference_mean(const std::vector<std::vector<double>>& sims, int exclude) {
  const std::size_t nn = sims.front().size();
  std::vector<double> mean(nn, kNaN);
  for (std::size_t n = 0; n < nn; ++n) {
    double s = 0.0;
    int c = 0;
    for (std::size_t k = 0; k < sims.size(); ++k) {
      if (static_cast<int>(k) == exclude || !std::isfinite(sims[k][n])) continue;
      s += sims[k][n];
      ++c;
    }
    if (c > 0) mean[n] = s / c;
  }
  return mean;
}

double scalar_rmse(const std::vector<double>& x, const std::vector<double>& ref) {
  std::vector<double> e;
  for (std::size_t n = 0; n < x.size(); ++n)
    if (std::isfinite(x[n]) && std::isfinite(ref[n])) e.push_back(x[n] - ref[n]);
  return e.empty() ? 0.0 : rmse(e);
}

using Shares = std::vector<std::vector<double>>;  // [neighborhood][school]

Shares reference_shares(const std::vector<Shares>& sims, int exclude) {
  const std::size_t nn = sims.front().size();
  Shares mean(nn);
  for (std::size_t n = 0; n < nn; ++n) {
    int c = 0;
    for (std::size_t k = 0; k < sims.size(); ++k) {
      if (static_cast<int>(k) == exclude || sims[k][n].empty()) continue;
      if (mean[n].empty()) mean[n].assign(sims[k][n].size(), 0.0);
      for (std::size_t j = 0; j < mean[n].size(); ++j) mean[n][j] += sims[k][n][j];
      ++c;
    }
    for (double& v : mean[n]) v /= c;
  }
  return mean;
}

double share_rmse(const Shares& x, const Shares& ref) {
  std::vector<double> e;
  for (std::size_t n = 0; n < x.size(); ++n)
    if (!x[n].empty() && !ref[n].empty()) e.push_back(tv_distance(x[n], ref[n]));
  return e.empty() ? 0.0 : rmse(e);
}

template <class Sim, class RefFn, class ErrFn>
TailResult tail(const std::vector<Sim>& sims, const Sim* actual, Reference reference, RefFn ref_fn, ErrFn err_fn) {
  if (sims.size() < 2) throw UsageError("tail p-values need at least 2 simulations");
  TailResult r;
  const auto all = ref_fn(sims, -1);
  for (std::size_t k = 0; k < sims.size(); ++k) {
    const auto ref = reference == Reference::Self ? all : ref_fn(sims, static_cast<int>(k));
    r.simulated_rmse.push_back(err_fn(sims[k], ref));
  }
  r.expected_rmse = std::accumulate(r.simulated_rmse.begin(), r.simulated_rmse.end(), 0.0) /
                    static_cast<double>(sims.size());
  if (!actual) {
    r.actual_rmse = kNaN;
    r.p_value = kNaN;
    return r;
  }
  r.actual_rmse = err_fn(*actual, all);
  const auto at_least = std::count_if(r.simulated_rmse.begin(), r.simulated_rmse.end(),
                                      [&](double v) { return v >= r.actual_rmse; });
  r.p_value = static_cast<double>(at_least) / static_cast<double>(sims.size());
  return r;
}

}  // namespace

TailResult pvalue_from_tail(const std::vector<std::vector<double>>& sims, const std::vector<double>* actual,
                            Reference reference) {
  return tail(sims, actual, reference, reference_mean, scalar_rmse);
}

TailResult pvalue_from_tail_shares(const std::vector<std::vector<std::vector<double>>>& sims,
                                   const std::vector<std::vector<double>>* actual, Reference reference) {
  return tail(sims, actual, reference, reference_shares, share_rmse);
}

double quantile(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

double finite_mean(const std::vector<double>& v) {
  double s = 0.0;
  int c = 0;
  for (double x : v)
    if (std::isfinite(x)) s += x, ++c;
  return c > 0 ? s / c : kNaN;
}

void fill_rows(MetricReport& r, const std::vector<std::vector<double>>& columns) {
  for (const auto& col : columns) {
    r.mean.push_back(finite_mean(col));
    r.lower.push_back(quantile(col, 0.025));
    r.upper.push_back(quantile(col, 0.975));
  }
}

}  // namespace

std::vector<MetricReport> build_report(const std::vector<SimulationOutcome>& outcomes,
                                       const SimulationOutcome* actual, Reference reference) {
  if (outcomes.size() < 2) throw UsageError("a report needs at least 2 simulations");
  std::vector<MetricReport> out;
  for (const auto& [grade, first] : outcomes.front().grades) {
    const GradeOutcome* act = nullptr;
    if (actual) {
      auto it = actual->grades.find(grade);
      if (it == actual->grades.end())
        throw DataError("actual outcomes lack grade " + std::string(to_string(grade)));
      act = &it->second;
    }
    const std::pair<const char*, std::vector<double> GradeOutcome::*> scalars[] = {
        {"unassigned", &GradeOutcome::unassigned},
        {"access", &GradeOutcome::access},
        {"distance", &GradeOutcome::distance}};
    for (const auto& [name, member] : scalars) {
      MetricReport r;
      r.grade = grade;
      r.metric = name;
      std::vector<std::vector<double>> sims;
      for (const auto& o : outcomes) sims.push_back(o.grades.at(grade).*member);
      std::vector<std::vector<double>> columns(kNumNeighborhoods);
      for (const auto& s : sims)
        for (std::size_t n = 0; n < s.size(); ++n) columns[n].push_back(s[n]);
      for (int n = 0; n < kNumNeighborhoods; ++n) {
        r.neighborhood.push_back(n);
        r.school.push_back(-1);
      }
      fill_rows(r, columns);
      if (act) {
        r.has_actual = true;
        r.actual = act->*member;
      }
      r.tail = pvalue_from_tail(sims, act ? &(act->*member) : nullptr, reference);
      out.push_back(std::move(r));
    }
    for (int k = 1; k <= 3; ++k) {
      MetricReport r;
      r.grade = grade;
      r.metric = "top" + std::to_string(k);
      std::vector<Shares> sims;
      for (const auto& o : outcomes) sims.push_back(o.grades.at(grade).shares[static_cast<std::size_t>(k - 1)]);
      const std::size_t ns = [&] {
        for (const auto& s : sims)
          for (const auto& v : s)
            if (!v.empty()) return v.size();
        return std::size_t{0};
      }();
      std::vector<std::vector<double>> columns;
      for (int n = 0; n < kNumNeighborhoods; ++n)
        for (std::size_t j = 0; j < ns; ++j) {
          r.neighborhood.push_back(n);
          r.school.push_back(static_cast<int>(j));
          std::vector<double> col;
          for (const auto& s : sims) col.push_back(s[static_cast<std::size_t>(n)].empty() ? kNaN : s[static_cast<std::size_t>(n)][j]);
          columns.push_back(std::move(col));
          if (act) {
            const auto& a = act->shares[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(n)];
            r.actual.push_back(a.empty() ? kNaN : a[j]);
          }
        }
      fill_rows(r, columns);
      r.has_actual = act != nullptr;
      r.tail = pvalue_from_tail_shares(sims, act ? &act->shares[static_cast<std::size_t>(k - 1)] : nullptr, reference);
      out.push_back(std::move(r));
    }
  }
  return out;
}

namespace {

std::string cell(double v) { return std::isfinite(v) ? csv::format_double(v) : std::string(); }

}  // namespace

void write_report(const std::string& dir, const std::vector<MetricReport>& report, const ProgramTable& programs) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  csv::Writer summary((fs::path(dir) / "summary.csv").string());
  summary.row({"grade", "metric", "expected_rmse", "actual_rmse", "p_value"});
  for (const auto& r : report) {
    const std::string stem = std::string(to_string(r.grade)) + "_" + r.metric;
    {
      csv::Writer w((fs::path(dir) / (stem + ".csv")).string());
      std::vector<std::string> header = {"neighborhood", "name"};
      const bool shares = r.school.front() >= 0;
      if (shares) header.push_back("school");
      for (const char* c : {"mean", "ci_low", "ci_high"}) header.push_back(c);
      if (r.has_actual) header.push_back("actual");
      w.row(header);
      for (std::size_t i = 0; i < r.mean.size(); ++i) {
        std::vector<std::string> row = {std::to_string(r.neighborhood[i]),
                                        std::string(neighborhood_name(r.neighborhood[i]))};
        if (shares) row.push_back(programs.schools()[static_cast<std::size_t>(r.school[i])]);
        row.push_back(cell(r.mean[i]));
        row.push_back(cell(r.lower[i]));
        row.push_back(cell(r.upper[i]));
        if (r.has_actual) row.push_back(cell(r.actual[i]));
        w.row(row);
      }
    }
    {
      csv::Writer w((fs::path(dir) / (stem + "_tail.csv")).string());
      w.row({"rmse", "survival"});
      auto sorted = r.tail.simulated_rmse;
      std::sort(sorted.begin(), sorted.end());
      const double n = static_cast<double>(sorted.size());
      for (std::size_t i = 0; i < sorted.size(); ++i)
        w.row({csv::format_double(sorted[i]), csv::format_double((n - static_cast<double>(i)) / n)});
    }
    summary.row({std::string(to_string(r.grade)), r.metric, cell(r.tail.expected_rmse), cell(r.tail.actual_rmse),
                 cell(r.tail.p_value)});
  }
}

}  // namespace schoolchoice
