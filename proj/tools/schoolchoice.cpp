#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "schoolchoice/csv.hpp"
#include "schoolchoice/manifest.hpp"
#include "schoolchoice/pipeline.hpp"
#include "schoolchoice/settings.hpp"

namespace fs = std::filesystem;
using namespace schoolchoice;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kNumerical = 4 };

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> sims;
  std::optional<int> threads;
  std::string trace;
};

Config effective_config(const Globals& g) {
  Config c = g.config_path.empty() ? Config() : Config::load(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) c.set("run.seed", std::to_string(*g.seed));
  if (g.sims) c.set("simulation.n", std::to_string(*g.sims));
  if (g.threads) c.set("run.threads", std::to_string(*g.threads));
  return c;
}

std::uint64_t seed_of(const Config& c) { return static_cast<std::uint64_t>(c.get_int("run.seed", 1)); }

RunManifest make_manifest(const CLI::App& sub, const Config& c, const Globals& g) {
  RunManifest m(sub.get_name(), c.canonical() + "\n" + sub.config_to_str(true, false), seed_of(c));
  if (!g.config_path.empty()) m.add_input(g.config_path);
  return m;
}

std::string parent_dir(const std::string& file) {
  const fs::path p = fs::path(file).parent_path();
  return p.empty() ? std::string(".") : p.string();
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---- gen-synthetic --------------------------------------------------------

struct GenArgs {
  std::string out;
  bool history = false;
};

void run_gen(const CLI::App& sub, const Globals& g, const GenArgs& a) {
  const Config c = effective_config(g);
  RunManifest m = make_manifest(sub, c, g);
  Stopwatch t;
  const SyntheticConfig sc = synthetic_config_from(c);
  if (a.history) {
    const auto years = generate_history(sc, history_config_from(c));
    save_history(years, a.out);
    for (const auto& d : years)
      std::cout << d.year << ": " << d.size() << " students, " << d.programs.size() << " programs\n";
  } else {
    const Dataset d = generate_synthetic(sc);
    save_dataset(d, a.out);
    std::cout << d.year << ": " << d.size() << " students, " << d.programs.size() << " programs\n";
  }
  m.add_timing("generate", t.seconds());
  m.write(a.out);
}

// ---- estimate -------------------------------------------------------------

struct EstimateArgs {
  std::string model;
  std::string spec;
  std::string data;
  std::string out;
  std::string denominator;
  std::optional<long> iterations, burn_in, thin;
};

void print_logit(const LogitFit& fit) {
  const Eigen::VectorXd se = fit.standard_errors();
  std::cout << "log-likelihood " << fit.log_likelihood << " (" << fit.n_students << " students, "
            << fit.iterations << " iterations)\n";
  for (std::size_t k = 0; k < fit.feature_names.size(); ++k)
    std::cout << std::left << std::setw(34) << fit.feature_names[k] << std::right << std::setw(10) << std::fixed
              << std::setprecision(3) << fit.params.beta[static_cast<Eigen::Index>(k)] << std::setw(10)
              << se[static_cast<Eigen::Index>(k)] << "\n";
  std::cout.unsetf(std::ios::floatfield);
}

void run_estimate(const CLI::App& sub, const Globals& g, const EstimateArgs& a) {
  Config c = effective_config(g);
  if (a.iterations) c.set("mcmc.iterations", std::to_string(*a.iterations));
  if (a.burn_in) c.set("mcmc.burn_in", std::to_string(*a.burn_in));
  if (a.thin) c.set("mcmc.thin", std::to_string(*a.thin));
  const DemandKind kind = parse_demand_kind(a.model == "mlogit" ? "mixed" : a.model);
  const Denominator denominator =
      parse_denominator(a.denominator.empty() ? c.get_string("likelihood.denominator", "ranked") : a.denominator);
  const MenuPolicy policy = menu_policy_from(c);

  RunManifest m = make_manifest(sub, c, g);
  Stopwatch t;
  if (kind == DemandKind::Naive) {
    save_naive_demand(a.out);
    m.add_timing("estimate", t.seconds());
    m.write(parent_dir(a.out));
    std::cout << "naive rule model: nothing to estimate\n";
    return;
  }
  const Dataset d = load_dataset(a.data);
  m.add_input(a.data);
  m.add_timing("load", t.seconds());
  print_warnings(d.warnings);
  Stopwatch fit_time;
  if (kind == DemandKind::Logit) {
    const FeatureSpec spec = feature_spec(a.spec.empty() ? "reduced" : a.spec);
    const LogitFit fit = fit_mle(d, spec, denominator, &policy);
    save_logit_demand(a.out, fit);
    print_logit(fit);
  } else {
    const FeatureSpec spec = feature_spec(a.spec.empty() ? "mixed" : a.spec);
    ChainConfig cc = chain_config_from(c);
    std::ofstream trace;
    if (!g.trace.empty()) {
      trace.open(g.trace);
      if (!trace) throw DataError("cannot write " + g.trace);
      cc.trace = &trace;
    }
    const MixedFit fit = fit_mixed(d, spec, denominator, &policy, cc);
    save_mixed_demand(a.out, fit);
    std::cout << fit.chain.samples.size() << " retained samples; acceptance gamma " << fit.chain.gamma_acceptance
              << ", hmc " << fit.chain.hmc_acceptance << "\n";
    for (const auto& r : fit.summary.rows)
      std::cout << std::left << std::setw(40) << r.name << std::right << std::setw(10) << std::fixed
                << std::setprecision(3) << r.mean << std::setw(10) << r.sd << "\n";
    std::cout.unsetf(std::ios::floatfield);
  }
  m.add_timing("estimate", fit_time.seconds());
  m.write(parent_dir(a.out));
}

// ---- forecast-pool --------------------------------------------------------

struct PoolArgs {
  std::string history;
  int target_year = 0;
  std::string out;
  int draws = 0;
};

void run_pool(const CLI::App& sub, const Globals& g, const PoolArgs& a) {
  const Config c = effective_config(g);
  RunManifest m = make_manifest(sub, c, g);
  Stopwatch t;
  const auto years = load_history(a.history);
  m.add_input(a.history);
  const ParticipationModel model = fit_participation(years, a.target_year);
  print_warnings(model.warnings);
  {
    fs::create_directories(parent_dir(a.out));
    std::ofstream out(a.out);
    if (!out) throw DataError("cannot write " + a.out);
    out << to_json(model).dump(2) << "\n";
  }
  std::cout << "new applicants " << a.target_year << ": " << model.total_new.mean << " (sd " << model.total_new.sd
            << ")\n";
  if (a.draws > 0) {
    const ApplicantBase base = make_applicant_base(years.back());
    const std::string path = (fs::path(parent_dir(a.out)) / "pool_draws.csv").string();
    csv::Writer w(path);
    w.row({"draw", "grade", "neighborhood", "new", "continuing"});
    for (int s = 0; s < a.draws; ++s) {
      Rng rng = make_rng(seed_of(c), "population", static_cast<std::uint64_t>(s));
      const PoolDraw p = draw_applicant_pool(model, base, rng);
      std::map<Cell, int> cont;
      for (const auto& st : p.students)
        if (st.is_continuing()) ++cont[{st.grade, st.neighborhood}];
      for (const auto& [cell, n] : p.new_counts)
        w.row({std::to_string(s), std::string(to_string(cell.first)), std::to_string(cell.second), std::to_string(n),
               std::to_string(cont[cell])});
    }
  }
  m.add_timing("forecast-pool", t.seconds());
  m.write(parent_dir(a.out));
}

// ---- backtest / forecast --------------------------------------------------

struct SimArgs {
  std::string history;
  int year = 0;
  std::string demand;
  std::string participation;
  std::string capacity;
  int capacity_add = 0;
  std::string out;
};

void run_sim(const CLI::App& sub, const Globals& g, const SimArgs& a, bool backtest) {
  const Config c = effective_config(g);
  ForecastOptions o;
  o.simulation = simulation_config_from(c);
  o.reference = reference_from(c);
  o.capacity_add = a.capacity_add;
  if (o.simulation.n_simulations < 2)
    throw UsageError("at least 2 simulations are needed to form confidence intervals");

  RunManifest m = make_manifest(sub, c, g);
  Stopwatch t;
  const auto years = load_history(a.history);
  m.add_input(a.history);
  const DemandModel demand = load_demand(a.demand);
  m.add_input(a.demand);
  std::optional<ParticipationModel> participation;
  if (!a.participation.empty()) {
    std::ifstream in(a.participation);
    if (!in) throw DataError("cannot read " + a.participation);
    participation = participation_from_json(nlohmann::json::parse(in));
    m.add_input(a.participation);
  }
  const Dataset* actual = nullptr;
  if (backtest) {
    for (const auto& d : years)
      if (d.year == std::to_string(a.year)) actual = &d;
    if (!actual) throw DataError("backtest needs actual data for " + std::to_string(a.year) + " in " + a.history);
    if (!actual->has_assignments() && actual->rankings.empty())
      throw DataError("actual year " + actual->year + " has no rankings");
  }
  if (!a.capacity.empty()) {
    const Dataset* base = nullptr;
    for (const auto& d : years)
      if (std::stoi(d.year) < a.year) base = &d;
    if (!base) throw DataError("no history year before " + std::to_string(a.year));
    o.capacity = read_capacity_table(a.capacity, base->programs);
    m.add_input(a.capacity);
  }
  m.add_timing("load", t.seconds());

  Stopwatch sim_time;
  const ForecastResult r =
      run_forecast(years, a.year, demand, o, actual, participation ? &*participation : nullptr);
  m.add_timing("simulate", sim_time.seconds());
  print_warnings(r.participation.warnings);

  fs::create_directories(a.out);
  const Dataset* base = nullptr;
  for (const auto& d : years)
    if (std::stoi(d.year) < a.year) base = &d;
  write_report(a.out, r.report, base->programs);
  write_capacity_table((fs::path(a.out) / "capacity.csv").string(), base->programs, r.capacity);
  {
    std::ofstream out(fs::path(a.out) / "participation.json");
    out << to_json(r.participation).dump(2) << "\n";
  }
  for (const auto& rep : r.report) {
    if (rep.metric.rfind("top", 0) == 0 && rep.metric != "top1") continue;
    std::cout << to_string(rep.grade) << " " << std::left << std::setw(11) << rep.metric << std::right;
    if (rep.has_actual)
      std::cout << " rmse " << rep.tail.actual_rmse << " expected " << rep.tail.expected_rmse << " p " << rep.tail.p_value;
    else
      std::cout << " expected rmse " << rep.tail.expected_rmse;
    std::cout << "\n";
  }
  m.write(a.out);
}

// ---- da-run ---------------------------------------------------------------

struct DaArgs {
  std::string data;
  std::string out;
  std::string capacity;
  bool walk_zone = false;
};

void run_da(const CLI::App& sub, const Globals& g, const DaArgs& a) {
  const Config c = effective_config(g);
  RunManifest m = make_manifest(sub, c, g);
  Stopwatch t;
  const Dataset d = load_dataset(a.data);
  m.add_input(a.data);
  print_warnings(d.warnings);
  std::map<Grade, std::vector<int>> caps;
  if (!a.capacity.empty()) {
    caps = read_capacity_table(a.capacity, d.programs);
    m.add_input(a.capacity);
  }
  const PriorityRule rule = a.walk_zone || c.get_bool("simulation.walk_zone_priority", false)
                                ? walk_zone_priority(d.distance)
                                : standard_priority();
  // One market per grade; the combined matching is written in input order.
  Matching all;
  all.student_program.assign(d.size(), -1);
  all.round_admitted.assign(d.size(), 0);
  for (Grade grade : {Grade::K0, Grade::K1, Grade::K2}) {
    std::vector<Student> students;
    std::vector<std::vector<int>> rankings;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.students[i].grade == grade) {
        students.push_back(d.students[i]);
        rankings.push_back(d.rankings[i]);
        index.push_back(i);
      }
    if (students.empty()) continue;
    std::vector<int> cap;
    if (auto it = caps.find(grade); it != caps.end()) {
      cap = it->second;
    } else {
      for (const auto& p : d.programs.programs()) cap.push_back(p.capacity);
    }
    const Market market = make_market(students, rankings, d.programs, cap, rule);
    const Matching mt = deferred_acceptance(market);
    int assigned = 0;
    for (std::size_t k = 0; k < index.size(); ++k) {
      all.student_program[index[k]] = mt.student_program[k];
      all.round_admitted[index[k]] = mt.round_admitted[k];
      assigned += mt.student_program[k] >= 0;
    }
    all.rounds = std::max(all.rounds, mt.rounds);
    std::cout << to_string(grade) << ": " << assigned << " of " << students.size() << " assigned in " << mt.rounds
              << " rounds\n";
  }
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_matching_csv(a.out, d.students, d.programs, all);
  m.add_timing("da", t.seconds());
  m.write(parent_dir(a.out));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"School-choice demand estimation, applicant-pool forecasting and assignment simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "Override a configuration key (key=value)");
  app.add_option("--seed", g.seed, "Master random seed");
  app.add_option("--sims", g.sims, "Number of simulated markets");
  app.add_option("--threads", g.threads, "Worker threads (default: all available)")->check(CLI::PositiveNumber);
  app.add_option("--trace", g.trace, "Per-iteration sampler diagnostics CSV");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a synthetic application year or history");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_flag("--history", gen.history, "Generate consecutive years into <out>/<year>/");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Fit a demand model");
  est_cmd->add_option("--model", est.model, "naive, logit or mixed (mlogit)")->required();
  est_cmd->add_option("--spec", est.spec, "Feature specification: simple, full, reduced, mixed");
  est_cmd->add_option("--data", est.data, "Dataset directory");
  est_cmd->add_option("--out", est.out, "Output fit file (JSON)")->required();
  est_cmd->add_option("--denominator", est.denominator, "ranked or full_menu (default: likelihood.denominator)");
  est_cmd->add_option("--iters", est.iterations, "MCMC iterations");
  est_cmd->add_option("--burn-in", est.burn_in, "MCMC burn-in iterations");
  est_cmd->add_option("--thin", est.thin, "Keep every n-th post burn-in draw");

  PoolArgs pool;
  auto* pool_cmd = app.add_subcommand("forecast-pool", "Fit the applicant participation model");
  pool_cmd->add_option("--history", pool.history, "History directory with one sub-directory per year")->required();
  pool_cmd->add_option("--target-year", pool.target_year, "Year to forecast")->required();
  pool_cmd->add_option("--out", pool.out, "Output model file (JSON)")->required();
  pool_cmd->add_option("--draws", pool.draws, "Also write this many sampled cell counts to pool_draws.csv");

  SimArgs bt, fc;
  auto* bt_cmd = app.add_subcommand("backtest", "Simulate a past year and compare with its outcomes");
  auto* fc_cmd = app.add_subcommand("forecast", "Simulate a future year");
  for (auto [cmd, args] : {std::pair{bt_cmd, &bt}, std::pair{fc_cmd, &fc}}) {
    cmd->add_option("--history", args->history, "History directory with one sub-directory per year")->required();
    cmd->add_option("--year", args->year, "Year to simulate")->required();
    cmd->add_option("--demand", args->demand, "Demand model file from estimate")->required();
    cmd->add_option("--participation", args->participation, "Participation model from forecast-pool");
    cmd->add_option("--capacity", args->capacity, "Capacity table (program_id,grade,capacity)");
    cmd->add_option("--capacity-add", args->capacity_add, "Seats added to every program");
    cmd->add_option("--out", args->out, "Report directory")->required();
  }

  DaArgs da;
  auto* da_cmd = app.add_subcommand("da-run", "Run deferred acceptance on one dataset");
  da_cmd->add_option("--data", da.data, "Dataset directory")->required();
  da_cmd->add_option("--out", da.out, "Matching CSV")->required();
  da_cmd->add_option("--capacity", da.capacity, "Capacity table (program_id,grade,capacity)");
  da_cmd->add_flag("--walk-zone-priority", da.walk_zone, "Give walk-zone applicants a priority level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
#ifdef _OPENMP
    if (g.threads) omp_set_num_threads(*g.threads);
#endif
    if (*gen_cmd) run_gen(*gen_cmd, g, gen);
    if (*est_cmd) {
      if (est.model != "naive" && est.data.empty()) throw UsageError("estimate --data is required");
      run_estimate(*est_cmd, g, est);
    }
    if (*pool_cmd) run_pool(*pool_cmd, g, pool);
    if (*bt_cmd) run_sim(*bt_cmd, g, bt, true);
    if (*fc_cmd) run_sim(*fc_cmd, g, fc, false);
    if (*da_cmd) run_da(*da_cmd, g, da);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
