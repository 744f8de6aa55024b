#include "schoolchoice/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace schoolchoice {

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

int year_of(const Dataset& d) {
  try {
    return std::stoi(d.year);
  } catch (const std::exception&) {
    throw DataError("dataset year '" + d.year + "' is not a number");
  }
}

}  // namespace

MixedFit fit_mixed(const Dataset& dataset, const FeatureSpec& spec, Denominator denominator,
                   const MenuPolicy* policy, const ChainConfig& config) {
  if (spec.random.empty()) throw UsageError("specification '" + spec.name + "' has no random coefficients");
  std::vector<ChoiceMenu> menus;
  if (denominator == Denominator::FullMenu) {
    if (!policy) throw UsageError("full_menu likelihood needs a menu policy");
    menus = build_menus(dataset.students, dataset.programs, *policy, dataset.distance);
  }
  const ChoiceData data = build_choice_data(dataset.students, dataset.rankings, dataset.programs, dataset.distance,
                                            spec, denominator, menus.empty() ? nullptr : &menus);
  check_finite(data);
  MixedFit fit;
  fit.spec = spec;
  fit.layout = default_layout(spec);
  fit.names = {spec.fixed_names(), spec.random_names(), dataset.programs.schools()};
  fit.chain = run_chain(data, fit.layout, config);
  fit.summary = summarize_posterior(fit.chain.samples, fit.layout, fit.names);
  return fit;
}

void save_logit_demand(const std::string& path, const LogitFit& fit) { write_json(path, to_json(fit)); }

void save_naive_demand(const std::string& path) { write_json(path, {{"model", "naive"}}); }

void save_mixed_demand(const std::string& path, const MixedFit& fit) {
  const std::string samples = sibling(path, ".samples.csv");
  const std::string events = sibling(path, ".events.csv");
  nlohmann::json j;
  j["model"] = "mixed";
  j["spec"] = fit.spec.name;
  j["layout"] = layout_to_json(fit.layout);
  j["features"] = {{"fixed", fit.names.fixed}, {"random", fit.names.random}};
  j["schools"] = fit.names.schools;
  j["samples"] = fs::path(samples).filename().string();
  j["events"] = fs::path(events).filename().string();
  j["summary"] = to_json(fit.summary);
  j["acceptance"] = {{"gamma", fit.chain.gamma_acceptance},
                     {"hmc", fit.chain.hmc_acceptance},
                     {"mwg", fit.chain.mwg_acceptance}};
  write_json(path, j);
  write_samples_csv(samples, fit.chain.samples, fit.layout, fit.names);
  write_events_csv(events, fit.chain.events);
}

DemandModel load_demand(const std::string& path) {
  const nlohmann::json j = read_json(path);
  DemandModel m;
  try {
    m.kind = parse_demand_kind(j.at("model").get<std::string>());
    switch (m.kind) {
      case DemandKind::Naive: break;
      case DemandKind::Logit:
        m.logit = logit_fit_from_json(j);
        m.spec = feature_spec(m.logit->spec_name);
        break;
      case DemandKind::Mixed: {
        m.spec = feature_spec(j.at("spec").get<std::string>());
        const auto layout = layout_from_json(j.at("layout"));
        ParameterNames names{j.at("features").at("fixed").get<std::vector<std::string>>(),
                             j.at("features").at("random").get<std::vector<std::string>>(),
                             j.at("schools").get<std::vector<SchoolId>>()};
        if (names.fixed != m.spec.fixed_names() || names.random != m.spec.random_names())
          throw DataError("feature names do not match specification '" + m.spec.name + "'");
        const fs::path samples = fs::path(path).parent_path() / j.at("samples").get<std::string>();
        m.posterior = read_samples_csv(samples.string(), layout, names);
        if (m.posterior.empty()) throw DataError("no posterior samples in " + samples.string());
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  } catch (const UsageError& e) {
    throw DataError(path + ": " + e.what());
  }
  return m;
}

std::vector<Dataset> load_history(const std::string& dir) {
  std::vector<Dataset> out;
  for (const auto& y : list_years(dir)) out.push_back(load_dataset((fs::path(dir) / y).string()));
  if (out.empty()) throw DataError("no year directories in " + dir);
  return out;
}

void save_history(const std::vector<Dataset>& years, const std::string& dir) {
  for (const auto& d : years) save_dataset(d, (fs::path(dir) / d.year).string());
}

ForecastResult run_forecast(const std::vector<Dataset>& history, int target_year, const DemandModel& demand,
                            const ForecastOptions& options, const Dataset* actual,
                            const ParticipationModel* participation) {
  std::vector<const Dataset*> before;
  for (const auto& d : history)
    if (year_of(d) < target_year) before.push_back(&d);
  if (before.empty()) throw DataError("no history year before " + std::to_string(target_year));
  std::sort(before.begin(), before.end(), [](const Dataset* a, const Dataset* b) { return year_of(*a) < year_of(*b); });
  const Dataset& base = *before.back();
  if (!base.has_assignments())
    throw DataError("base year " + base.year + " has no assignments to derive continuing students and capacities");

  if (demand.kind == DemandKind::Logit && demand.logit->schools != base.programs.schools())
    throw DataError("demand model schools do not match the base-year program table");

  ForecastResult r;
  if (participation) {
    r.participation = *participation;
  } else {
    std::vector<Dataset> prior;
    for (const Dataset* d : before) prior.push_back(*d);
    r.participation = fit_participation(prior, target_year);
  }

  for (Grade g : options.simulation.grades) {
    auto it = options.capacity.find(g);
    std::vector<int> cap = it != options.capacity.end() ? it->second : infer_capacities(base, g);
    if (cap.size() != base.programs.size())
      throw DataError("capacity table for " + std::string(to_string(g)) + " has the wrong number of programs");
    for (int& c : cap) c = std::max(0, c + options.capacity_add);
    r.capacity[g] = std::move(cap);
  }

  const ApplicantBase applicant_base = make_applicant_base(base);
  SimulationInputs in;
  in.demand = &demand;
  in.participation = &r.participation;
  in.base = &applicant_base;
  in.programs = &base.programs;
  in.distance = &base.distance;
  in.capacity = r.capacity;
  r.outcomes = run_simulation(options.simulation, in);
  if (actual) {
    if (actual->programs.schools() != base.programs.schools())
      throw DataError("actual year " + actual->year + " has a different school list");
    SimulationInputs observed = in;
    observed.distance = &actual->distance;
    r.actual = evaluate_observed(options.simulation, observed, *actual);
  }
  r.report = build_report(r.outcomes, r.actual ? &*r.actual : nullptr, options.reference);
  return r;
}

}  // namespace schoolchoice
