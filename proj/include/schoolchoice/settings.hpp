#pragma once

#include <map>
#include <string>
#include <vector>

#include "schoolchoice/config.hpp"
#include "schoolchoice/mixed_logit.hpp"
#include "schoolchoice/simulation.hpp"
#include "schoolchoice/synthetic.hpp"

// Typed views of a Config. Missing keys keep the struct defaults; malformed
// values throw UsageError naming the key. Keys are listed in docs/configuration.md.
namespace schoolchoice {

MenuPolicy menu_policy_from(const Config& config);
SyntheticConfig synthetic_config_from(const Config& config);
HistoryConfig history_config_from(const Config& config);
ChainConfig chain_config_from(const Config& config);
SimulationConfig simulation_config_from(const Config& config);
Reference reference_from(const Config& config);

// program_id,grade,capacity rows; grades absent from the file are not set.
std::map<Grade, std::vector<int>> read_capacity_table(const std::string& path, const ProgramTable& programs);
void write_capacity_table(const std::string& path, const ProgramTable& programs,
                          const std::map<Grade, std::vector<int>>& capacity);

}  // namespace schoolchoice
