#pragma once

#include <filesystem>
#include <span>

#include <json.hpp>

#include "cslg/bayes.hpp"
#include "cslg/experiment.hpp"
#include "cslg/grounding.hpp"
#include "cslg/percept_sim.hpp"

namespace cslg {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

Json scenario_config_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_config_from_json(const Json& j, ScenarioConfig base = {});

/// scenario.json: config echo, lexicon, prototypes, situations. Field order is fixed.
Json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const Json& j);

/// Reads the experiment config. Keys mirror the dotted names
/// (clustering.eps.shape, csl.aux_factor, bayes.K, ...); unknown keys are errors.
RunConfig run_config_from_json(const Json& j, RunConfig base = {});
Json run_config_to_json(const RunConfig& cfg);

Json snapshot_to_json(std::span<const MappingRecord> snapshot, std::size_t situation_index);

/// Fitted-model dump: theta rows, pi vectors, component Gaussians, assignments.
Json model_to_json(const bayes::ModelState& state);

Json summary_to_json(const Summary& s);
Summary summary_from_json(const Json& j);

}  // namespace cslg
