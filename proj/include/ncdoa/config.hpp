#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncdoa/bench.hpp"
#include "ncdoa/estimator.hpp"
#include "ncdoa/geometry.hpp"
#include "ncdoa/signal.hpp"

namespace ncdoa {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent configuration document.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Scenario document plus what the estimate command needs to run it.
struct ScenarioConfig {
    Scenario scenario;
    std::size_t d_sources = 0;
    EstimatorOptions estimator{};
    /// Observation CSV to load instead of synthesizing.
    std::optional<std::filesystem::path> data_file;
    /// Noise variance used with data_file; defaults to the scenario SNR.
    std::optional<double> noise_var;
};

struct CampaignConfig {
    std::string name;
    Campaign campaign;
};

SubarrayPartition partition_from_json(const nlohmann::json& j);
nlohmann::json partition_to_json(const SubarrayPartition& partition);
nlohmann::json weights_to_json(const WeightFunction& w);

EstimatorOptions estimator_from_json(const nlohmann::json& j);
nlohmann::json estimator_to_json(const EstimatorOptions& options);

/// Relative data_file paths resolve against base_dir.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json scenario_to_json(const ScenarioConfig& config);

/// Accepts one campaign object or {"campaigns": [...]}.
std::vector<CampaignConfig> campaigns_from_json(const nlohmann::json& j);
nlohmann::json campaign_to_json(const CampaignConfig& config);

nlohmann::json estimate_to_json(const EstimateResult& result);

/// Reads and parses a JSON file; throws ConfigError on I/O or syntax errors.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// JSON Schema documents for the scenario and campaign files.
nlohmann::json scenario_schema();
nlohmann::json campaign_schema();

} // namespace ncdoa
