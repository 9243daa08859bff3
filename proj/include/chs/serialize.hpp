#pragma once

#include <json.hpp>

#include "chs/dataset.hpp"
#include "chs/select.hpp"
#include "chs/simulate.hpp"

namespace chs {

nlohmann::json to_json(const HyperparameterSetting& setting);
nlohmann::json to_json(const Interval& interval);
nlohmann::json to_json(const SelectionResult& result);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const GroundTruth& truth);
nlohmann::json to_json(const ScoreSummary& summary);
nlohmann::json to_json(const StudyReport& report);
nlohmann::json to_json(const BiasReport& report);
nlohmann::json to_json(const DropReport& report);

}  // namespace chs
