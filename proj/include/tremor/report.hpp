#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "tremor/analysis.hpp"
#include "tremor/calibration.hpp"
#include "tremor/types.hpp"

namespace tremor {

nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const Modes& modes);
nlohmann::json to_json(const Histogram& histogram);
nlohmann::json to_json(const GaussianFit& fit);
nlohmann::json to_json(const CalibrationResult& result);
nlohmann::json to_json(const BacktestReport& report);
nlohmann::json to_json(const SyncCurve& curve);
nlohmann::json to_json(const std::vector<TremorPoint>& series);

// bin_lo,bin_hi,probability,count
void write_sync_csv(std::ostream& out, const SyncCurve& curve);
// date,a_value,world_index
void write_tremor_csv(std::ostream& out, const std::vector<TremorPoint>& series);

}  // namespace tremor
