#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vispr/controller.hpp"

namespace vispr {

nlohmann::json to_json(const GapReport& g);
GapReport gap_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ThresholdPoint& p);
ThresholdPoint threshold_point_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PathStats& s);
PathStats path_stats_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

// Aligned text table: one row per path plus overall, per-bucket accuracy
// columns, then route counts, the confidence gap, and the threshold curve.
std::string render_report_text(const EvalReport& r);

void write_report(const std::filesystem::path& path, const EvalReport& r);
EvalReport load_report(const std::filesystem::path& path);

}  // namespace vispr
