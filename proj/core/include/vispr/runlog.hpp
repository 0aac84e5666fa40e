#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vispr/controller.hpp"

namespace vispr {

inline constexpr int kRunLogSchemaVersion = 1;

nlohmann::json to_json(const Literal& lit);
Literal literal_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Failure& f);
Failure failure_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TraceEvent& e);
TraceEvent trace_event_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExecutionResult& r);
ExecutionResult execution_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ParamBinding& b);
ParamBinding param_binding_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SearchOutcome& o);
SearchOutcome search_outcome_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunRecord& r);  // carries schema_version
RunRecord run_record_from_json(const nlohmann::json& j);

// Single-line serialization used for the append-only log.
std::string run_log_line(const RunRecord& r);

void append_run_log(const std::filesystem::path& path, const RunRecord& r);
void append_run_log(const std::filesystem::path& path, const std::vector<RunRecord>& records);

// Loads every line; throws ValidationError naming the offending line number
// when one cannot be parsed.
std::vector<RunRecord> load_run_log(const std::filesystem::path& path);

// Recursively drops wall-clock fields ("wall_time_ms", "duration_ms") so
// tests can compare runs byte-for-byte.
nlohmann::json strip_timings(nlohmann::json j);

}  // namespace vispr
