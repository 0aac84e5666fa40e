#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vispr/config.hpp"
#include "vispr/controller.hpp"
#include "vispr/dataset.hpp"
#include "vispr/service.hpp"

namespace vispr {

// Command cores shared by the CLI binary and the tests.  Each command catches
// domain errors and reports them through the exit code + output instead of
// throwing, mirroring process-level behaviour.
struct CommandResult {
  int exit_code = 0;
  std::string output;
};

// Human-readable view of one answered query: final answer, route path,
// confidence, and the per-module trace of the slow program when one ran.
std::string render_record_text(const RunRecord& record);

CommandResult cmd_gen_corpus(const Config& config, const std::filesystem::path& out_dir);

CommandResult cmd_run(const Config& config, const std::string& video_ref,
                      const std::string& question, const std::vector<std::string>& choices,
                      const std::string& query_id = "");

CommandResult cmd_eval(const Config& config, EvalMode mode = EvalMode::Adaptive,
                       std::size_t limit = 0,
                       const std::optional<std::filesystem::path>& report_out = std::nullopt);

CommandResult cmd_sweep_theta(const Config& config, const std::vector<double>& thetas,
                              std::size_t limit = 0,
                              const std::optional<std::filesystem::path>& out_dir = std::nullopt);

CommandResult cmd_build_dataset(
    const Config& config, const DatasetOptions& options, const std::filesystem::path& out,
    const std::optional<std::filesystem::path>& frequency_out = std::nullopt,
    std::size_t limit = 0);

// Recomputes the report named in `report_path` from the run log and compares
// byte for byte; exit 0 only on an exact match.
CommandResult cmd_replay(const Config& config, const std::filesystem::path& log_path,
                         const std::filesystem::path& report_path);

CommandResult cmd_registry(const Config& config);

}  // namespace vispr
