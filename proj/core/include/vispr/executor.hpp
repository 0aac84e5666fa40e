#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vispr/backend.hpp"
#include "vispr/modules.hpp"
#include "vispr/program.hpp"
#include "vispr/registry.hpp"
#include "vispr/types.hpp"

namespace vispr {

// Everything a module call can produce or consume at runtime.
using Value = std::variant<std::string, std::int64_t, double, Box, std::vector<std::string>,
                           FrameRange, std::vector<Frame>, std::vector<Clip>,
                           std::vector<SpanHit>, std::vector<TextSpan>, std::vector<TimeRange>,
                           std::vector<Detection>, McAnswer, Confidence>;

// Compact human-readable form, elided above `cap` characters.
std::string summarize_value(const Value& value, std::size_t cap = 4096);

enum class ExecStatus { Success, Failed };

enum class FailureKind {
  ParseError,
  ValidationError,
  UnresolvedVariable,
  BadArgument,
  BackendError,
  DomainError,
  Timeout,
  NoAnswer,
  Internal
};

const char* to_string(ExecStatus s);
const char* to_string(FailureKind k);
std::optional<FailureKind> failure_kind_from_string(const std::string& s);

struct Failure {
  std::string stage;  // "parse" or "step <i>:<module>"
  FailureKind kind = FailureKind::Internal;
  std::string message;

  bool operator==(const Failure&) const = default;
};

struct TraceEvent {
  int step_index = 0;
  std::string module;
  std::map<std::string, std::string> resolved_args;
  std::string output_summary;
  double duration_ms = 0;
};

struct ExecutionResult {
  ExecStatus status = ExecStatus::Failed;
  std::optional<std::string> answer;
  std::optional<Confidence> confidence;
  std::map<std::string, std::string> env_final;  // rendered bindings
  std::vector<TraceEvent> trace;
  std::optional<Failure> failure;
  double wall_time_ms = 0;
  std::size_t output_length = 0;  // rendered program text size

  bool ok() const { return status == ExecStatus::Success; }
};

struct ExecContext {
  std::string video_ref;
  std::string query;
  std::vector<std::string> choices;
};

struct ExecOptions {
  double statement_timeout_s = 60.0;
  std::size_t trace_value_cap = 4096;
};

// Runs statements in order against the backend.  Never throws: module errors,
// unresolved variables and per-statement timeouts all come back as
// status=Failed with the failing step recorded; fallback policy is the
// controller's job.
ExecutionResult execute(const Program& program, const std::shared_ptr<Backend>& backend,
                        const ExecContext& context, const Registry& registry,
                        const ExecOptions& options = {});

// parse + execute; grammar and validation errors map to status=Failed with
// stage="parse" so callers get one uniform failure channel.
ExecutionResult execute_text(const std::string& program_text,
                             const std::shared_ptr<Backend>& backend, const ExecContext& context,
                             const Registry& registry, const ExecOptions& options = {});

// Input-order results; runs are isolated and the batch equals map(execute)
// for every parallelism >= 1.
std::vector<ExecutionResult> execute_many(const std::vector<Program>& programs,
                                          const std::shared_ptr<Backend>& backend,
                                          const ExecContext& context, const Registry& registry,
                                          int parallelism, const ExecOptions& options = {});

}  // namespace vispr
