#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vispr/executor.hpp"
#include "vispr/program.hpp"
#include "vispr/registry.hpp"

namespace vispr {

enum class Aggregation { Confidence, Voting };

const char* to_string(Aggregation a);
std::optional<Aggregation> aggregation_from_string(const std::string& s);

// Which searchable parameter families participate ("num_frames", "top_k",
// "intervals", "text_thr").  Empty set = no search, the base result stands.
struct SearchConfig {
  std::vector<std::string> enabled_params;
  Aggregation aggregation = Aggregation::Confidence;
  int parallelism = 1;
  bool memoize_base = true;

  bool enabled(const std::string& param) const;
};

struct VariantResult {
  ParamBinding binding;
  bool memoized = false;  // true when the binding equals the base configuration
  ExecutionResult result;
};

struct Selected {
  std::string answer;
  std::optional<Confidence> confidence;
  // Binding that produced the winning result; nullopt when the base run won.
  std::optional<ParamBinding> binding;
};

struct SearchOutcome {
  ExecutionResult base_result;
  std::vector<VariantResult> variant_results;
  Selected selected;
  int run_count = 0;  // variant executions attempted (memoized reuses included)
};

// (answer, confidence) chosen from a pooled result list, plus the index of the
// winning entry so callers can attribute it.
struct AggregateChoice {
  std::string answer;
  std::optional<Confidence> confidence;
  std::size_t index = 0;
};

// Highest confidence among successful results; ties keep the earliest entry.
// Results without a confidence rank below any with one.
// Throws DomainError when no result succeeded.
AggregateChoice aggregate_confidence(const std::vector<ExecutionResult>& results);

// Most frequent answer among successful results; reported confidence is the
// max within the winning answer's results.  Vote ties break by higher summed
// confidence, then earliest first occurrence.
AggregateChoice aggregate_voting(const std::vector<ExecutionResult>& results);

// Runs the base program, then one variant per (searchable param, space value)
// restricted to config.enabled_params, and aggregates everything into a final
// answer.  Variants run concurrently up to config.parallelism.  Throws
// DomainError when every pooled result failed.
SearchOutcome search(const Program& program, const std::shared_ptr<Backend>& backend,
                     const ExecContext& context, const Registry& registry,
                     const SearchConfig& config, const ExecOptions& options = {});

}  // namespace vispr
