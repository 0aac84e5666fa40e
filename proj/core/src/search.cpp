#include "vispr/search.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

bool succeeded(const ExecutionResult& r) {
  return r.status == ExecStatus::Success && r.answer.has_value();
}

double conf_or_zero(const ExecutionResult& r) {
  return r.confidence ? r.confidence->value() : 0.0;
}

// The value the base program already uses for a searchable parameter: the
// explicit literal if present, else the signature default.  A variable-valued
// argument has no static value, so it never matches.
const Literal* base_value(const Program& program, const Registry& registry,
                          const ParamBinding& binding) {
  const Statement& st = program.statements.at(binding.statement_index);
  if (const ArgValue* av = st.find_arg(binding.param_name)) {
    return av->is_var ? nullptr : &av->lit;
  }
  const ModuleSignature* sig = registry.find(st.module);
  if (!sig) return nullptr;
  for (const auto& param : sig->params) {
    if (param.name == binding.param_name && param.default_value) return &*param.default_value;
  }
  return nullptr;
}

}  // namespace

const char* to_string(Aggregation a) {
  return a == Aggregation::Confidence ? "confidence" : "voting";
}

std::optional<Aggregation> aggregation_from_string(const std::string& s) {
  if (s == "confidence") return Aggregation::Confidence;
  if (s == "voting") return Aggregation::Voting;
  return std::nullopt;
}

bool SearchConfig::enabled(const std::string& param) const {
  return std::find(enabled_params.begin(), enabled_params.end(), param) != enabled_params.end();
}

AggregateChoice aggregate_confidence(const std::vector<ExecutionResult>& results) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!succeeded(results[i])) continue;
    if (!best || conf_or_zero(results[i]) > conf_or_zero(results[*best])) best = i;
  }
  if (!best) throw DomainError("aggregate_confidence: no successful result");
  const auto& r = results[*best];
  return AggregateChoice{*r.answer, r.confidence, *best};
}

AggregateChoice aggregate_voting(const std::vector<ExecutionResult>& results) {
  struct Tally {
    int votes = 0;
    double conf_sum = 0.0;
    std::size_t first = 0;
    std::size_t best = 0;  // index of the max-confidence result for this answer
  };
  std::map<std::string, Tally> tallies;
  bool any = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!succeeded(results[i])) continue;
    any = true;
    auto [it, inserted] = tallies.try_emplace(*results[i].answer);
    Tally& t = it->second;
    if (inserted) {
      t.first = i;
      t.best = i;
    }
    t.votes += 1;
    t.conf_sum += conf_or_zero(results[i]);
    if (conf_or_zero(results[i]) > conf_or_zero(results[t.best])) t.best = i;
  }
  if (!any) throw DomainError("aggregate_voting: no successful result");

  const std::string* winner = nullptr;
  const Tally* winner_tally = nullptr;
  for (const auto& [answer, tally] : tallies) {
    if (!winner || tally.votes > winner_tally->votes ||
        (tally.votes == winner_tally->votes &&
         (tally.conf_sum > winner_tally->conf_sum ||
          (tally.conf_sum == winner_tally->conf_sum && tally.first < winner_tally->first)))) {
      winner = &answer;
      winner_tally = &tally;
    }
  }
  const auto& r = results[winner_tally->best];
  return AggregateChoice{*winner, r.confidence, winner_tally->best};
}

SearchOutcome search(const Program& program, const std::shared_ptr<Backend>& backend,
                     const ExecContext& context, const Registry& registry,
                     const SearchConfig& config, const ExecOptions& options) {
  if (config.parallelism < 1) throw DomainError("search: parallelism must be >= 1");

  SearchOutcome outcome;
  outcome.base_result = execute(program, backend, context, registry, options);

  std::vector<ParamBinding> bindings;
  for (auto& b : enumerate_bindings(program, registry)) {
    if (config.enabled(b.param_name)) bindings.push_back(std::move(b));
  }
  outcome.run_count = static_cast<int>(bindings.size());

  outcome.variant_results.resize(bindings.size());
  std::vector<std::size_t> pending;
  std::vector<Program> pending_programs;
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    VariantResult& vr = outcome.variant_results[i];
    vr.binding = bindings[i];
    const Literal* base = config.memoize_base ? base_value(program, registry, bindings[i]) : nullptr;
    if (base && *base == bindings[i].value) {
      vr.memoized = true;
      vr.result = outcome.base_result;
    } else {
      pending.push_back(i);
      pending_programs.push_back(substitute(program, bindings[i], registry));
    }
  }

  if (!pending.empty()) {
    auto results = execute_many(pending_programs, backend, context, registry, config.parallelism,
                                options);
    for (std::size_t j = 0; j < pending.size(); ++j) {
      outcome.variant_results[pending[j]].result = std::move(results[j]);
    }
  }

  std::vector<ExecutionResult> pooled;
  pooled.reserve(1 + outcome.variant_results.size());
  pooled.push_back(outcome.base_result);
  for (const auto& vr : outcome.variant_results) pooled.push_back(vr.result);

  AggregateChoice choice = config.aggregation == Aggregation::Voting
                               ? aggregate_voting(pooled)
                               : aggregate_confidence(pooled);
  outcome.selected.answer = choice.answer;
  outcome.selected.confidence = choice.confidence;
  if (choice.index > 0) {
    outcome.selected.binding = outcome.variant_results[choice.index - 1].binding;
  }
  return outcome;
}

}  // namespace vispr
