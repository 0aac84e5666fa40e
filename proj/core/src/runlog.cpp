#include "vispr/runlog.hpp"

#include <fstream>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json conf_to_json(const std::optional<Confidence>& c) {
  if (!c) return nullptr;
  return c->value();
}

std::optional<Confidence> conf_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Confidence{j.get<double>()};
}

json box_to_json(const Box& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box must be a 4-number array");
  return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

json to_json(const Literal& lit) {
  return std::visit(
      Overloaded{
          [](const std::string& s) { return json{{"type", "string"}, {"value", s}}; },
          [](std::int64_t i) { return json{{"type", "int"}, {"value", i}}; },
          [](double d) { return json{{"type", "float"}, {"value", d}}; },
          [](const Box& b) { return json{{"type", "box"}, {"value", box_to_json(b)}}; },
          [](const std::vector<std::string>& v) { return json{{"type", "list"}, {"value", v}}; },
      },
      lit.v);
}

Literal literal_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const json& value = j.at("value");
  Literal lit;
  if (type == "string") {
    lit.v = value.get<std::string>();
  } else if (type == "int") {
    lit.v = value.get<std::int64_t>();
  } else if (type == "float") {
    lit.v = value.get<double>();
  } else if (type == "box") {
    lit.v = box_from_json(value);
  } else if (type == "list") {
    lit.v = value.get<std::vector<std::string>>();
  } else {
    throw ValidationError("unknown literal type '" + type + "'");
  }
  return lit;
}

json to_json(const Failure& f) {
  return json{{"stage", f.stage}, {"kind", to_string(f.kind)}, {"message", f.message}};
}

Failure failure_from_json(const json& j) {
  Failure f;
  f.stage = j.at("stage").get<std::string>();
  auto kind = failure_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw ValidationError("unknown failure kind");
  f.kind = *kind;
  f.message = j.at("message").get<std::string>();
  return f;
}

json to_json(const TraceEvent& e) {
  return json{{"step_index", e.step_index},
              {"module", e.module},
              {"resolved_args", e.resolved_args},
              {"output_summary", e.output_summary},
              {"duration_ms", e.duration_ms}};
}

TraceEvent trace_event_from_json(const json& j) {
  TraceEvent e;
  e.step_index = j.at("step_index").get<int>();
  e.module = j.at("module").get<std::string>();
  e.resolved_args = j.at("resolved_args").get<std::map<std::string, std::string>>();
  e.output_summary = j.at("output_summary").get<std::string>();
  e.duration_ms = j.value("duration_ms", 0.0);
  return e;
}

json to_json(const ExecutionResult& r) {
  json trace = json::array();
  for (const auto& e : r.trace) trace.push_back(to_json(e));
  return json{{"status", to_string(r.status)},
              {"answer", r.answer ? json(*r.answer) : json(nullptr)},
              {"confidence", conf_to_json(r.confidence)},
              {"env_final", r.env_final},
              {"trace", std::move(trace)},
              {"failure", r.failure ? to_json(*r.failure) : json(nullptr)},
              {"wall_time_ms", r.wall_time_ms},
              {"output_length", r.output_length}};
}

ExecutionResult execution_result_from_json(const json& j) {
  ExecutionResult r;
  r.status = j.at("status").get<std::string>() == "success" ? ExecStatus::Success
                                                            : ExecStatus::Failed;
  if (!j.at("answer").is_null()) r.answer = j.at("answer").get<std::string>();
  r.confidence = conf_from_json(j.at("confidence"));
  r.env_final = j.at("env_final").get<std::map<std::string, std::string>>();
  for (const auto& e : j.at("trace")) r.trace.push_back(trace_event_from_json(e));
  if (!j.at("failure").is_null()) r.failure = failure_from_json(j.at("failure"));
  r.wall_time_ms = j.value("wall_time_ms", 0.0);
  r.output_length = j.at("output_length").get<std::size_t>();
  return r;
}

json to_json(const ParamBinding& b) {
  return json{{"statement_index", b.statement_index},
              {"param_name", b.param_name},
              {"value", to_json(b.value)}};
}

ParamBinding param_binding_from_json(const json& j) {
  ParamBinding b;
  b.statement_index = j.at("statement_index").get<std::size_t>();
  b.param_name = j.at("param_name").get<std::string>();
  b.value = literal_from_json(j.at("value"));
  return b;
}

json to_json(const SearchOutcome& o) {
  json variants = json::array();
  for (const auto& v : o.variant_results) {
    variants.push_back(json{{"binding", to_json(v.binding)},
                            {"memoized", v.memoized},
                            {"result", to_json(v.result)}});
  }
  return json{{"base_result", to_json(o.base_result)},
              {"variant_results", std::move(variants)},
              {"selected",
               json{{"answer", o.selected.answer},
                    {"confidence", conf_to_json(o.selected.confidence)},
                    {"binding",
                     o.selected.binding ? to_json(*o.selected.binding) : json(nullptr)}}},
              {"run_count", o.run_count}};
}

SearchOutcome search_outcome_from_json(const json& j) {
  SearchOutcome o;
  o.base_result = execution_result_from_json(j.at("base_result"));
  for (const auto& v : j.at("variant_results")) {
    VariantResult vr;
    vr.binding = param_binding_from_json(v.at("binding"));
    vr.memoized = v.at("memoized").get<bool>();
    vr.result = execution_result_from_json(v.at("result"));
    o.variant_results.push_back(std::move(vr));
  }
  const json& sel = j.at("selected");
  o.selected.answer = sel.at("answer").get<std::string>();
  o.selected.confidence = conf_from_json(sel.at("confidence"));
  if (!sel.at("binding").is_null()) {
    o.selected.binding = param_binding_from_json(sel.at("binding"));
  }
  o.run_count = j.at("run_count").get<int>();
  return o;
}

json to_json(const RunRecord& r) {
  json fast = nullptr;
  if (r.fast) {
    fast = json{{"choice", r.fast->choice}, {"confidence", r.fast->confidence.value()}};
  }
  return json{{"schema_version", kRunLogSchemaVersion},
              {"query_id", r.query_id},
              {"video_ref", r.video_ref},
              {"question", r.question},
              {"choices", r.choices},
              {"decision",
               json{{"path", to_string(r.decision.path)},
                    {"fast_confidence", conf_to_json(r.decision.fast_confidence)},
                    {"theta", r.decision.theta}}},
              {"planner_output", r.planner_output},
              {"fast", std::move(fast)},
              {"slow", r.slow ? to_json(*r.slow) : json(nullptr)},
              {"final_answer", r.final_answer},
              {"final_confidence", conf_to_json(r.final_confidence)},
              {"output_length", r.output_length},
              {"wall_time_ms", r.wall_time_ms},
              {"gold_answer", r.gold_answer ? json(*r.gold_answer) : json(nullptr)},
              {"duration_bucket",
               r.duration_bucket ? json(to_string(*r.duration_bucket)) : json(nullptr)}};
}

RunRecord run_record_from_json(const json& j) {
  const int version = j.value("schema_version", 0);
  if (version != kRunLogSchemaVersion) {
    throw ValidationError("unsupported run record schema version " + std::to_string(version));
  }
  RunRecord r;
  r.query_id = j.at("query_id").get<std::string>();
  r.video_ref = j.at("video_ref").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.choices = j.at("choices").get<std::vector<std::string>>();
  const json& d = j.at("decision");
  auto path = route_path_from_string(d.at("path").get<std::string>());
  if (!path) throw ValidationError("unknown route path");
  r.decision.path = *path;
  r.decision.fast_confidence = conf_from_json(d.at("fast_confidence"));
  r.decision.theta = d.at("theta").get<double>();
  r.planner_output = j.at("planner_output").get<std::string>();
  if (!j.at("fast").is_null()) {
    r.fast = McAnswer{j.at("fast").at("choice").get<std::string>(),
                      Confidence{j.at("fast").at("confidence").get<double>()}};
  }
  if (!j.at("slow").is_null()) r.slow = search_outcome_from_json(j.at("slow"));
  r.final_answer = j.at("final_answer").get<std::string>();
  r.final_confidence = conf_from_json(j.at("final_confidence"));
  r.output_length = j.at("output_length").get<std::size_t>();
  r.wall_time_ms = j.value("wall_time_ms", 0.0);
  if (!j.at("gold_answer").is_null()) r.gold_answer = j.at("gold_answer").get<std::string>();
  if (!j.at("duration_bucket").is_null()) {
    auto bucket = duration_bucket_from_string(j.at("duration_bucket").get<std::string>());
    if (!bucket) throw ValidationError("unknown duration bucket");
    r.duration_bucket = *bucket;
  }
  return r;
}

std::string run_log_line(const RunRecord& r) { return to_json(r).dump(); }

void append_run_log(const std::filesystem::path& path, const RunRecord& r) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw ValidationError("cannot open run log '" + path.string() + "' for append");
  out << run_log_line(r) << "\n";
}

void append_run_log(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw ValidationError("cannot open run log '" + path.string() + "' for append");
  for (const auto& r : records) out << run_log_line(r) << "\n";
}

std::vector<RunRecord> load_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open run log '" + path.string() + "'");
  std::vector<RunRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(run_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError("run log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

json strip_timings(json j) {
  if (j.is_object()) {
    j.erase("wall_time_ms");
    j.erase("duration_ms");
    for (auto& [key, value] : j.items()) value = strip_timings(std::move(value));
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_timings(std::move(value));
  }
  return j;
}

}  // namespace vispr
