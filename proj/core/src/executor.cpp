#include "vispr/executor.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Argument shape problems found at dispatch (wrong runtime kind, empty
// coercion source); distinct from module DomainErrors.
struct BadArg : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Value value_from_literal(const Literal& lit) {
  return std::visit([](const auto& v) -> Value { return v; }, lit.v);
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os << d;
  return os.str();
}

const Value& arg(const std::map<std::string, Value>& args, const std::string& name) {
  auto it = args.find(name);
  if (it == args.end()) throw BadArg("missing argument '" + name + "'");
  return it->second;
}

std::string want_string(const std::map<std::string, Value>& args, const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw BadArg("argument '" + name + "' must be text");
}

std::int64_t want_int(const std::map<std::string, Value>& args, const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) {
    if (*d == std::floor(*d)) return static_cast<std::int64_t>(*d);
  }
  throw BadArg("argument '" + name + "' must be an integer");
}

double want_double(const std::map<std::string, Value>& args, const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw BadArg("argument '" + name + "' must be numeric");
}

// Timestamps accept numbers directly, or retrieval outputs, which coerce to
// the start of their first span (how planners chain get_clips/get_subtitles
// into the trim modules without arithmetic in the DSL).
double want_seconds(const std::map<std::string, Value>& args, const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* clips = std::get_if<std::vector<Clip>>(&v)) {
    if (clips->empty()) throw BadArg("argument '" + name + "': empty clip list");
    return clips->front().range.start;
  }
  if (const auto* hits = std::get_if<std::vector<SpanHit>>(&v)) {
    if (hits->empty()) throw BadArg("argument '" + name + "': empty span list");
    return hits->front().start;
  }
  if (const auto* spans = std::get_if<std::vector<TextSpan>>(&v)) {
    if (spans->empty()) throw BadArg("argument '" + name + "': empty span list");
    return spans->front().start;
  }
  throw BadArg("argument '" + name + "' must be seconds or a span-producing value");
}

std::vector<Frame> want_frames(const std::map<std::string, Value>& args,
                               const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* f = std::get_if<std::vector<Frame>>(&v)) return *f;
  throw BadArg("argument '" + name + "' must be a frame set");
}

std::vector<std::string> want_choices(const std::map<std::string, Value>& args,
                                      const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* c = std::get_if<std::vector<std::string>>(&v)) return *c;
  throw BadArg("argument '" + name + "' must be a choice list");
}

Box want_box(const std::map<std::string, Value>& args, const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* b = std::get_if<Box>(&v)) return *b;
  throw BadArg("argument '" + name + "' must be a box");
}

FrameSource want_frame_source(const std::map<std::string, Value>& args,
                              const std::string& name) {
  const Value& v = arg(args, name);
  if (const auto* s = std::get_if<std::string>(&v)) return FrameSource{*s};
  if (const auto* r = std::get_if<FrameRange>(&v)) return FrameSource{*r};
  if (const auto* c = std::get_if<std::vector<Clip>>(&v)) return FrameSource{*c};
  throw BadArg("argument '" + name + "' must be a video, range, or clip list");
}

std::vector<Value> run_module(Backend& b, const std::string& module,
                              const std::map<std::string, Value>& args) {
  if (module == "get_clips") {
    return {Value{get_clips(b, want_string(args, "video_path"), want_string(args, "query"),
                            want_int(args, "top_k"))}};
  }
  if (module == "get_subtitles") {
    return {Value{get_subtitles(b, want_string(args, "video_path"), want_string(args, "query"),
                                want_int(args, "top_k"))}};
  }
  if (module == "trim_before") {
    return {Value{trim_before(b, want_string(args, "video_path"), want_seconds(args, "timestamp"),
                              want_double(args, "intervals"))}};
  }
  if (module == "trim_after") {
    return {Value{trim_after(b, want_string(args, "video_path"), want_seconds(args, "timestamp"),
                             want_double(args, "intervals"))}};
  }
  if (module == "trim_range") {
    return {Value{trim_range(b, want_string(args, "video_path"), want_seconds(args, "start"),
                             want_seconds(args, "end"))}};
  }
  if (module == "extract_frames") {
    return {Value{
        extract_frames(b, want_frame_source(args, "video_path"), want_int(args, "num_frames"))}};
  }
  if (module == "query_mc") {
    return {Value{query_mc(b, want_frames(args, "frames"), want_string(args, "query"),
                           want_choices(args, "choices"))}};
  }
  if (module == "query_yn") {
    auto [answer, conf] = query_yn(b, want_frames(args, "frames"), want_string(args, "query"));
    return {Value{answer}, Value{conf}};
  }
  if (module == "run_ocr") {
    return {Value{run_ocr(b, want_frames(args, "frame"))}};
  }
  if (module == "detect_object") {
    return {Value{detect_object(b, want_frames(args, "frame"), want_string(args, "text"),
                                want_double(args, "text_thr"), want_double(args, "box_thr"))}};
  }
  if (module == "get_subs_range") {
    return {Value{get_subs_range(b, want_string(args, "video_path"), want_seconds(args, "start"),
                                 want_seconds(args, "end"))}};
  }
  if (module == "get_caps_range") {
    return {Value{get_caps_range(b, want_string(args, "video_path"), want_seconds(args, "start"),
                                 want_seconds(args, "end"))}};
  }
  if (module == "get_subtitle_hint") {
    return {Value{get_subtitle_hint(b, want_string(args, "video_path"),
                                    want_string(args, "query"))}};
  }
  if (module == "crop") {
    return {Value{crop(want_frames(args, "frame"), want_box(args, "box"))}};
  }
  if (module == "split_video") {
    return {Value{split_video(b, want_string(args, "video_path"))}};
  }
  if (module == "split_event") {
    return {Value{split_event(want_string(args, "text"))}};
  }
  if (module == "fast_think") {
    std::vector<std::string> choices;
    if (args.count("choices")) choices = want_choices(args, "choices");
    auto [conf, answer] =
        fast_think(b, want_string(args, "video_path"), want_string(args, "query"), choices);
    return {Value{conf}, Value{answer}};
  }
  throw BadArg("module '" + module + "' has no runtime implementation");
}

struct StepError {
  FailureKind kind;
  std::string message;
};

// Runs one module call with a wall-clock bound.  The work goes through a
// packaged_task on a detached thread: std::async futures block in their
// destructor, which would turn a timeout back into a hang.  On timeout the
// worker is abandoned; it holds its own copies (including the backend
// shared_ptr), so nothing it touches can dangle.
std::variant<std::vector<Value>, StepError> run_step(const std::shared_ptr<Backend>& backend,
                                                     const std::string& module,
                                                     std::map<std::string, Value> args,
                                                     double timeout_s) {
  auto invoke = [backend, module, args = std::move(args)]() {
    return run_module(*backend, module, args);
  };
  try {
    if (timeout_s <= 0) return invoke();
    std::packaged_task<std::vector<Value>()> task(invoke);
    auto future = task.get_future();
    std::thread(std::move(task)).detach();
    if (future.wait_for(std::chrono::duration<double>(timeout_s)) !=
        std::future_status::ready) {
      return StepError{FailureKind::Timeout,
                       module + " exceeded " + fmt_double(timeout_s) + "s statement timeout"};
    }
    return future.get();
  } catch (const BadArg& e) {
    return StepError{FailureKind::BadArgument, e.what()};
  } catch (const BackendError& e) {
    return StepError{FailureKind::BackendError, e.what()};
  } catch (const DomainError& e) {
    return StepError{FailureKind::DomainError, e.what()};
  } catch (const ValidationError& e) {
    return StepError{FailureKind::ValidationError, e.what()};
  } catch (const std::exception& e) {
    return StepError{FailureKind::Internal, e.what()};
  }
}

std::string truncate(std::string s, std::size_t cap) {
  if (s.size() <= cap) return s;
  s.resize(cap);
  s += "...(elided)";
  return s;
}

}  // namespace

std::string summarize_value(const Value& value, std::size_t cap) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return fmt_double(d); }
    std::string operator()(const Box& b) const {
      return "box(" + fmt_double(b.x0) + ", " + fmt_double(b.y0) + ", " + fmt_double(b.x1) +
             ", " + fmt_double(b.y1) + ")";
    }
    std::string operator()(const std::vector<std::string>& xs) const {
      std::string out = "[";
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += xs[i];
      }
      return out + "]";
    }
    std::string operator()(const FrameRange& r) const {
      return "range(" + r.video_id + ", [" + fmt_double(r.range.start) + ", " +
             fmt_double(r.range.end) + "))";
    }
    std::string operator()(const std::vector<Frame>& fs) const {
      std::string out = "frames[" + std::to_string(fs.size()) + "]";
      for (const auto& f : fs) out += " " + fmt_double(f.timestamp);
      return out;
    }
    std::string operator()(const std::vector<Clip>& cs) const {
      std::string out = "clips[" + std::to_string(cs.size()) + "]";
      for (const auto& c : cs) {
        out += " [" + fmt_double(c.range.start) + "," + fmt_double(c.range.end) +
               ")@" + fmt_double(c.score);
      }
      return out;
    }
    std::string operator()(const std::vector<SpanHit>& hs) const {
      std::string out = "spans[" + std::to_string(hs.size()) + "]";
      for (const auto& h : hs) {
        out += " [" + fmt_double(h.start) + "," + fmt_double(h.end) + ") \"" + h.text + "\"";
      }
      return out;
    }
    std::string operator()(const std::vector<TextSpan>& ts) const {
      std::string out = "spans[" + std::to_string(ts.size()) + "]";
      for (const auto& t : ts) {
        out += " [" + fmt_double(t.start) + "," + fmt_double(t.end) + ") \"" + t.text + "\"";
      }
      return out;
    }
    std::string operator()(const std::vector<TimeRange>& rs) const {
      std::string out = "segments[" + std::to_string(rs.size()) + "]";
      for (const auto& r : rs) {
        out += " [" + fmt_double(r.start) + "," + fmt_double(r.end) + ")";
      }
      return out;
    }
    std::string operator()(const std::vector<Detection>& ds) const {
      std::string out = "detections[" + std::to_string(ds.size()) + "]";
      for (const auto& d : ds) out += " " + d.label + "@" + fmt_double(d.score);
      return out;
    }
    std::string operator()(const McAnswer& a) const {
      return "answer \"" + a.choice + "\" conf=" + fmt_double(a.confidence.value());
    }
    std::string operator()(const Confidence& c) const { return "conf=" + fmt_double(c.value()); }
  };
  return truncate(std::visit(Visitor{}, value), cap);
}

const char* to_string(ExecStatus s) {
  return s == ExecStatus::Success ? "success" : "failed";
}

const char* to_string(FailureKind k) {
  switch (k) {
    case FailureKind::ParseError: return "parse_error";
    case FailureKind::ValidationError: return "validation_error";
    case FailureKind::UnresolvedVariable: return "unresolved_variable";
    case FailureKind::BadArgument: return "bad_argument";
    case FailureKind::BackendError: return "backend_error";
    case FailureKind::DomainError: return "domain_error";
    case FailureKind::Timeout: return "timeout";
    case FailureKind::NoAnswer: return "no_answer";
    case FailureKind::Internal: return "internal";
  }
  return "internal";
}

std::optional<FailureKind> failure_kind_from_string(const std::string& s) {
  for (FailureKind k :
       {FailureKind::ParseError, FailureKind::ValidationError, FailureKind::UnresolvedVariable,
        FailureKind::BadArgument, FailureKind::BackendError, FailureKind::DomainError,
        FailureKind::Timeout, FailureKind::NoAnswer, FailureKind::Internal}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

ExecutionResult execute(const Program& program, const std::shared_ptr<Backend>& backend,
                        const ExecContext& context, const Registry& registry,
                        const ExecOptions& options) {
  auto start = Clock::now();
  ExecutionResult result;
  result.output_length = render(program).size();

  if (!backend) {
    result.failure = Failure{"setup", FailureKind::BackendError, "no backend configured"};
    result.wall_time_ms = ms_since(start);
    return result;
  }

  std::map<std::string, Value> env;
  env["v"] = context.video_ref;
  env["video_path"] = context.video_ref;
  env["q"] = context.query;
  env["query"] = context.query;
  env["question"] = context.query;
  env["choices"] = context.choices;

  std::optional<std::string> last_answer;
  std::optional<Confidence> last_confidence;
  bool failed = false;

  for (std::size_t i = 0; i < program.statements.size(); ++i) {
    const Statement& st = program.statements[i];
    const std::string stage = "step " + std::to_string(i) + ":" + st.module;
    auto step_start = Clock::now();

    TraceEvent event;
    event.step_index = static_cast<int>(i);
    event.module = st.module;

    std::optional<Failure> failure;
    std::map<std::string, Value> args;

    const ModuleSignature* sig = registry.find(st.module);
    if (!sig) {
      failure = Failure{stage, FailureKind::ValidationError, "unknown module '" + st.module + "'"};
    } else {
      for (const auto& param : sig->params) {
        const ArgValue* av = st.find_arg(param.name);
        if (av) {
          if (av->is_var) {
            auto it = env.find(av->var);
            if (it == env.end()) {
              failure = Failure{stage, FailureKind::UnresolvedVariable,
                                "variable '" + av->var + "' is not bound"};
              break;
            }
            args[param.name] = it->second;
          } else {
            args[param.name] = value_from_literal(av->lit);
          }
        } else if (param.default_value) {
          args[param.name] = value_from_literal(*param.default_value);
        } else if (param.required) {
          failure = Failure{stage, FailureKind::ValidationError,
                            "missing required argument '" + param.name + "'"};
          break;
        }
      }
    }

    if (!failure) {
      for (const auto& [name, value] : args) {
        event.resolved_args[name] = summarize_value(value, options.trace_value_cap);
      }
      auto outcome = run_step(backend, st.module, args, options.statement_timeout_s);
      if (const auto* err = std::get_if<StepError>(&outcome)) {
        failure = Failure{stage, err->kind, err->message};
      } else {
        auto& outputs = std::get<std::vector<Value>>(outcome);
        std::string summary;
        for (std::size_t j = 0; j < outputs.size(); ++j) {
          if (j) summary += " | ";
          summary += summarize_value(outputs[j], options.trace_value_cap);
        }
        event.output_summary = truncate(std::move(summary), options.trace_value_cap);
        for (std::size_t j = 0; j < st.targets.size() && j < outputs.size(); ++j) {
          env[st.targets[j]] = outputs[j];
        }
        for (std::size_t j = 0; j < outputs.size() && j < sig->returns.size(); ++j) {
          if (sig->returns[j] == ValueKind::Answer) {
            if (const auto* mc = std::get_if<McAnswer>(&outputs[j])) {
              last_answer = mc->choice;
              last_confidence = mc->confidence;
            } else if (const auto* s = std::get_if<std::string>(&outputs[j])) {
              last_answer = *s;
            }
          } else if (sig->returns[j] == ValueKind::Confidence) {
            if (const auto* c = std::get_if<Confidence>(&outputs[j])) last_confidence = *c;
          }
        }
      }
    }

    event.duration_ms = ms_since(step_start);
    if (failure) {
      event.output_summary = "error: " + failure->message;
      result.trace.push_back(std::move(event));
      result.failure = std::move(failure);
      failed = true;
      break;
    }
    result.trace.push_back(std::move(event));
  }

  for (const auto& [name, value] : env) {
    result.env_final[name] = summarize_value(value, options.trace_value_cap);
  }

  if (!failed) {
    std::optional<std::string> answer;
    std::optional<Confidence> confidence;
    if (program.return_variable) {
      auto it = env.find(*program.return_variable);
      if (it != env.end()) {
        if (const auto* mc = std::get_if<McAnswer>(&it->second)) {
          answer = mc->choice;
          confidence = mc->confidence;
        } else if (const auto* s = std::get_if<std::string>(&it->second)) {
          answer = *s;
          confidence = last_confidence;
        }
      }
    }
    if (!answer && last_answer) {
      answer = last_answer;
      confidence = last_confidence;
    }
    if (answer) {
      result.status = ExecStatus::Success;
      result.answer = std::move(answer);
      result.confidence = confidence;
    } else {
      result.failure = Failure{"answer", FailureKind::NoAnswer, "program produced no answer"};
    }
  }

  result.wall_time_ms = ms_since(start);
  return result;
}

ExecutionResult execute_text(const std::string& program_text,
                             const std::shared_ptr<Backend>& backend, const ExecContext& context,
                             const Registry& registry, const ExecOptions& options) {
  Program program;
  try {
    program = parse(program_text, registry);
  } catch (const ParseError& e) {
    ExecutionResult result;
    result.output_length = program_text.size();
    result.failure = Failure{"parse", FailureKind::ParseError, e.what()};
    return result;
  } catch (const ValidationError& e) {
    ExecutionResult result;
    result.output_length = program_text.size();
    result.failure = Failure{"parse", FailureKind::ValidationError, e.what()};
    return result;
  }
  return execute(program, backend, context, registry, options);
}

std::vector<ExecutionResult> execute_many(const std::vector<Program>& programs,
                                          const std::shared_ptr<Backend>& backend,
                                          const ExecContext& context, const Registry& registry,
                                          int parallelism, const ExecOptions& options) {
  if (parallelism < 1) throw DomainError("execute_many: parallelism must be >= 1");
  std::vector<ExecutionResult> results(programs.size());
  if (programs.empty()) return results;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= programs.size()) break;
      results[i] = execute(programs[i], backend, context, registry, options);
    }
  };

  int workers = std::min<int>(parallelism, static_cast<int>(programs.size()));
  if (workers <= 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace vispr
