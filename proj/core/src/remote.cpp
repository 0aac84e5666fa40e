#include "vispr/remote.hpp"

#include <condition_variable>
#include <mutex>
#include <utility>

#include "net_util.hpp"
#include "vispr/confidence.hpp"
#include "vispr/errors.hpp"
#include "vispr/world.hpp"

namespace vispr {

namespace {

using detail::get_healthz;
using detail::post_json;
using detail::reply_json;
using nlohmann::json;

json box_to_json(const Box& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

Box box_from_json(const json& j) {
  return Box{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
             j.at(3).get<double>()};
}

json frame_to_json(const Frame& f) {
  json j{{"video_id", f.video_id}, {"timestamp", f.timestamp}};
  j["crop_box"] = f.crop_box ? box_to_json(*f.crop_box) : json();
  return j;
}

Frame frame_from_json(const json& j) {
  Frame f;
  f.video_id = j.at("video_id").get<std::string>();
  f.timestamp = j.at("timestamp").get<double>();
  if (j.contains("crop_box") && !j["crop_box"].is_null()) f.crop_box = box_from_json(j["crop_box"]);
  return f;
}

json span_to_json(const TextSpan& s) {
  return json{{"start", s.start}, {"end", s.end}, {"text", s.text}};
}

TextSpan span_from_json(const json& j) {
  return TextSpan{j.at("start").get<double>(), j.at("end").get<double>(),
                  j.at("text").get<std::string>()};
}

json detection_to_json(const Detection& d) {
  return json{{"label", d.label}, {"box", box_to_json(d.box)}, {"score", d.score}};
}

Detection detection_from_json(const json& j) {
  return Detection{j.at("label").get<std::string>(), box_from_json(j.at("box")),
                   j.at("score").get<double>()};
}

// Caps concurrent outbound requests at max_in_flight.
class Gate {
 public:
  explicit Gate(int slots) : slots_(slots) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return slots_ > 0; });
    --slots_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int slots_;
};

struct GateGuard {
  explicit GateGuard(Gate& g) : gate(g) { gate.acquire(); }
  ~GateGuard() { gate.release(); }
  Gate& gate;
};

}  // namespace

struct RemoteBackend::Impl {
  std::string base_url;
  double timeout_s;
  Gate gate;

  Impl(std::string url, double timeout, int max_in_flight)
      : base_url(std::move(url)), timeout_s(timeout), gate(max_in_flight) {}

  json invoke(const std::string& capability, const std::string& video_ref, json inputs,
              json params) {
    GateGuard guard(gate);
    json body{{"capability", capability},
              {"video_ref", video_ref},
              {"inputs", std::move(inputs)},
              {"params", std::move(params)}};
    json parsed = post_json(base_url, timeout_s, "/invoke", body, "backend service");
    if (parsed.contains("error") && !parsed["error"].is_null()) {
      throw BackendError(capability + ": " + parsed["error"].get<std::string>());
    }
    return parsed;
  }
};

RemoteBackend::RemoteBackend(std::string base_url, double timeout_s, int max_in_flight)
    : impl_(std::make_unique<Impl>(std::move(base_url), timeout_s, max_in_flight)) {
  if (max_in_flight < 1) throw DomainError("max_in_flight must be at least 1");
}

RemoteBackend::~RemoteBackend() = default;

VideoInfo RemoteBackend::video_info(const std::string& video_id) {
  json r = impl_->invoke("video_info", video_id, json::object(), json::object());
  const json& out = r.at("outputs");
  return VideoInfo{out.at("duration").get<double>(), out.at("fps").get<double>()};
}

double RemoteBackend::score_clip(const std::string& video_id, const TimeRange& range,
                                 const std::string& query) {
  json inputs{{"start", range.start}, {"end", range.end}, {"query", query}};
  json r = impl_->invoke("score_clip", video_id, std::move(inputs), json::object());
  return r.at("outputs").at("score").get<double>();
}

double RemoteBackend::score_text(const std::string& query, const std::string& text) {
  json inputs{{"query", query}, {"text", text}};
  json r = impl_->invoke("score_text", "", std::move(inputs), json::object());
  return r.at("outputs").at("score").get<double>();
}

std::vector<TextSpan> RemoteBackend::subtitles(const std::string& video_id) {
  json r = impl_->invoke("subtitles", video_id, json::object(), json::object());
  std::vector<TextSpan> spans;
  for (const auto& j : r.at("outputs").at("spans")) spans.push_back(span_from_json(j));
  return spans;
}

std::vector<TextSpan> RemoteBackend::captions(const std::string& video_id) {
  json r = impl_->invoke("captions", video_id, json::object(), json::object());
  std::vector<TextSpan> spans;
  for (const auto& j : r.at("outputs").at("spans")) spans.push_back(span_from_json(j));
  return spans;
}

QaResult RemoteBackend::video_qa(const QaRequest& request) {
  json frames = json::array();
  for (const auto& f : request.frames) frames.push_back(frame_to_json(f));
  json inputs{{"frames", std::move(frames)},
              {"query", request.query},
              {"choices", request.choices},
              {"yes_no", request.yes_no}};
  json r = impl_->invoke("video_qa", request.video_id, std::move(inputs), json::object());
  QaResult result;
  result.answer = r.at("outputs").at("answer").get<std::string>();
  const std::string source = r.value("confidence_source", "");
  if (source == "token") {
    if (!r.contains("token_logprobs") || r["token_logprobs"].is_null()) {
      throw BackendError("video_qa: token confidence declared but token_logprobs missing");
    }
    result.token_logprobs = r["token_logprobs"].get<std::vector<double>>();
    result.confidence = compute_confidence(result.token_logprobs);
    result.source = ConfidenceSource::Token;
  } else if (source == "scalar") {
    if (!r.contains("confidence") || r["confidence"].is_null()) {
      throw BackendError("video_qa: scalar confidence declared but confidence missing");
    }
    result.confidence = Confidence{r["confidence"].get<double>()};
    result.source = ConfidenceSource::Scalar;
  } else {
    throw BackendError("video_qa: response must declare confidence_source token|scalar");
  }
  return result;
}

std::string RemoteBackend::ocr(const Frame& frame) {
  json inputs{{"frame", frame_to_json(frame)}};
  json r = impl_->invoke("ocr", frame.video_id, std::move(inputs), json::object());
  return r.at("outputs").at("text").get<std::string>();
}

std::vector<Detection> RemoteBackend::detect(const Frame& frame, const std::string& text,
                                             double text_thr, double box_thr) {
  json inputs{{"frame", frame_to_json(frame)}, {"text", text}};
  json params{{"text_thr", text_thr}, {"box_thr", box_thr}};
  json r = impl_->invoke("detect", frame.video_id, std::move(inputs), std::move(params));
  std::vector<Detection> detections;
  for (const auto& j : r.at("outputs").at("detections")) {
    detections.push_back(detection_from_json(j));
  }
  return detections;
}

std::vector<double> RemoteBackend::scene_boundaries(const std::string& video_id) {
  json r = impl_->invoke("scene_boundaries", video_id, json::object(), json::object());
  return r.at("outputs").at("boundaries").get<std::vector<double>>();
}

std::string RemoteBackend::text_hint(const std::string& video_id, const std::string& query) {
  json inputs{{"query", query}};
  json r = impl_->invoke("text_hint", video_id, std::move(inputs), json::object());
  return r.at("outputs").at("text").get<std::string>();
}

bool RemoteBackend::healthy() const { return get_healthz(impl_->base_url, impl_->timeout_s); }

namespace {

json dispatch_capability(Backend& backend, const json& req) {
  const std::string capability = req.at("capability").get<std::string>();
  const std::string video_ref = req.value("video_ref", "");
  const json inputs = req.value("inputs", json::object());
  const json params = req.value("params", json::object());

  if (capability == "video_info") {
    VideoInfo info = backend.video_info(video_ref);
    return json{{"outputs", {{"duration", info.duration}, {"fps", info.fps}}}};
  }
  if (capability == "score_clip") {
    TimeRange range{inputs.at("start").get<double>(), inputs.at("end").get<double>()};
    double score = backend.score_clip(video_ref, range, inputs.at("query").get<std::string>());
    return json{{"outputs", {{"score", score}}}};
  }
  if (capability == "score_text") {
    double score = backend.score_text(inputs.at("query").get<std::string>(),
                                      inputs.at("text").get<std::string>());
    return json{{"outputs", {{"score", score}}}};
  }
  if (capability == "subtitles" || capability == "captions") {
    auto spans = capability == "subtitles" ? backend.subtitles(video_ref)
                                           : backend.captions(video_ref);
    json arr = json::array();
    for (const auto& s : spans) arr.push_back(span_to_json(s));
    return json{{"outputs", {{"spans", std::move(arr)}}}};
  }
  if (capability == "video_qa") {
    QaRequest qa;
    qa.video_id = video_ref;
    for (const auto& j : inputs.at("frames")) qa.frames.push_back(frame_from_json(j));
    qa.query = inputs.at("query").get<std::string>();
    qa.choices = inputs.value("choices", std::vector<std::string>{});
    qa.yes_no = inputs.value("yes_no", false);
    QaResult result = backend.video_qa(qa);
    json out{{"outputs", {{"answer", result.answer}}},
             {"confidence_source", to_string(result.source)}};
    if (result.source == ConfidenceSource::Token) {
      out["token_logprobs"] = result.token_logprobs;
    } else {
      out["confidence"] = result.confidence.value();
    }
    return out;
  }
  if (capability == "ocr") {
    return json{{"outputs", {{"text", backend.ocr(frame_from_json(inputs.at("frame")))}}}};
  }
  if (capability == "detect") {
    auto detections =
        backend.detect(frame_from_json(inputs.at("frame")), inputs.at("text").get<std::string>(),
                       params.at("text_thr").get<double>(), params.at("box_thr").get<double>());
    json arr = json::array();
    for (const auto& d : detections) arr.push_back(detection_to_json(d));
    return json{{"outputs", {{"detections", std::move(arr)}}}};
  }
  if (capability == "scene_boundaries") {
    return json{{"outputs", {{"boundaries", backend.scene_boundaries(video_ref)}}}};
  }
  if (capability == "text_hint") {
    return json{
        {"outputs", {{"text", backend.text_hint(video_ref, inputs.at("query").get<std::string>())}}}};
  }
  throw BackendError("unknown capability '" + capability + "'");
}

}  // namespace

struct BackendService::Impl {
  std::shared_ptr<Backend> backend;
  detail::HttpHost http;
};

BackendService::BackendService(std::shared_ptr<Backend> backend, std::string host, int port)
    : impl_(std::make_unique<Impl>()) {
  if (!backend) throw DomainError("BackendService requires a backend");
  impl_->backend = std::move(backend);
  impl_->http.host = std::move(host);
  impl_->http.requested_port = port;
  auto shared = impl_->backend;
  impl_->http.server.Post("/invoke",
                          [shared](const httplib::Request& req, httplib::Response& res) {
                            json body;
                            try {
                              json parsed = json::parse(req.body);
                              body = dispatch_capability(*shared, parsed);
                            } catch (const json::exception& e) {
                              res.status = 400;
                              body = json{{"error", std::string("malformed request: ") + e.what()}};
                            } catch (const std::exception& e) {
                              body = json{{"error", e.what()}};
                            }
                            reply_json(res, body);
                          });
}

BackendService::~BackendService() = default;

void BackendService::start() { impl_->http.start("backend service"); }

void BackendService::stop() { impl_->http.stop(); }

int BackendService::port() const { return impl_->http.bound_port; }

bool BackendService::running() const { return impl_->http.server.is_running(); }

struct RemotePlanner::Impl {
  std::string base_url;
  double timeout_s;
};

RemotePlanner::RemotePlanner(std::string base_url, double timeout_s)
    : impl_(std::make_unique<Impl>(Impl{std::move(base_url), timeout_s})) {}

RemotePlanner::~RemotePlanner() = default;

std::string RemotePlanner::complete(const PlannerRequest& request) {
  json body{{"query_id", request.query_id}, {"video_ref", request.video_ref},
            {"query", request.query},       {"choices", request.choices},
            {"stop", request.stop},         {"prior_output", request.prior_output},
            {"sample_index", request.sample_index}};
  json parsed;
  try {
    parsed = post_json(impl_->base_url, impl_->timeout_s, "/complete", body, "planner service");
  } catch (const BackendError& e) {
    throw PlannerError(e.what());
  }
  if (parsed.contains("error") && !parsed["error"].is_null()) {
    throw PlannerError(parsed["error"].get<std::string>());
  }
  return parsed.at("text").get<std::string>();
}

std::optional<Rewrite> RemotePlanner::rewrite(const RewriteRequest& request) {
  json body{{"item", qa_item_to_json(request.item)},
            {"module_name", request.module_name},
            {"sample_index", request.sample_index}};
  json parsed;
  try {
    parsed = post_json(impl_->base_url, impl_->timeout_s, "/rewrite", body, "planner service");
  } catch (const BackendError& e) {
    throw PlannerError(e.what());
  }
  if (parsed.contains("error") && !parsed["error"].is_null()) {
    throw PlannerError(parsed["error"].get<std::string>());
  }
  if (!parsed.contains("rewrite") || parsed["rewrite"].is_null()) return std::nullopt;
  const json& r = parsed["rewrite"];
  return Rewrite{r.at("question").get<std::string>(), r.at("program_text").get<std::string>()};
}

bool RemotePlanner::healthy() const { return get_healthz(impl_->base_url, impl_->timeout_s); }

struct PlannerService::Impl {
  std::shared_ptr<PlannerBackend> planner;
  detail::HttpHost http;
};

PlannerService::PlannerService(std::shared_ptr<PlannerBackend> planner, std::string host, int port)
    : impl_(std::make_unique<Impl>()) {
  if (!planner) throw DomainError("PlannerService requires a planner");
  impl_->planner = std::move(planner);
  impl_->http.host = std::move(host);
  impl_->http.requested_port = port;
  auto shared = impl_->planner;
  impl_->http.server.Post("/complete",
                          [shared](const httplib::Request& req, httplib::Response& res) {
                            json body;
                            try {
                              json parsed = json::parse(req.body);
                              PlannerRequest pr;
                              pr.query_id = parsed.value("query_id", "");
                              pr.video_ref = parsed.value("video_ref", "");
                              pr.query = parsed.value("query", "");
                              pr.choices = parsed.value("choices", std::vector<std::string>{});
                              pr.stop = parsed.value("stop", "");
                              pr.prior_output = parsed.value("prior_output", "");
                              pr.sample_index = parsed.value("sample_index", 0);
                              body = json{{"text", shared->complete(pr)}};
                            } catch (const json::exception& e) {
                              res.status = 400;
                              body = json{{"error", std::string("malformed request: ") + e.what()}};
                            } catch (const std::exception& e) {
                              body = json{{"error", e.what()}};
                            }
                            reply_json(res, body);
                          });
  impl_->http.server.Post("/rewrite",
                          [shared](const httplib::Request& req, httplib::Response& res) {
                            json body;
                            try {
                              json parsed = json::parse(req.body);
                              RewriteRequest rr;
                              rr.item = qa_item_from_json(parsed.at("item"));
                              rr.module_name = parsed.value("module_name", "");
                              rr.sample_index = parsed.value("sample_index", 0);
                              auto rewrite = shared->rewrite(rr);
                              if (rewrite) {
                                body = json{{"rewrite",
                                             {{"question", rewrite->question},
                                              {"program_text", rewrite->program_text}}}};
                              } else {
                                body = json{{"rewrite", nullptr}};
                              }
                            } catch (const json::exception& e) {
                              res.status = 400;
                              body = json{{"error", std::string("malformed request: ") + e.what()}};
                            } catch (const std::exception& e) {
                              body = json{{"error", e.what()}};
                            }
                            reply_json(res, body);
                          });
}

PlannerService::~PlannerService() = default;

void PlannerService::start() { impl_->http.start("planner service"); }

void PlannerService::stop() { impl_->http.stop(); }

int PlannerService::port() const { return impl_->http.bound_port; }

bool PlannerService::running() const { return impl_->http.server.is_running(); }

}  // namespace vispr
