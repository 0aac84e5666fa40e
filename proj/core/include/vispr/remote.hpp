#pragma once

#include <memory>
#include <optional>
#include <string>

#include "vispr/backend.hpp"
#include "vispr/planner.hpp"

namespace vispr {

// Wire schema (shared by client and service):
//   POST /invoke   {capability, video_ref, inputs, params}
//     -> {outputs, token_logprobs?, confidence?, confidence_source?, error?}
//   GET  /healthz  -> {status}
// Capability errors travel in the `error` field; transport failures surface
// as BackendError.  videoQA responses must carry either token_logprobs
// (confidence recomputed here) or a scalar confidence, and say which.

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(std::string base_url, double timeout_s = 30.0, int max_in_flight = 8);
  ~RemoteBackend() override;

  VideoInfo video_info(const std::string& video_id) override;
  double score_clip(const std::string& video_id, const TimeRange& range,
                    const std::string& query) override;
  double score_text(const std::string& query, const std::string& text) override;
  std::vector<TextSpan> subtitles(const std::string& video_id) override;
  std::vector<TextSpan> captions(const std::string& video_id) override;
  QaResult video_qa(const QaRequest& request) override;
  std::string ocr(const Frame& frame) override;
  std::vector<Detection> detect(const Frame& frame, const std::string& text, double text_thr,
                                double box_thr) override;
  std::vector<double> scene_boundaries(const std::string& video_id) override;
  std::string text_hint(const std::string& video_id, const std::string& query) override;

  bool healthy() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Serves a local Backend over the wire schema so the engine and the model
// adapters can live in separate processes.
class BackendService {
 public:
  BackendService(std::shared_ptr<Backend> backend, std::string host, int port);
  ~BackendService();

  BackendService(const BackendService&) = delete;
  BackendService& operator=(const BackendService&) = delete;

  void start();  // non-blocking; throws BackendError when the port is taken
  void stop();
  int port() const;
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Planner wire schema:
//   POST /complete {query_id, video_ref, query, choices, stop, prior_output,
//                   sample_index} -> {text} | {error}
//   POST /rewrite  {item, module_name, sample_index}
//                  -> {rewrite: {question, program_text} | null} | {error}
//   GET  /healthz  -> {status}
class RemotePlanner : public PlannerBackend {
 public:
  explicit RemotePlanner(std::string base_url, double timeout_s = 30.0);
  ~RemotePlanner() override;

  std::string complete(const PlannerRequest& request) override;
  std::optional<Rewrite> rewrite(const RewriteRequest& request) override;
  bool healthy() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class PlannerService {
 public:
  PlannerService(std::shared_ptr<PlannerBackend> planner, std::string host, int port);
  ~PlannerService();

  PlannerService(const PlannerService&) = delete;
  PlannerService& operator=(const PlannerService&) = delete;

  void start();
  void stop();
  int port() const;
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vispr
