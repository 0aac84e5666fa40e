#pragma once

#include <memory>
#include <string>

#include "vispr/config.hpp"
#include "vispr/controller.hpp"

namespace vispr {

// Everything a command or service needs, assembled per config: the capability
// backend, the planner, the module registry, and (simulated mode, or when a
// corpus directory is configured) the corpus the evaluation items come from.
struct Runtime {
  std::shared_ptr<Backend> backend;
  std::shared_ptr<PlannerBackend> planner;
  Registry registry;
  std::shared_ptr<const Corpus> corpus;
};

Runtime make_runtime(const Config& config);

ControllerConfig controller_config_from(const Config& config);

// Engine-side HTTP service.
//   POST /answer  {video_ref, question, choices, query_id?} -> RunRecord JSON
//   POST /eval    {mode?, theta?, limit?} -> EvalReport JSON (needs a corpus)
//   GET  /healthz -> 200 {status: ok} when ready, 503 {status: starting} before
// Backpressure: at most config.service_queue requests in flight; excess
// requests are rejected with 503 and Retry-After (retry-able by contract).
// stop() drains in-flight requests before shutting the listener down.
// Every answered query is appended to the configured run log; the log writer
// is the single serialization point.
class EngineService {
 public:
  EngineService(Config config, Runtime runtime, std::string host = "127.0.0.1");
  ~EngineService();

  EngineService(const EngineService&) = delete;
  EngineService& operator=(const EngineService&) = delete;

  // Binds and serves.  With ready=false the service answers /healthz with 503
  // until set_ready(true); query endpoints reject while not ready.
  void start(bool ready = true);
  void set_ready(bool ready);
  void stop();
  int port() const;
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vispr
