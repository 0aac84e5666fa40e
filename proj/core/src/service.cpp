#include "vispr/service.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <utility>

#include "net_util.hpp"
#include "vispr/errors.hpp"
#include "vispr/metrics.hpp"
#include "vispr/remote.hpp"
#include "vispr/runlog.hpp"
#include "vispr/sim_backend.hpp"

namespace vispr {

namespace {

using detail::reply_json;
using nlohmann::json;

Registry registry_from(const Config& config) {
  if (!config.registry_file) return Registry::builtin();
  std::ifstream in(*config.registry_file);
  if (!in) throw ConfigError("registry_file: cannot open " + config.registry_file->string());
  json j;
  in >> j;
  return Registry::from_json(j);
}

}  // namespace

Runtime make_runtime(const Config& config) {
  config.validate();
  Runtime rt;
  rt.registry = registry_from(config);
  config.validate(rt.registry);
  if (config.corpus_dir) {
    rt.corpus = std::make_shared<const Corpus>(load_corpus(*config.corpus_dir));
  } else if (config.backend_mode == BackendMode::Simulated) {
    rt.corpus = std::make_shared<const Corpus>(generate_corpus(config.seed, config.generation));
  }
  if (config.backend_mode == BackendMode::Simulated) {
    rt.backend = std::make_shared<SimulatedBackend>(rt.corpus);
    rt.planner = std::make_shared<SyntheticPlanner>(rt.corpus);
  } else {
    rt.backend = std::make_shared<RemoteBackend>(config.remote.backend_url,
                                                 config.remote.timeout_s,
                                                 config.remote.max_in_flight);
    rt.planner =
        std::make_shared<RemotePlanner>(config.remote.planner_url, config.remote.timeout_s);
  }
  return rt;
}

ControllerConfig controller_config_from(const Config& config) {
  ControllerConfig cc;
  cc.theta = config.theta;
  cc.search = config.search;
  cc.exec.statement_timeout_s = config.statement_timeout_s;
  return cc;
}

struct EngineService::Impl {
  Config config;
  Runtime rt;
  detail::HttpHost http;
  std::atomic<bool> ready{false};
  std::mutex flight_mu;
  std::condition_variable flight_cv;
  int in_flight = 0;
  std::mutex log_mu;

  bool try_enter() {
    std::lock_guard lock(flight_mu);
    if (in_flight >= config.service_queue) return false;
    ++in_flight;
    return true;
  }

  void leave() {
    {
      std::lock_guard lock(flight_mu);
      --in_flight;
    }
    flight_cv.notify_all();
  }

  void wait_drained() {
    std::unique_lock lock(flight_mu);
    flight_cv.wait(lock, [this] { return in_flight == 0; });
  }

  void append_log(const RunRecord& record) {
    if (config.run_log.empty()) return;
    std::lock_guard lock(log_mu);
    append_run_log(config.run_log, record);
  }

  void append_log(const std::vector<RunRecord>& records) {
    if (config.run_log.empty()) return;
    std::lock_guard lock(log_mu);
    append_run_log(config.run_log, records);
  }

  struct FlightGuard {
    explicit FlightGuard(Impl& i) : impl(i) {}
    ~FlightGuard() { impl.leave(); }
    Impl& impl;
  };
};

namespace {

void reject_not_ready(httplib::Response& res) {
  res.status = 503;
  reply_json(res, json{{"error", "service not ready"}, {"retry", true}});
}

void reject_busy(httplib::Response& res) {
  res.status = 503;
  res.set_header("Retry-After", "1");
  reply_json(res, json{{"error", "queue full"}, {"retry", true}});
}

}  // namespace

EngineService::EngineService(Config config, Runtime runtime, std::string host)
    : impl_(std::make_unique<Impl>()) {
  config.validate();
  impl_->config = std::move(config);
  impl_->rt = std::move(runtime);
  impl_->http.host = std::move(host);
  impl_->http.requested_port = impl_->config.service_port;
  impl_->http.default_healthz = false;
  auto* impl = impl_.get();

  impl_->http.server.Get("/healthz", [impl](const httplib::Request&, httplib::Response& res) {
    if (impl->ready.load()) {
      reply_json(res, json{{"status", "ok"}});
    } else {
      res.status = 503;
      reply_json(res, json{{"status", "starting"}});
    }
  });

  impl_->http.server.Post("/answer", [impl](const httplib::Request& req, httplib::Response& res) {
    if (!impl->ready.load()) return reject_not_ready(res);
    if (!impl->try_enter()) return reject_busy(res);
    Impl::FlightGuard guard(*impl);
    try {
      json parsed = json::parse(req.body);
      const std::string video_ref = parsed.at("video_ref").get<std::string>();
      const std::string question = parsed.contains("question")
                                       ? parsed["question"].get<std::string>()
                                       : parsed.at("query").get<std::string>();
      const auto choices = parsed.value("choices", std::vector<std::string>{});
      const std::string query_id = parsed.value("query_id", "");
      RunRecord record =
          answer_query(video_ref, question, choices, *impl->rt.planner, impl->rt.backend,
                       impl->rt.registry, controller_config_from(impl->config), query_id);
      impl->append_log(record);
      reply_json(res, to_json(record));
    } catch (const json::exception& e) {
      res.status = 400;
      reply_json(res, json{{"error", std::string("malformed request: ") + e.what()}});
    } catch (const PlannerError& e) {
      res.status = 502;
      reply_json(res, json{{"error", e.what()}});
    } catch (const BackendError& e) {
      res.status = 502;
      reply_json(res, json{{"error", e.what()}});
    } catch (const Error& e) {
      res.status = 400;
      reply_json(res, json{{"error", e.what()}});
    } catch (const std::exception& e) {
      res.status = 500;
      reply_json(res, json{{"error", e.what()}});
    }
  });

  impl_->http.server.Post("/eval", [impl](const httplib::Request& req, httplib::Response& res) {
    if (!impl->ready.load()) return reject_not_ready(res);
    if (!impl->try_enter()) return reject_busy(res);
    Impl::FlightGuard guard(*impl);
    try {
      json parsed = req.body.empty() ? json::object() : json::parse(req.body);
      if (!impl->rt.corpus) {
        res.status = 400;
        reply_json(res, json{{"error", "no corpus configured for evaluation"}});
        return;
      }
      auto mode = EvalMode::Adaptive;
      if (parsed.contains("mode")) {
        auto m = eval_mode_from_string(parsed["mode"].get<std::string>());
        if (!m) {
          res.status = 400;
          reply_json(res, json{{"error", "unknown eval mode"}});
          return;
        }
        mode = *m;
      }
      ControllerConfig cc = controller_config_from(impl->config);
      if (parsed.contains("theta")) cc.theta = parsed["theta"].get<double>();
      std::vector<QAItem> items = impl->rt.corpus->items;
      if (parsed.contains("limit")) {
        const auto limit = parsed["limit"].get<std::size_t>();
        if (limit < items.size()) items.resize(limit);
      }
      const int parallelism = parsed.value("parallelism", impl->config.parallelism);
      EvalRun run = evaluate(items, *impl->rt.planner, impl->rt.backend, impl->rt.registry, cc,
                             mode, parallelism);
      impl->append_log(run.records);
      reply_json(res, to_json(run.report));
    } catch (const json::exception& e) {
      res.status = 400;
      reply_json(res, json{{"error", std::string("malformed request: ") + e.what()}});
    } catch (const Error& e) {
      res.status = 400;
      reply_json(res, json{{"error", e.what()}});
    } catch (const std::exception& e) {
      res.status = 500;
      reply_json(res, json{{"error", e.what()}});
    }
  });
}

EngineService::~EngineService() {
  if (impl_) stop();
}

void EngineService::start(bool ready) {
  impl_->http.start("engine service");
  impl_->ready.store(ready);
}

void EngineService::set_ready(bool ready) { impl_->ready.store(ready); }

void EngineService::stop() {
  impl_->ready.store(false);
  impl_->wait_drained();
  impl_->http.stop();
}

int EngineService::port() const { return impl_->http.bound_port; }

bool EngineService::running() const { return impl_->http.server.is_running(); }

}  // namespace vispr
