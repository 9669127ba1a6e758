#pragma once

// HTTP surface over the explanation pipeline. Requests are routed through
// ExplanationService::handle, which the HTTP server and tests share.
//
//   POST /sessions                  {config?}            -> 201 {session_id}
//   GET  /sessions/{id}/schema                           -> feature schema
//   POST /sessions/{id}/explain     {anchor | anchor_index, overrides?}
//   POST /sessions/{id}/whatif      {overrides}
//   GET  /sessions/{id}/tree                             -> surrogate export
//   GET  /healthz
//
// Errors: 400 malformed request, 404 unknown session or route, 409 no
// contrast class (or no reachable contrast leaf), 422 invalid anchor or
// overrides.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrex/blackbox.hpp"
#include "ctrex/dataset.hpp"
#include "ctrex/latent.hpp"
#include "ctrex/neighborhood.hpp"
#include "ctrex/recourse.hpp"

namespace ctrex {

/// Build version reported by /healthz.
std::string library_version();

/// Trained, read-only artifacts shared by every session.
struct ServiceArtifacts {
  std::shared_ptr<const Dataset> pool;  // training split
  std::shared_ptr<const BlackBox> model;
  std::shared_ptr<const VaeModel> vae;
  /// Optional rows addressable by "anchor_index" (defaults to the pool).
  std::shared_ptr<const Dataset> anchors;
  std::string label_column = "label";
};

struct ServiceConfig {
  RecourseConfig defaults;
  std::chrono::milliseconds idle_timeout{std::chrono::minutes(30)};
};

class SessionStore {
 public:
  using Clock = std::chrono::steady_clock;

  struct Entry {
    std::mutex mutex;  // one request at a time per session
    std::unique_ptr<ExplainSession> session;
    Clock::time_point last_used;
  };

  explicit SessionStore(std::chrono::milliseconds idle_timeout,
                        std::function<Clock::time_point()> now = Clock::now);

  std::string create(std::unique_ptr<ExplainSession> session);
  /// Session by id, refreshing its idle timer; nullptr when unknown or evicted.
  std::shared_ptr<Entry> find(const std::string& id);
  /// Drops sessions idle for longer than the timeout; returns how many.
  std::size_t evict_idle();
  std::size_t size() const;

 private:
  std::chrono::milliseconds idle_timeout_;
  std::function<Clock::time_point()> now_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
  std::uint64_t salt_;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

class ExplanationService {
 public:
  ExplanationService(ServiceArtifacts artifacts, ServiceConfig config);

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  SessionStore& sessions() { return store_; }
  const ServiceArtifacts& artifacts() const { return artifacts_; }

 private:
  HttpResponse create_session(const nlohmann::json& body);
  HttpResponse schema(SessionStore::Entry& entry);
  HttpResponse explain(SessionStore::Entry& entry, const nlohmann::json& body);
  HttpResponse what_if(SessionStore::Entry& entry, const nlohmann::json& body);
  HttpResponse tree(SessionStore::Entry& entry);
  Instance anchor_from(const nlohmann::json& body) const;

  ServiceArtifacts artifacts_;
  ServiceConfig config_;
  std::shared_ptr<const PoolIndex> index_;
  SessionStore store_;
};

/// Threaded HTTP server in front of an ExplanationService.
class HttpServer {
 public:
  explicit HttpServer(ExplanationService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop() is called.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctrex
