#include "ctrex/service.hpp"

#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "ctrex/surrogate.hpp"

#ifndef CTREX_VERSION
#define CTREX_VERSION "dev"
#endif

namespace ctrex {

namespace {

constexpr int kDocumentVersion = 1;

HttpResponse error(int status, const std::string& kind, const std::string& message) {
  return {status, {{"schema_version", kDocumentVersion}, {"error", message}, {"kind", kind}}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path);
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  auto doc = nlohmann::json::parse(body);
  if (!doc.is_object()) throw std::invalid_argument("request body must be a JSON object");
  return doc;
}

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

}  // namespace

std::string library_version() { return CTREX_VERSION; }

SessionStore::SessionStore(std::chrono::milliseconds idle_timeout, std::function<Clock::time_point()> now)
    : idle_timeout_(idle_timeout), now_(std::move(now)), salt_(std::random_device{}()) {}

std::string SessionStore::create(std::unique_ptr<ExplainSession> session) {
  auto entry = std::make_shared<Entry>();
  entry->session = std::move(session);
  std::lock_guard lock(mutex_);
  entry->last_used = now_();
  const std::string id = "s" + hex(next_id_++) + "-" + hex(salt_ & 0xffffff);
  sessions_.emplace(id, std::move(entry));
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  if (now_() - it->second->last_used > idle_timeout_) {
    sessions_.erase(it);
    return nullptr;
  }
  it->second->last_used = now_();
  return it->second;
}

std::size_t SessionStore::evict_idle() {
  std::lock_guard lock(mutex_);
  const auto now = now_();
  return std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_used > idle_timeout_; });
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

ExplanationService::ExplanationService(ServiceArtifacts artifacts, ServiceConfig config)
    : artifacts_(std::move(artifacts)), config_(std::move(config)), store_(config_.idle_timeout) {
  if (!artifacts_.pool || !artifacts_.model || !artifacts_.vae) {
    throw std::invalid_argument("service needs a pool, a model and a VAE");
  }
  if (!artifacts_.anchors) artifacts_.anchors = artifacts_.pool;
  config_.defaults.validate();
  index_ = std::make_shared<PoolIndex>(*artifacts_.pool, *artifacts_.model, *artifacts_.vae);
}

HttpResponse ExplanationService::handle(const std::string& method, const std::string& path,
                                        const std::string& body) {
  try {
    store_.evict_idle();
    const auto parts = split_path(path);
    if (parts.size() == 1 && parts[0] == "healthz" && method == "GET") {
      return {200, {{"schema_version", kDocumentVersion}, {"status", "ok"}, {"version", library_version()}}};
    }
    if (parts.empty() || parts[0] != "sessions") return error(404, "not_found", "no route for " + path);
    if (parts.size() == 1) {
      if (method != "POST") return error(404, "not_found", "no route for " + method + " " + path);
      return create_session(parse_body(body));
    }
    auto entry = store_.find(parts[1]);
    if (!entry) return error(404, "unknown_session", "unknown session '" + parts[1] + "'");
    if (parts.size() != 3) return error(404, "not_found", "no route for " + path);
    std::lock_guard lock(entry->mutex);
    const auto& action = parts[2];
    if (action == "schema" && method == "GET") return schema(*entry);
    if (action == "tree" && method == "GET") return tree(*entry);
    if (action == "explain" && method == "POST") return explain(*entry, parse_body(body));
    if (action == "whatif" && method == "POST") return what_if(*entry, parse_body(body));
    return error(404, "not_found", "no route for " + method + " " + path);
  } catch (const InstanceError& e) {
    auto r = error(422, "invalid_anchor", e.what());
    r.body["fields"] = e.problems();
    return r;
  } catch (const DataError& e) {
    return error(422, "invalid_input", e.what());
  } catch (const NoContrastError& e) {
    return error(409, "no_contrast", e.what());
  } catch (const NoPathError& e) {
    return error(409, "no_path", e.what());
  } catch (const InfeasibleRealization& e) {
    return error(409, "infeasible", e.what());
  } catch (const SurrogateError& e) {
    return error(409, "surrogate", e.what());
  } catch (const ModelError& e) {
    return error(422, "invalid_input", e.what());
  } catch (const nlohmann::json::exception& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::logic_error& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

HttpResponse ExplanationService::create_session(const nlohmann::json& body) {
  RecourseConfig config = config_.defaults;
  if (body.contains("config")) config = RecourseConfig::from_json(body["config"], config_.defaults);
  auto session = std::make_unique<ExplainSession>(*artifacts_.model, *index_, *artifacts_.vae, config);
  const auto id = store_.create(std::move(session));
  return {201, {{"schema_version", kDocumentVersion}, {"session_id", id}, {"config", config.to_json()}}};
}

HttpResponse ExplanationService::schema(SessionStore::Entry& entry) {
  const auto& schema = entry.session->schema();
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : schema) {
    nlohmann::json col = {{"name", f.name},
                          {"kind", to_string(f.kind)},
                          {"mutability", to_string(f.mutability)},
                          {"direction", to_string(f.direction)},
                          {"edit_cost", f.edit_cost},
                          {"observed_min", f.observed_min},
                          {"observed_max", f.observed_max},
                          {"sigma", f.sigma}};
    if (f.categorical()) col["categories"] = f.categories;
    features.push_back(std::move(col));
  }
  return {200,
          {{"schema_version", kDocumentVersion},
           {"features", std::move(features)},
           {"label", artifacts_.label_column},
           {"class_names", artifacts_.pool->class_names()}}};
}

Instance ExplanationService::anchor_from(const nlohmann::json& body) const {
  if (body.contains("anchor")) return instance_from_json(body["anchor"], artifacts_.pool->schema());
  if (body.contains("anchor_index")) {
    const auto i = body["anchor_index"].get<std::size_t>();
    if (i >= artifacts_.anchors->size()) {
      throw InstanceError({"anchor_index: " + std::to_string(i) + " is out of range"});
    }
    return artifacts_.anchors->row(i);
  }
  throw InstanceError({"anchor: missing (give 'anchor' or 'anchor_index')"});
}

HttpResponse ExplanationService::explain(SessionStore::Entry& entry, const nlohmann::json& body) {
  const auto x = anchor_from(body);
  auto& session = *entry.session;
  const auto e = body.contains("overrides") ? session.explain(x, Overrides::from_json(body["overrides"]))
                                            : session.explain(x);
  return {200, explanation_to_json(e, session.schema())};
}

HttpResponse ExplanationService::what_if(SessionStore::Entry& entry, const nlohmann::json& body) {
  auto& session = *entry.session;
  if (!session.has_anchor()) throw std::logic_error("explain an anchor on this session before a what-if");
  const auto overrides = Overrides::from_json(body.value("overrides", nlohmann::json::object()));
  const auto e = session.what_if(overrides);
  auto out = explanation_to_json(e, session.schema());
  out["overrides"] = overrides.to_json();
  return {200, std::move(out)};
}

HttpResponse ExplanationService::tree(SessionStore::Entry& entry) {
  const auto* t = entry.session->tree();
  if (!t) return error(404, "no_tree", "no surrogate has been fitted in this session yet");
  const auto& schema = entry.session->schema();
  return {200, {{"schema_version", kDocumentVersion}, {"tree", t->to_json(schema)}, {"rules", t->rule_dump(schema)}}};
}

struct HttpServer::Impl {
  ExplanationService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(ExplanationService& s) : service(s) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      const auto r = service.handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get(".*", route);
    server.Post(".*", route);
    server.Delete(".*", route);
  }
};

HttpServer::HttpServer(ExplanationService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ctrex
