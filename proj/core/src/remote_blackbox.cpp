#include "ctrex/remote_blackbox.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace ctrex {

namespace {

constexpr int kDocumentVersion = 1;

}  // namespace

RemoteBlackBox::RemoteBlackBox(Encoder encoder, const std::string& url, std::size_t class_count,
                               std::chrono::milliseconds timeout)
    : BlackBox(std::move(encoder)), class_count_(class_count), timeout_(timeout) {
  const auto scheme = url.find("://");
  if (url.rfind("http://", 0) != 0) throw ModelError("remote model url must start with http://: " + url);
  const auto slash = url.find('/', scheme + 3);
  origin_ = url.substr(0, slash);
  prefix_ = slash == std::string::npos ? "" : url.substr(slash);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (class_count_ < 2) throw ModelError("remote model needs at least 2 classes");
}

std::vector<double> RemoteBlackBox::predict_proba(std::span<const double> encoded) const {
  RowMatrix one(1, encoded.size());
  std::copy(encoded.begin(), encoded.end(), one.data.begin());
  return predict_proba_batch(one).data;
}

RowMatrix RemoteBlackBox::predict_proba_batch(const RowMatrix& encoded) const {
  nlohmann::json instances = nlohmann::json::array();
  for (std::size_t i = 0; i < encoded.rows; ++i) {
    auto row = encoded.row(i);
    instances.push_back(std::vector<double>(row.begin(), row.end()));
  }
  const nlohmann::json request = {{"schema_version", kDocumentVersion}, {"instances", std::move(instances)}};
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto res = client.Post(prefix_ + "/predict", request.dump(), "application/json");
  if (!res) throw ModelError("remote model at " + origin_ + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ModelError("remote model at " + origin_ + " answered HTTP " + std::to_string(res->status));
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("remote model reply is not JSON: ") + e.what());
  }
  if (!reply.contains("probabilities") || !reply["probabilities"].is_array() ||
      reply["probabilities"].size() != encoded.rows) {
    throw ModelError("remote model reply must hold one probability row per instance");
  }
  RowMatrix out(encoded.rows, class_count_);
  std::size_t i = 0;
  for (const auto& row : reply["probabilities"]) {
    if (!row.is_array() || row.size() != class_count_) {
      throw ModelError("remote model returned a probability row of the wrong width");
    }
    for (std::size_t c = 0; c < class_count_; ++c) out(i, c) = row[c].get<double>();
    ++i;
  }
  return out;
}

std::string RemoteBlackBox::metadata() const { return "remote " + origin_ + prefix_; }

struct PredictionServer::Impl {
  const BlackBox& model;
  httplib::Server server;
  std::thread thread;

  explicit Impl(const BlackBox& m) : model(m) {
    server.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto doc = nlohmann::json::parse(req.body);
        const auto& instances = doc.at("instances");
        const auto width = model.input_width();
        RowMatrix in(instances.size(), width);
        for (std::size_t i = 0; i < instances.size(); ++i) {
          const auto& row = instances[i];
          if (row.size() != width) throw ModelError("instance width " + std::to_string(row.size()));
          for (std::size_t j = 0; j < width; ++j) in(i, j) = row[j].get<double>();
        }
        const auto probs = model.predict_proba_batch(in);
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < probs.rows; ++i) {
          auto r = probs.row(i);
          rows.push_back(std::vector<double>(r.begin(), r.end()));
        }
        res.set_content(nlohmann::json{{"schema_version", kDocumentVersion}, {"probabilities", rows}}.dump(),
                        "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      }
    });
  }
};

PredictionServer::PredictionServer(const BlackBox& model) : impl_(std::make_unique<Impl>(model)) {}

PredictionServer::~PredictionServer() { stop(); }

int PredictionServer::start(const std::string& host, int port) {
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

void PredictionServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ctrex
