#pragma once

// Black box living behind an HTTP endpoint:
//   POST {base}/predict {"schema_version": 1, "instances": [[...encoded...], ...]}
//   -> {"probabilities": [[p_0, ..., p_{C-1}], ...]}
// Instances are sent in the encoded (normalized, one-hot) representation.

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ctrex/blackbox.hpp"

namespace ctrex {

class RemoteBlackBox final : public BlackBox {
 public:
  /// `url` is "http://host:port" with an optional path prefix.
  RemoteBlackBox(Encoder encoder, const std::string& url, std::size_t class_count,
                 std::chrono::milliseconds timeout = std::chrono::seconds(10));

  std::vector<double> predict_proba(std::span<const double> encoded) const override;
  RowMatrix predict_proba_batch(const RowMatrix& encoded) const override;
  std::size_t class_count() const override { return class_count_; }
  std::string metadata() const override;

 private:
  std::string origin_;
  std::string prefix_;
  std::size_t class_count_;
  std::chrono::milliseconds timeout_;
};

/// Serves a local model at POST /predict (the counterpart of RemoteBlackBox).
class PredictionServer {
 public:
  explicit PredictionServer(const BlackBox& model);
  ~PredictionServer();
  PredictionServer(const PredictionServer&) = delete;
  PredictionServer& operator=(const PredictionServer&) = delete;

  /// Port 0 picks a free port; returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctrex
