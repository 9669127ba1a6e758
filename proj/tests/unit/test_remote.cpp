#include <gtest/gtest.h>

#include "ctrex/experiment.hpp"
#include "ctrex/recourse.hpp"
#include "ctrex/remote_blackbox.hpp"
#include "ctrex/synthetic.hpp"
#include "oracles.hpp"

using namespace ctrex;

TEST(Remote, PredictionsMatchTheLocalModel) {
  ExperimentOptions o;
  o.seed = 9;
  const auto ex = prepare_experiment(make_moons(600, 2), o);
  PredictionServer server(*ex.model);
  const int port = server.start("127.0.0.1", 0);
  const RemoteBlackBox remote(ex.train.encoder(), "http://127.0.0.1:" + std::to_string(port), 2);

  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(remote.predict(ex.test.row(i)).probabilities, ex.model->predict(ex.test.row(i)).probabilities);
  }
  const auto enc = encode_rows(ex.train.encoder(), ex.test.rows());
  const auto a = remote.predict_proba_batch(enc);
  const auto b = ex.model->predict_proba_batch(enc);
  EXPECT_EQ(a.data, b.data);

  RecourseConfig config;
  config.k = 200;
  const auto local = explain(ex.test.row(1), *ex.model, ex.train, *ex.vae, config);
  const auto far = explain(ex.test.row(1), remote, ex.train, *ex.vae, config);
  EXPECT_EQ(oracle::strip_timing(explanation_to_json(local, ex.train.schema())),
            oracle::strip_timing(explanation_to_json(far, ex.train.schema())));
  server.stop();
}

TEST(Remote, ConfigurationAndTransportErrors) {
  const auto data = make_moons(50, 1);
  EXPECT_THROW(RemoteBlackBox(data.encoder(), "ftp://x", 2), ModelError);
  EXPECT_THROW(RemoteBlackBox(data.encoder(), "http://127.0.0.1:1", 1), ModelError);
  const RemoteBlackBox dead(data.encoder(), "http://127.0.0.1:1", 2, std::chrono::milliseconds(200));
  EXPECT_THROW(dead.predict(data.row(0)), ModelError);
}
