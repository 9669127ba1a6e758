#include <cmath>
#include <random>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "ctrex/experiment.hpp"
#include "ctrex/service.hpp"
#include "ctrex/synthetic.hpp"
#include "oracles.hpp"

using namespace ctrex;
using nlohmann::json;

namespace {

ServiceArtifacts blobs_artifacts() {
  static const ServiceArtifacts a = [] {
    ExperimentOptions o;
    o.seed = 6;
    o.model = ModelKind::kLogistic;
    auto ex = prepare_experiment(make_blobs(1500, 3), o);
    ServiceArtifacts out;
    out.pool = std::make_shared<Dataset>(ex.train);
    out.anchors = std::make_shared<Dataset>(ex.test);
    out.model = ex.model;
    out.vae = ex.vae;
    return out;
  }();
  return a;
}

// Class 1 when a > 0.5 or b > 0.5; a costs 1 to change, b costs 1.5.
ServiceArtifacts two_leaf_artifacts() {
  static const ServiceArtifacts a = [] {
    Schema s(2);
    s[0].name = "a";
    s[1].name = "b";
    s[1].edit_cost = 1.5;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Instance> rows;
    std::vector<int> labels;
    for (int i = 0; i < 1200; ++i) {
      Instance x{{std::round(u(rng) * 1e4) / 1e4, std::round(u(rng) * 1e4) / 1e4}};
      labels.push_back(x[0] > 0.5 || x[1] > 0.5 ? 1 : 0);
      rows.push_back(x);
    }
    auto pool = std::make_shared<Dataset>(s, rows, labels, std::vector<std::string>{"no", "yes"});
    ServiceArtifacts out;
    out.pool = pool;
    out.model = std::make_shared<oracle::PredicateModel>(
        pool->encoder(), [](const std::vector<double>& v) { return v[0] > 0.5 || v[1] > 0.5 ? 1 : 0; });
    out.vae = std::make_shared<VaeModel>(train_default_vae(*pool, 5));
    return out;
  }();
  return a;
}

ServiceConfig small_config() {
  ServiceConfig c;
  c.defaults.k = 200;
  c.defaults.seed = 3;
  return c;
}

std::string new_session(ExplanationService& s, const json& body = json::object()) {
  const auto r = s.handle("POST", "/sessions", body.dump());
  EXPECT_EQ(r.status, 201);
  return r.body["session_id"];
}

std::set<std::string> best_rule_features(const json& doc) {
  std::set<std::string> out;
  for (const auto& r : doc["best"]["rules"]) out.insert(r["feature"].get<std::string>());
  return out;
}

}  // namespace

TEST(Service, HealthAndRoutes) {
  ExplanationService s(blobs_artifacts(), small_config());
  const auto h = s.handle("GET", "/healthz", "");
  EXPECT_EQ(h.status, 200);
  EXPECT_EQ(h.body["status"], "ok");
  EXPECT_EQ(h.body["schema_version"], 1);
  EXPECT_EQ(s.handle("GET", "/nope", "").status, 404);
  EXPECT_EQ(s.handle("GET", "/sessions", "").status, 404);
  EXPECT_EQ(s.handle("GET", "/sessions/unknown/schema", "").status, 404);
  const auto id = new_session(s);
  EXPECT_EQ(s.handle("GET", "/sessions/" + id + "/bogus", "").status, 404);
  EXPECT_EQ(s.handle("GET", "/sessions/" + id + "/tree", "").status, 404);
}

TEST(Service, SchemaDocument) {
  ExplanationService s(blobs_artifacts(), small_config());
  const auto id = new_session(s);
  const auto r = s.handle("GET", "/sessions/" + id + "/schema", "");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["features"].size(), 6u);
  EXPECT_EQ(r.body["features"][4]["mutability"], "immutable");
  EXPECT_EQ(r.body["features"][0]["direction"], "increase-only");
  EXPECT_EQ(r.body["class_names"], json({"low", "high"}));
}

TEST(Service, ExplainByIndexAndByValue) {
  const auto art = blobs_artifacts();
  ExplanationService s(art, small_config());
  const auto id = new_session(s);
  const auto by_index = s.handle("POST", "/sessions/" + id + "/explain", R"({"anchor_index": 3})");
  ASSERT_EQ(by_index.status, 200) << by_index.body.dump();
  EXPECT_EQ(by_index.body["schema_version"], 1);
  EXPECT_TRUE(by_index.body["best"].contains("x_prime"));

  const auto id2 = new_session(s);
  const json body = {{"anchor", instance_to_json(art.anchors->row(3), art.pool->schema())}};
  const auto by_value = s.handle("POST", "/sessions/" + id2 + "/explain", body.dump());
  ASSERT_EQ(by_value.status, 200);
  EXPECT_EQ(oracle::strip_timing(by_index.body), oracle::strip_timing(by_value.body));

  const auto t = s.handle("GET", "/sessions/" + id + "/tree", "");
  EXPECT_EQ(t.status, 200);
  EXPECT_TRUE(t.body["tree"].contains("nodes"));
}

TEST(Service, MatchesTheLibraryDirectly) {
  const auto art = blobs_artifacts();
  ExplanationService s(art, small_config());
  for (std::size_t i = 0; i < 5; ++i) {
    const auto id = new_session(s);
    const auto r = s.handle("POST", "/sessions/" + id + "/explain", json{{"anchor_index", i}}.dump());
    ASSERT_EQ(r.status, 200);
    const auto direct = explain(art.anchors->row(i), *art.model, *art.pool, *art.vae, small_config().defaults);
    EXPECT_EQ(oracle::strip_timing(r.body), oracle::strip_timing(explanation_to_json(direct, art.pool->schema())));
  }
}

TEST(Service, ErrorCodes) {
  ExplanationService s(blobs_artifacts(), small_config());
  const auto id = new_session(s);
  const auto path = "/sessions/" + id + "/explain";
  EXPECT_EQ(s.handle("POST", path, "{not json").status, 400);
  EXPECT_EQ(s.handle("POST", path, "[1, 2]").status, 400);
  EXPECT_EQ(s.handle("POST", "/sessions/" + id + "/whatif", "{}").status, 400);  // nothing explained yet

  const auto missing = s.handle("POST", path, "{}");
  EXPECT_EQ(missing.status, 422);
  EXPECT_FALSE(missing.body["fields"].empty());
  EXPECT_EQ(s.handle("POST", path, R"({"anchor_index": 99999})").status, 422);
  const auto bad = s.handle("POST", path, R"({"anchor": {"age": 30}})");
  EXPECT_EQ(bad.status, 422);
  EXPECT_GE(bad.body["fields"].size(), 5u);
  EXPECT_EQ(s.handle("POST", path, R"({"anchor_index": 0, "overrides": {"edit_cost": {"zzz": 1}}})").status, 422);

  // Contrast class equal to the anchor's own label.
  const auto row = blobs_artifacts().anchors->row(0);
  const int own = blobs_artifacts().model->predict_label(row);
  const auto id2 = new_session(s, {{"config", {{"contrast_class", own}}}});
  const auto r = s.handle("POST", "/sessions/" + id2 + "/explain", R"({"anchor_index": 0})");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["kind"], "no_contrast");
  EXPECT_EQ(s.handle("POST", "/sessions", R"({"config": {"k": 7}})").status, 400);
}

TEST(Service, WhatIfRerankMatchesTheLibrary) {
  const auto art = two_leaf_artifacts();
  ServiceConfig config;
  ExplanationService s(art, config);
  const auto id = new_session(s);
  const auto first = s.handle("POST", "/sessions/" + id + "/explain", R"({"anchor": {"a": 0.2, "b": 0.2}})");
  ASSERT_EQ(first.status, 200) << first.body.dump();
  EXPECT_EQ(best_rule_features(first.body), std::set<std::string>{"a"});
  const auto second = s.handle("POST", "/sessions/" + id + "/whatif", R"({"overrides": {"edit_cost": {"a": 2}}})");
  ASSERT_EQ(second.status, 200);
  EXPECT_EQ(best_rule_features(second.body), std::set<std::string>{"b"});

  PoolIndex index(*art.pool, *art.model, *art.vae);
  ExplainSession direct(*art.model, index, *art.vae, config.defaults);
  direct.explain(Instance{{0.2, 0.2}});
  Overrides o;
  o.edit_cost["a"] = 2.0;
  auto want = explanation_to_json(direct.what_if(o), direct.schema());
  want["overrides"] = o.to_json();
  EXPECT_EQ(oracle::strip_timing(second.body), oracle::strip_timing(want));

  // Locking both features leaves nothing reachable.
  const auto blocked = s.handle(
      "POST", "/sessions/" + id + "/whatif",
      R"({"overrides": {"mutability": {"a": {"mutability": "immutable"}, "b": {"mutability": "immutable"}}}})");
  EXPECT_EQ(blocked.status, 409);
}

TEST(SessionStore, EvictsIdleSessions) {
  const auto art = two_leaf_artifacts();
  PoolIndex index(*art.pool, *art.model, *art.vae);
  auto now = SessionStore::Clock::time_point{};
  SessionStore store(std::chrono::seconds(10), [&] { return now; });
  auto make = [&] { return std::make_unique<ExplainSession>(*art.model, index, *art.vae, RecourseConfig{}); };
  const auto a = store.create(make());
  const auto b = store.create(make());
  EXPECT_NE(a, b);
  now += std::chrono::seconds(6);
  EXPECT_TRUE(store.find(a));  // refreshes a
  now += std::chrono::seconds(6);
  EXPECT_EQ(store.evict_idle(), 1u);
  EXPECT_TRUE(store.find(a));
  EXPECT_FALSE(store.find(b));
  now += std::chrono::seconds(11);
  EXPECT_FALSE(store.find(a));
  EXPECT_EQ(store.size(), 0u);
}

TEST(HttpServer, RoundTripEqualsInProcess) {
  const auto art = blobs_artifacts();
  ExplanationService served(art, small_config());
  ExplanationService local(art, small_config());
  HttpServer server(served);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  auto created = client.Post("/sessions", "{}", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const auto id = json::parse(created->body)["session_id"].get<std::string>();
  auto r = client.Post("/sessions/" + id + "/explain", R"({"anchor_index": 2})", "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);

  const auto lid = new_session(local);
  const auto want = local.handle("POST", "/sessions/" + lid + "/explain", R"({"anchor_index": 2})");
  EXPECT_EQ(oracle::strip_timing(json::parse(r->body)), oracle::strip_timing(want.body));

  auto missing = client.Get("/sessions/nope/tree");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["kind"], "unknown_session");
  server.stop();
}
