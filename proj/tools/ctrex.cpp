// ctrex command-line tool. Machine-readable output goes to stdout, diagnostics
// to stderr. Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctrex/benchmark_report.hpp"
#include "ctrex/experiment.hpp"
#include "ctrex/random.hpp"
#include "ctrex/recourse.hpp"
#include "ctrex/remote_blackbox.hpp"
#include "ctrex/service.hpp"
#include "ctrex/synthetic.hpp"
#include "ctrex/visual.hpp"

namespace fs = std::filesystem;
using namespace ctrex;

namespace {

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0; }

// Like CLI::ExistingFile, but also lets an http:// model endpoint through.
const CLI::Validator kFileOrUrl(
    [](std::string& s) -> std::string {
      if (is_url(s)) return {};
      if (!fs::exists(s)) return "File does not exist: " + s;
      return {};
    },
    "FILE|URL");

struct DataOptions {
  std::string data;
  std::string schema;
  std::vector<int> pair;  // optional digit pair relabelled to 0/1
};

void add_data_options(CLI::App* cmd, DataOptions& o, bool required = true) {
  auto* d = cmd->add_option("--data", o.data, "CSV data file")->check(CLI::ExistingFile);
  auto* s = cmd->add_option("--schema", o.schema, "JSON schema file")->check(CLI::ExistingFile);
  if (required) {
    d->required();
    s->required();
  } else {
    d->needs(s);
    s->needs(d);
  }
  cmd->add_option("--pair", o.pair, "Keep two classes a,b and relabel them 0/1")->expected(2)->delimiter(',');
}

Dataset load_data(const DataOptions& o) {
  auto data = load_dataset(o.data, o.schema);
  if (o.pair.size() == 2) data = digit_pair(data, o.pair[0], o.pair[1]);
  return data;
}

struct SplitOptions {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

struct Artifacts {
  Dataset full;
  Dataset pool;
  std::shared_ptr<const BlackBox> model;
  std::shared_ptr<const VaeModel> vae;
};

// Loads the data file, the model (file or URL) and the VAE. The training pool
// is rebuilt from the model's recorded split, falling back to `split`.
Artifacts load_artifacts(const DataOptions& data_opts, const std::string& model_ref, const std::string& vae_path,
                         SplitOptions split_opts) {
  auto full = load_data(data_opts);
  std::shared_ptr<const BlackBox> model;
  std::optional<MlpModel> local;
  if (!is_url(model_ref)) {
    local = MlpModel::load(model_ref);
    if (const auto& p = local->provenance()) split_opts = {p->seed, p->train_fraction};
  }
  auto [train, test] = split(full, split_opts.train_fraction, split_opts.seed);
  (void)test;
  if (local) {
    model = std::make_shared<const MlpModel>(std::move(*local));
  } else {
    model = std::make_shared<const RemoteBlackBox>(train.encoder(), model_ref, full.class_count());
  }
  auto vae = std::make_shared<const VaeModel>(VaeModel::load(vae_path));
  if (model->input_width() != train.encoder().width()) {
    throw ModelError("model input width " + std::to_string(model->input_width()) + " does not match the data (" +
                     std::to_string(train.encoder().width()) + ")");
  }
  if (vae->encoder().width() != train.encoder().width()) {
    throw ModelError("VAE input width does not match the data");
  }
  return {std::move(full), std::move(train), std::move(model), std::move(vae)};
}

struct RecourseOptions {
  RecourseConfig config;
  std::optional<int> contrast;
  std::string sigma_source = "training";
  bool no_prune = false;
};

void add_recourse_options(CLI::App* cmd, RecourseOptions& o) {
  cmd->add_option("--seed", o.config.seed, "Master seed")->capture_default_str();
  cmd->add_option("--k", o.config.k, "Neighborhood size (even)")->capture_default_str();
  cmd->add_option("--max-search", o.config.max_search, "Realization attempts")->capture_default_str();
  cmd->add_option("--m", o.config.margin_divisor, "Margin divisor")->capture_default_str();
  cmd->add_option("--max-depth", o.config.max_depth, "Surrogate depth limit")->capture_default_str();
  cmd->add_option("--min-samples-leaf", o.config.min_samples_leaf, "Minimum rows per leaf")->capture_default_str();
  cmd->add_flag("--no-prune", o.no_prune, "Skip reduced-error pruning");
  cmd->add_option("--contrast", o.contrast, "Contrast class index");
  cmd->add_option("--sigma-source", o.sigma_source, "Margin scale source")
      ->check(CLI::IsMember({"training", "neighborhood"}))
      ->capture_default_str();
}

RecourseConfig finish(const RecourseOptions& o) {
  auto c = o.config;
  c.contrast_class = o.contrast;
  c.prune = !o.no_prune;
  c.sigma_source = o.sigma_source == "neighborhood" ? SigmaSource::kNeighborhood : SigmaSource::kTraining;
  c.validate();
  return c;
}

// name=value pairs from repeated flags.
std::pair<std::string, std::string> key_value(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("expected name=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

struct OverrideOptions {
  std::vector<std::string> edit_cost;
  std::vector<std::string> lock;
  std::vector<std::string> direction;
  std::string file;
};

void add_override_options(CLI::App* cmd, OverrideOptions& o) {
  cmd->add_option("--edit-cost", o.edit_cost, "Per-feature cost override name=value");
  cmd->add_option("--lock", o.lock, "Mark a feature immutable");
  cmd->add_option("--direction", o.direction, "Restrict a feature: name=increase-only|decrease-only");
  cmd->add_option("--overrides", o.file, "JSON overrides document")->check(CLI::ExistingFile);
}

Overrides build_overrides(const OverrideOptions& o) {
  Overrides out;
  if (!o.file.empty()) {
    std::ifstream in(o.file);
    out = Overrides::from_json(nlohmann::json::parse(in));
  }
  for (const auto& kv : o.edit_cost) {
    auto [name, value] = key_value(kv);
    out.edit_cost[name] = std::stod(value);
  }
  for (const auto& name : o.lock) out.mutability[name] = {Mutability::kImmutable, Direction::kNone};
  for (const auto& kv : o.direction) {
    auto [name, value] = key_value(kv);
    out.mutability[name] = {Mutability::kSemiImmutable, parse_direction(value)};
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// ---- subcommands ----

int cmd_generate(const std::string& kind, std::size_t rows, std::uint64_t seed, const std::string& csv,
                 const std::string& schema) {
  auto data = make_synthetic(kind, rows, seed);
  save_dataset(data, "label", csv, schema);
  std::cout << nlohmann::json{{"schema_version", 1}, {"rows", data.size()}, {"csv", csv}, {"schema", schema}}.dump()
            << "\n";
  return 0;
}

int cmd_train_blackbox(const DataOptions& d, const std::string& kind, SplitOptions s, const std::string& out) {
  auto full = load_data(d);
  auto [train, test] = split(full, s.train_fraction, s.seed);
  auto model = train_model(train, parse_model_kind(kind), derive_seed(s.seed, 1));
  model.set_provenance({s.seed, s.train_fraction});
  model.save(out);
  const auto train_pred = model.predict_labels(train.rows());
  const auto test_pred = model.predict_labels(test.rows());
  auto accuracy = [](const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == truth[i];
    return pred.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(pred.size());
  };
  std::cout << nlohmann::json{{"schema_version", 1},
                              {"model", out},
                              {"kind", kind},
                              {"train_accuracy", accuracy(train_pred, train.labels())},
                              {"test_accuracy", accuracy(test_pred, test.labels())}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_train_vae(const DataOptions& d, SplitOptions s, const std::string& model_path, bool image, int epochs,
                  const std::string& out) {
  if (!model_path.empty()) {
    if (const auto& p = MlpModel::load(model_path).provenance()) s = {p->seed, p->train_fraction};
  }
  auto full = load_data(d);
  auto [train, test] = split(full, s.train_fraction, s.seed);
  (void)test;
  std::vector<double> losses;
  auto config = vae_preset(train.encoder().width(), image);
  config.seed = derive_seed(s.seed, 2);
  if (epochs > 0) config.epochs = epochs;
  auto vae = train_vae(train, config, &losses);
  vae.save(out);
  std::cout << nlohmann::json{{"schema_version", 1},
                              {"vae", out},
                              {"latent_dim", vae.latent_dim()},
                              {"epochs", config.epochs},
                              {"final_loss", losses.empty() ? 0.0 : losses.back()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_explain(const DataOptions& d, const std::string& model, const std::string& vae, SplitOptions s,
                std::size_t index, const RecourseOptions& r, const OverrideOptions& o, bool timing) {
  auto a = load_artifacts(d, model, vae, s);
  if (index >= a.full.size()) {
    throw CLI::ValidationError("--index", std::to_string(index) + " is out of range (" +
                                              std::to_string(a.full.size()) + " rows)");
  }
  PoolIndex pool(a.pool, *a.model, *a.vae);
  ExplainSession session(*a.model, pool, *a.vae, finish(r));
  const auto overrides = build_overrides(o);
  const auto e = overrides.empty() ? session.explain(a.full.row(index)) : session.explain(a.full.row(index), overrides);
  auto doc = explanation_to_json(e, session.schema(), timing);
  doc["index"] = index;
  std::cout << doc.dump(2) << "\n";
  if (!timing) std::cerr << "latency_s " << e.elapsed_s << "\n";
  return 0;
}

struct BenchmarkOptions {
  DataOptions data;
  std::string synthetic = "blobs";
  std::size_t rows = 3000;
  std::string model_kind = "logistic";
  std::string model;
  std::string vae;
  bool image = false;
  std::size_t anchors = 100;
  double train_fraction = 0.8;
  std::string out_csv;
  std::string timing_out;
};

int cmd_benchmark(const BenchmarkOptions& b, const RecourseOptions& r) {
  const auto config = finish(r);
  Dataset full = b.data.data.empty() ? make_synthetic(b.synthetic, b.rows, config.seed) : load_data(b.data);
  std::shared_ptr<const BlackBox> model;
  std::shared_ptr<const VaeModel> vae;
  std::optional<Dataset> train, test;
  if (!b.model.empty()) {
    if (b.vae.empty()) throw CLI::ValidationError("--model", "needs --vae as well");
    auto a = load_artifacts(b.data, b.model, b.vae, {config.seed, b.train_fraction});
    auto mlp = std::dynamic_pointer_cast<const MlpModel>(a.model);
    SplitOptions s{config.seed, b.train_fraction};
    if (mlp && mlp->provenance()) s = {mlp->provenance()->seed, mlp->provenance()->train_fraction};
    auto parts = split(full, s.train_fraction, s.seed);
    train = std::move(parts.first);
    test = std::move(parts.second);
    model = a.model;
    vae = a.vae;
  } else {
    ExperimentOptions opts;
    opts.model = parse_model_kind(b.model_kind);
    opts.seed = config.seed;
    opts.train_fraction = b.train_fraction;
    opts.image = b.image;
    auto ex = prepare_experiment(full, opts);
    train = std::move(ex.train);
    test = std::move(ex.test);
    model = ex.model;
    vae = ex.vae;
  }
  // Anchors balanced over the black-box labels that can be explained.
  std::vector<int> classes;
  for (std::size_t c = 0; c < model->class_count(); ++c) {
    if (static_cast<int>(c) != config.contrast_class.value_or(-1)) classes.push_back(static_cast<int>(c));
  }
  const auto idx = balanced_anchor_indices(*test, *model, b.anchors, classes, derive_seed(config.seed, 3));
  std::vector<Instance> anchors;
  for (auto i : idx) anchors.push_back(test->row(i));
  const auto report = run_benchmark(anchors, *model, *train, *vae, config);
  std::cout << report.summary_json(false).dump(2) << "\n";
  if (!b.out_csv.empty()) write_text(b.out_csv, report.to_csv(false));
  const auto timing = nlohmann::json{{"latency_s", {{"mean", report.latency_s.mean}, {"median", report.latency_s.median}}}};
  if (!b.timing_out.empty()) write_text(b.timing_out, timing.dump(2) + "\n");
  std::cerr << "latency_s median " << report.latency_s.median << " mean " << report.latency_s.mean << "\n";
  return 0;
}

int cmd_render(const DataOptions& d, const std::string& model, const std::string& vae, std::size_t index,
               const RecourseOptions& r, double kernel_sigma, std::size_t scale, const std::string& out_dir) {
  auto a = load_artifacts(d, model, vae, {});
  if (index >= a.full.size()) throw CLI::ValidationError("--index", std::to_string(index) + " is out of range");
  const auto& schema = a.full.schema();
  for (const auto& f : schema) {
    if (f.categorical()) throw ShapeError("render-contrast needs numeric pixel features");
  }
  const auto shape = square_shape(schema.size());
  PoolIndex pool(a.pool, *a.model, *a.vae);
  ExplainSession session(*a.model, pool, *a.vae, finish(r));
  const auto e = session.explain(a.full.row(index));
  const auto overlay = render_contrast(e.anchor, e.best.x_prime, shape, kernel_sigma);
  double vmax = 0.0;
  for (const auto& f : schema) vmax = std::max(vmax, f.observed_max);
  if (vmax <= 0.0) vmax = 1.0;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_pgm(dir / "anchor.pgm", e.anchor.values, shape, vmax, scale);
  write_pgm(dir / "counterfactual.pgm", e.best.x_prime.values, shape, vmax, scale);
  write_overlay_ppm(dir / "overlay.ppm", e.anchor.values, overlay, vmax, scale);
  std::size_t pp = 0, pn = 0;
  for (auto p : overlay.provenance) {
    pp += p == Provenance::kPositive;
    pn += p == Provenance::kNegative;
  }
  std::cout << nlohmann::json{{"schema_version", 1},
                              {"index", index},
                              {"fact", e.fact_label},
                              {"contrast", e.contrast_label},
                              {"flipped", e.best.flipped},
                              {"pertinent_positive_pixels", pp},
                              {"pertinent_negative_pixels", pn},
                              {"files",
                               {(dir / "anchor.pgm").string(), (dir / "counterfactual.pgm").string(),
                                (dir / "overlay.ppm").string()}}}
                   .dump(2)
            << "\n";
  return 0;
}

HttpServer* g_server = nullptr;
PredictionServer* g_predict = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
  if (g_predict) g_predict->stop();
}

int cmd_serve(const DataOptions& d, const std::string& model, const std::string& vae, const RecourseOptions& r,
              const std::string& host, int port, int idle_minutes) {
  auto a = load_artifacts(d, model, vae, {});
  ServiceArtifacts artifacts;
  artifacts.pool = std::make_shared<const Dataset>(std::move(a.pool));
  artifacts.anchors = std::make_shared<const Dataset>(std::move(a.full));
  artifacts.model = a.model;
  artifacts.vae = a.vae;
  if (auto doc = load_schema(d.schema); doc.label_column) {
    artifacts.label_column = *doc.label_column;
  }
  ServiceConfig config;
  config.defaults = finish(r);
  config.idle_timeout = std::chrono::minutes(idle_minutes);
  ExplanationService service(std::move(artifacts), config);
  HttpServer server(service);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving on " << host << ":" << port << "\n";
  server.listen(host, port);
  g_server = nullptr;
  return 0;
}

int cmd_serve_model(const std::string& model, const std::string& host, int port) {
  const auto m = MlpModel::load(model);
  PredictionServer server(m);
  g_predict = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int bound = server.start(host, port);
  std::cerr << "model endpoint on http://" << host << ":" << bound << "/predict\n";
  pause();
  g_predict = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual explanations from latent neighborhoods and surrogate trees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());
  app.failure_message(CLI::FailureMessage::help);

  // generate-data
  std::string gen_kind = "blobs", gen_csv, gen_schema;
  std::size_t gen_rows = 3000;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate-data", "Write a synthetic dataset and its schema");
  gen->add_option("--kind", gen_kind, "blobs, moons or xor")
      ->check(CLI::IsMember({"blobs", "moons", "xor"}))
      ->capture_default_str();
  gen->add_option("--rows", gen_rows)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out-csv", gen_csv)->required();
  gen->add_option("--out-schema", gen_schema)->required();

  // train-blackbox
  DataOptions tb_data;
  std::string tb_kind = "logistic", tb_out;
  SplitOptions tb_split;
  auto* tb = app.add_subcommand("train-blackbox", "Train a logistic or MLP classifier");
  add_data_options(tb, tb_data);
  tb->add_option("--kind", tb_kind)->check(CLI::IsMember({"logistic", "lr", "mlp"}))->capture_default_str();
  tb->add_option("--seed", tb_split.seed, "Split and training seed")->capture_default_str();
  tb->add_option("--train-fraction", tb_split.train_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  tb->add_option("--out", tb_out)->required();

  // train-vae
  DataOptions tv_data;
  SplitOptions tv_split;
  std::string tv_model, tv_out;
  bool tv_image = false;
  int tv_epochs = 0;
  auto* tv = app.add_subcommand("train-vae", "Train the latent-space VAE on the training split");
  add_data_options(tv, tv_data);
  tv->add_option("--seed", tv_split.seed, "Split and training seed")->capture_default_str();
  tv->add_option("--train-fraction", tv_split.train_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  tv->add_option("--model", tv_model, "Take the split from this model file")->check(CLI::ExistingFile);
  tv->add_flag("--image", tv_image, "Use the image architecture preset");
  tv->add_option("--epochs", tv_epochs, "Override the preset epoch count");
  tv->add_option("--out", tv_out)->required();

  // explain
  DataOptions ex_data;
  std::string ex_model, ex_vae;
  SplitOptions ex_split;
  std::size_t ex_index = 0;
  RecourseOptions ex_rec;
  OverrideOptions ex_over;
  bool ex_timing = false;
  auto* ex = app.add_subcommand("explain", "Explain one row of the data file");
  add_data_options(ex, ex_data);
  ex->add_option("--model", ex_model, "Model file or http:// endpoint")->required()->check(kFileOrUrl);
  ex->add_option("--vae", ex_vae)->required()->check(CLI::ExistingFile);
  ex->add_option("--index", ex_index, "Row of the data file")->required();
  ex->add_option("--split-seed", ex_split.seed, "Split seed when the model carries none");
  ex->add_option("--train-fraction", ex_split.train_fraction)->check(CLI::Range(0.0, 1.0));
  add_recourse_options(ex, ex_rec);
  add_override_options(ex, ex_over);
  ex->add_flag("--timing", ex_timing, "Include latency fields in the document");

  // benchmark
  BenchmarkOptions bm;
  RecourseOptions bm_rec;
  auto* bench = app.add_subcommand("benchmark", "Explain balanced anchors and report aggregate metrics");
  add_data_options(bench, bm.data, false);
  bench->add_option("--synthetic", bm.synthetic, "Built-in dataset when --data is absent")
      ->check(CLI::IsMember({"blobs", "moons", "xor"}))
      ->capture_default_str();
  bench->add_option("--rows", bm.rows, "Rows of the built-in dataset")->capture_default_str();
  bench->add_option("--model-kind", bm.model_kind)->check(CLI::IsMember({"logistic", "lr", "mlp"}))->capture_default_str();
  bench->add_option("--model", bm.model, "Trained model file or http:// endpoint (needs --data)")
      ->check(kFileOrUrl)
      ->needs("--data");
  bench->add_option("--vae", bm.vae)->check(CLI::ExistingFile);
  bench->add_flag("--image", bm.image, "Use the image VAE preset");
  bench->add_option("--anchors", bm.anchors)->capture_default_str();
  bench->add_option("--train-fraction", bm.train_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  bench->add_option("--out-csv", bm.out_csv, "Per-anchor rows");
  bench->add_option("--timing-out", bm.timing_out, "Latency summary file");
  add_recourse_options(bench, bm_rec);

  // render-contrast
  DataOptions rc_data;
  std::string rc_model, rc_vae, rc_out = "contrast";
  std::size_t rc_index = 0, rc_scale = 16;
  double rc_sigma = 1.0;
  RecourseOptions rc_rec;
  auto* rc = app.add_subcommand("render-contrast", "Explain an image row and write PGM/PPM overlays");
  add_data_options(rc, rc_data);
  rc->add_option("--model", rc_model)->required()->check(kFileOrUrl);
  rc->add_option("--vae", rc_vae)->required()->check(CLI::ExistingFile);
  rc->add_option("--index", rc_index)->required();
  rc->add_option("--kernel-sigma", rc_sigma)->check(CLI::PositiveNumber)->capture_default_str();
  rc->add_option("--scale", rc_scale, "Output pixels per image pixel")->capture_default_str();
  rc->add_option("--out-dir", rc_out)->capture_default_str();
  add_recourse_options(rc, rc_rec);

  // serve
  DataOptions sv_data;
  std::string sv_model, sv_vae, sv_host = "127.0.0.1";
  int sv_port = 8080, sv_idle = 30;
  RecourseOptions sv_rec;
  auto* sv = app.add_subcommand("serve", "Run the HTTP explanation service");
  add_data_options(sv, sv_data);
  sv->add_option("--model", sv_model)->required()->check(kFileOrUrl);
  sv->add_option("--vae", sv_vae)->required()->check(CLI::ExistingFile);
  sv->add_option("--host", sv_host)->capture_default_str();
  sv->add_option("--port", sv_port)->capture_default_str();
  sv->add_option("--idle-timeout", sv_idle, "Session idle timeout in minutes")->capture_default_str();
  add_recourse_options(sv, sv_rec);

  // serve-model
  std::string sm_model, sm_host = "127.0.0.1";
  int sm_port = 8081;
  auto* sm = app.add_subcommand("serve-model", "Expose a model file at POST /predict");
  sm->add_option("--model", sm_model)->required()->check(CLI::ExistingFile);
  sm->add_option("--host", sm_host)->capture_default_str();
  sm->add_option("--port", sm_port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_generate(gen_kind, gen_rows, gen_seed, gen_csv, gen_schema);
    if (*tb) return cmd_train_blackbox(tb_data, tb_kind, tb_split, tb_out);
    if (*tv) return cmd_train_vae(tv_data, tv_split, tv_model, tv_image, tv_epochs, tv_out);
    if (*ex) return cmd_explain(ex_data, ex_model, ex_vae, ex_split, ex_index, ex_rec, ex_over, ex_timing);
    if (*bench) return cmd_benchmark(bm, bm_rec);
    if (*rc) return cmd_render(rc_data, rc_model, rc_vae, rc_index, rc_rec, rc_sigma, rc_scale, rc_out);
    if (*sv) return cmd_serve(sv_data, sv_model, sv_vae, sv_rec, sv_host, sv_port, sv_idle);
    if (*sm) return cmd_serve_model(sm_model, sm_host, sm_port);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
