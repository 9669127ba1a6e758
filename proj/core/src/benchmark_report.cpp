#include "ctrex/benchmark_report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"
#include "ctrex/random.hpp"
#include "ctrex/surrogate.hpp"

namespace ctrex {

namespace {

constexpr int kReportVersion = 1;

std::string fixed(double v) {
  std::ostringstream out;
  out.precision(9);
  out << v;
  return out.str();
}

nlohmann::json summary_to_json(const Summary& s) { return {{"mean", s.mean}, {"median", s.median}}; }

}  // namespace

Summary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return {sum / static_cast<double>(n), median};
}

BenchmarkReport run_benchmark(std::span<const Instance> anchors, const BlackBox& model, const Dataset& pool,
                              const VaeModel& vae, const RecourseConfig& config) {
  if (anchors.empty()) throw std::invalid_argument("benchmark needs at least one anchor");
  config.validate();
  PoolIndex index(pool, model, vae);
  BenchmarkReport report;
  report.anchors = anchors.size();
  std::vector<double> l0, l2, vae_dist, red, ynn, fid, latency;
  std::size_t flipped = 0;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    AnchorResult row;
    row.anchor = a;
    row.id = anchors[a].id;
    RecourseConfig cfg = config;
    cfg.seed = derive_seed(config.seed, a);
    ExplainSession session(model, index, vae, cfg);
    try {
      const auto e = session.explain(anchors[a]);
      row.fact_label = e.fact_label;
      row.contrast_label = e.contrast_label;
      row.flipped = e.best.flipped;
      row.attempts = e.attempts;
      row.fidelity = e.fidelity;
      row.tree_nodes = e.tree_nodes;
      row.rule_count = e.best.path.rule_count();
      row.path_cost = e.best.path.cost;
      row.diverse = e.diverse.size();
      row.metrics = e.best.metrics;
      row.latency_s = e.elapsed_s;
    } catch (const NoPathError& err) {
      row.status = "no_path";
      row.message = err.what();
      // The surrogate was fitted; keep its numbers for the fidelity summary.
      row.fact_label = model.predict_label(anchors[a]);
      row.contrast_label = resolve_contrast(model.class_count(), row.fact_label, cfg.contrast_class);
      row.fidelity = fidelity(*session.tree(), *session.neighborhood());
      row.tree_nodes = session.tree()->node_count();
    } catch (const NoContrastError& err) {
      row.status = "no_contrast";
      row.message = err.what();
    } catch (const InfeasibleRealization& err) {
      row.status = "infeasible";
      row.message = err.what();
    } catch (const SurrogateError& err) {
      row.status = "surrogate";
      row.message = err.what();
    } catch (const std::exception& err) {
      row.status = "error";
      row.message = err.what();
    }
    if (row.status == "ok") {
      ++report.explained;
      flipped += row.flipped;
      report.immutability_violations += row.metrics.immutability_violations;
      report.semi_immutability_violations += row.metrics.semi_immutability_violations;
      l0.push_back(static_cast<double>(row.metrics.l0));
      l2.push_back(row.metrics.l2);
      vae_dist.push_back(row.metrics.vae_dist);
      if (row.flipped) red.push_back(static_cast<double>(row.metrics.redundancy));
      ynn.push_back(row.metrics.ynn);
      latency.push_back(row.latency_s);
    }
    if (row.tree_nodes > 0) fid.push_back(row.fidelity);
    report.rows.push_back(std::move(row));
  }
  report.flip_rate = static_cast<double>(flipped) / static_cast<double>(anchors.size());
  report.l0 = summarize(l0);
  report.l2 = summarize(l2);
  report.vae_dist = summarize(vae_dist);
  report.redundancy = summarize(red);
  report.ynn = summarize(ynn);
  report.fidelity = summarize(fid);
  report.latency_s = summarize(latency);
  return report;
}

std::string BenchmarkReport::to_csv(bool include_timing) const {
  std::ostringstream out;
  out << "anchor,id,status,fact,contrast,flipped,attempts,fidelity,tree_nodes,rules,cost,diverse,"
         "l0,l2,vae_dist,redundancy,ynn,immutable_violations,direction_violations";
  if (include_timing) out << ",latency_s";
  out << "\n";
  for (const auto& r : rows) {
    out << r.anchor << "," << csv::escape(r.id.value_or("")) << "," << r.status << "," << r.fact_label << ","
        << r.contrast_label << "," << (r.flipped ? 1 : 0) << "," << r.attempts << "," << fixed(r.fidelity) << ","
        << r.tree_nodes << "," << r.rule_count << "," << fixed(r.path_cost) << "," << r.diverse << ","
        << r.metrics.l0 << "," << fixed(r.metrics.l2) << "," << fixed(r.metrics.vae_dist) << ","
        << r.metrics.redundancy << "," << fixed(r.metrics.ynn) << "," << r.metrics.immutability_violations
        << "," << r.metrics.semi_immutability_violations;
    if (include_timing) out << "," << fixed(r.latency_s);
    out << "\n";
  }
  return out.str();
}

nlohmann::json BenchmarkReport::summary_json(bool include_timing) const {
  nlohmann::json failures = nlohmann::json::object();
  for (const auto& r : rows) {
    if (r.status != "ok") failures[r.status] = failures.value(r.status, 0) + 1;
  }
  nlohmann::json out = {{"schema_version", kReportVersion},
                        {"anchors", anchors},
                        {"explained", explained},
                        {"flip_rate", flip_rate},
                        {"failures", std::move(failures)},
                        {"immutability_violations", immutability_violations},
                        {"semi_immutability_violations", semi_immutability_violations},
                        {"l0", summary_to_json(l0)},
                        {"l2", summary_to_json(l2)},
                        {"vae_dist", summary_to_json(vae_dist)},
                        {"redundancy", summary_to_json(redundancy)},
                        {"ynn", summary_to_json(ynn)},
                        {"fidelity", summary_to_json(fidelity)}};
  if (include_timing) out["latency_s"] = summary_to_json(latency_s);
  return out;
}

std::vector<std::size_t> balanced_anchor_indices(const Dataset& data, const BlackBox& model, std::size_t n,
                                                 std::span<const int> classes, std::uint64_t seed) {
  if (classes.empty()) throw std::invalid_argument("no anchor classes given");
  if (n % classes.size() != 0) throw std::invalid_argument("anchor count must divide evenly among the classes");
  const auto per_class = n / classes.size();
  const auto labels = model.predict_labels(data.rows());
  std::mt19937_64 rng(seed);
  const auto order = permutation(data.size(), rng);
  std::vector<std::vector<std::size_t>> picked(classes.size());
  for (auto i : order) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (labels[i] == classes[c] && picked[c].size() < per_class) picked[c].push_back(i);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (picked[c].size() < per_class) {
      throw std::invalid_argument("only " + std::to_string(picked[c].size()) + " rows are predicted as class " +
                                  std::to_string(classes[c]) + ", need " + std::to_string(per_class));
    }
  }
  // Interleave so that any prefix stays roughly balanced.
  for (std::size_t k = 0; k < per_class; ++k) {
    for (const auto& p : picked) out.push_back(p[k]);
  }
  return out;
}

}  // namespace ctrex
