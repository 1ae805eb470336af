#include "semq/aqe/aqe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "semq/bench/quality.hpp"
#include "semq/common.hpp"
#include "semq/exec/semantic.hpp"

namespace semq::aqe {

using catalog::Chunk;

double mcc(const std::vector<bool>& r1, const std::vector<bool>& r2) {
  if (r1.size() != r2.size()) {
    throw ExecError(
        fmt::format("mcc: vector lengths differ ({} vs {})", r1.size(), r2.size()));
  }
  if (r1.empty()) throw ExecError("mcc: empty vectors");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1[i] && r2[i]) ++tp;
    else if (!r1[i] && !r2[i]) ++tn;
    else if (r2[i]) ++fp;
    else ++fn;
  }
  const double d1 = tp + fp, d2 = tp + fn, d3 = tn + fp, d4 = tn + fn;
  if (d1 == 0 || d2 == 0 || d3 == 0 || d4 == 0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(d1 * d2 * d3 * d4);
}

AqeConfig AqeConfig::from_options(const exec::ExecOptions& options) {
  AqeConfig cfg;
  cfg.delta1 = options.aqe_delta1;
  cfg.delta2 = options.aqe_delta2;
  cfg.mcc_threshold = options.aqe_mcc_threshold;
  cfg.acc_threshold = options.aqe_acc_threshold;
  cfg.objective = options.aqe_cost_first ? Objective::CostFirst : Objective::LatencyFirst;
  cfg.accuracy_metric =
      options.aqe_plain_accuracy ? AccuracyMetric::PlainAccuracy : AccuracyMetric::F1;
  cfg.pricing = options.pricing;
  return cfg;
}

namespace {

std::size_t total_rows(const std::vector<Chunk>& chunks) {
  std::size_t rows = 0;
  for (const auto& chunk : chunks) rows += chunk.row_count();
  return rows;
}

const sql::NlExpr& filter_expr(const sql::PlanPtr& filter) {
  if (!filter || filter->kind != sql::PlanKind::SemFilter || !filter->expr) {
    throw ExecError("adaptive execution requires semantic-filter plan nodes");
  }
  return *filter->expr;
}

std::string path_label_name(PathLabel label) {
  switch (label) {
    case PathLabel::Reference: return "reference";
    case PathLabel::Base: return "base";
    case PathLabel::FusedVariant: return "fused";
  }
  return "?";
}

std::vector<std::vector<std::size_t>> step_signature(const ExecutionPath& path) {
  std::vector<std::vector<std::size_t>> signature;
  for (const auto& step : path.steps) signature.push_back(step.filters);
  return signature;
}

}  // namespace

FilterStats collect_filter_stats(const std::vector<sql::PlanPtr>& filters,
                                 const std::vector<Chunk>& sample, exec::ExecContext& ctx) {
  FilterStats stats;
  const std::size_t n = filters.size();
  stats.sample_rows = total_rows(sample);
  stats.cost.label = "expression exploration";
  stats.cost.rows_in = static_cast<std::int64_t>(stats.sample_rows);
  stats.selectivity.assign(n, 0.0);
  stats.result_vectors.assign(n, {});
  for (std::size_t f = 0; f < n; ++f) {
    auto& vec = stats.result_vectors[f];
    vec.reserve(stats.sample_rows);
    for (const Chunk& chunk : sample) {
      auto result = exec::eval_sem_filter(chunk, filter_expr(filters[f]),
                                          exec::CallMode::per_tuple(), ctx);
      vec.insert(vec.end(), result.verdicts.begin(), result.verdicts.end());
      stats.cost.merge_counts(result.metrics);
    }
    if (stats.sample_rows > 0) {
      stats.selectivity[f] =
          static_cast<double>(std::count(vec.begin(), vec.end(), true)) /
          static_cast<double>(stats.sample_rows);
    }
  }
  stats.mcc.assign(n, std::vector<double>(n, 0.0));
  if (stats.sample_rows > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double value = mcc(stats.result_vectors[i], stats.result_vectors[j]);
        stats.mcc[i][j] = value;
        stats.mcc[j][i] = value;
      }
    }
  }
  return stats;
}

std::vector<ExecutionPath> generate_paths(const std::vector<sql::PlanPtr>& filters,
                                          const FilterStats& stats, const AqeConfig& cfg,
                                          const exec::ExecOptions& options) {
  const std::size_t n = filters.size();
  std::vector<ExecutionPath> paths;
  std::vector<std::vector<std::vector<std::size_t>>> signatures;
  auto emit = [&](ExecutionPath path) {
    auto signature = step_signature(path);
    for (const auto& seen : signatures) {
      if (seen == signature) return;  // identical step sequence already present
    }
    signatures.push_back(std::move(signature));
    paths.push_back(std::move(path));
  };

  auto single_step = [&](std::size_t f) {
    PathStep step;
    step.filters = {f};
    step.est_selectivity = stats.selectivity[f];
    return step;
  };

  ExecutionPath reference;
  reference.label = PathLabel::Reference;
  reference.name = "reference";
  for (std::size_t f = 0; f < n; ++f) reference.steps.push_back(single_step(f));
  emit(std::move(reference));

  // Ascending selectivity, stable tie-break by original position.
  std::vector<std::size_t> sorted(n);
  std::iota(sorted.begin(), sorted.end(), 0);
  std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
    return stats.selectivity[a] < stats.selectivity[b];
  });

  ExecutionPath base;
  base.label = PathLabel::Base;
  base.name = "base";
  for (std::size_t f : sorted) base.steps.push_back(single_step(f));
  emit(std::move(base));

  if (options.fusion) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!(stats.mcc[i][j] > cfg.mcc_threshold)) continue;
        if (!exec::fuse(*filters[i], *filters[j])) continue;  // structurally unfusable
        PathStep fused;
        fused.filters = {i, j};
        fused.est_selectivity = std::min(stats.selectivity[i], stats.selectivity[j]);
        ExecutionPath variant;
        variant.label = PathLabel::FusedVariant;
        variant.name = fmt::format("fused({},{})", i + 1, j + 1);
        // Replace the pair's earlier occurrence in the sorted order with the
        // fused step and drop the other; the remaining order is untouched.
        bool placed = false;
        for (std::size_t f : sorted) {
          if (f == i || f == j) {
            if (!placed) {
              variant.steps.push_back(fused);
              placed = true;
            }
            continue;
          }
          variant.steps.push_back(single_step(f));
        }
        emit(std::move(variant));
      }
    }
  }

  if (options.batching) {
    const std::size_t unbatched = paths.size();
    for (std::size_t k = 0; k < unbatched; ++k) {
      ExecutionPath counterpart = paths[k];
      counterpart.batched = true;
      counterpart.unbatched_twin = k;
      counterpart.name += " (batched)";
      paths.push_back(std::move(counterpart));
    }
  }
  return paths;
}

PathRun run_path(const ExecutionPath& path, const std::vector<sql::PlanPtr>& filters,
                 const std::vector<Chunk>& chunks, exec::ExecContext& ctx) {
  PathRun out;
  out.metrics.label = path.name.empty() ? "path" : path.name;
  out.selection.reserve(total_rows(chunks));
  const exec::CallMode mode = path.batched ? exec::CallMode::batched_of(ctx.options.batch_size)
                                           : exec::CallMode::per_tuple();
  for (const Chunk& chunk : chunks) {
    const std::size_t rows = chunk.row_count();
    out.metrics.rows_in += static_cast<std::int64_t>(rows);
    std::vector<bool> mask(rows, true);
    std::vector<std::size_t> alive(rows);
    std::iota(alive.begin(), alive.end(), 0);
    for (const PathStep& step : path.steps) {
      if (alive.empty()) break;
      Chunk sub = Chunk::empty_like(chunk.schema, chunk.row_offset);
      for (std::size_t row : alive) sub.append_row_from(chunk, row);
      std::vector<bool> verdicts;
      if (step.fused()) {
        auto pair = exec::fuse(*filters[step.filters[0]], *filters[step.filters[1]]);
        if (!pair) throw ExecError(fmt::format("step '{}' is not fusable", path.name));
        pair->est_selectivity = step.est_selectivity;
        auto result = exec::eval_fused(sub, *pair, mode, ctx);
        verdicts = std::move(result.mask);
        out.metrics.merge_counts(result.metrics);
      } else {
        auto result =
            exec::eval_sem_filter(sub, filter_expr(filters[step.filters[0]]), mode, ctx);
        verdicts = std::move(result.verdicts);
        out.metrics.merge_counts(result.metrics);
      }
      std::vector<std::size_t> next;
      next.reserve(alive.size());
      for (std::size_t t = 0; t < alive.size(); ++t) {
        if (verdicts[t]) next.push_back(alive[t]);
        else mask[alive[t]] = false;
      }
      alive = std::move(next);
    }
    out.metrics.rows_out += static_cast<std::int64_t>(alive.size());
    out.selection.insert(out.selection.end(), mask.begin(), mask.end());
  }
  return out;
}

std::vector<PathMetrics> explore_paths(const std::vector<ExecutionPath>& paths,
                                       const std::vector<sql::PlanPtr>& filters,
                                       const std::vector<Chunk>& sample, const AqeConfig& cfg,
                                       exec::ExecContext& ctx) {
  std::vector<PathMetrics> metrics(paths.size());
  if (paths.empty()) return metrics;

  // Exploration deliberately re-runs identical prompts across candidates;
  // the cache would hide their true cost.
  exec::ExecContext explore_ctx{ctx.gateway, ctx.options, ctx.aqe_traces};
  explore_ctx.options.bypass_cache = true;

  std::size_t reference = paths.size();
  for (std::size_t k = 0; k < paths.size(); ++k) {
    if (!paths[k].batched && paths[k].label == PathLabel::Reference) {
      reference = k;
      break;
    }
  }
  if (reference == paths.size()) throw ExecError("candidate set lacks an unbatched reference");

  auto score = [&](const std::vector<bool>& selection, const std::vector<bool>& truth) {
    auto report = bench::quality(selection, truth);
    return cfg.accuracy_metric == AccuracyMetric::F1 ? report.f1 : report.accuracy;
  };
  auto evaluate = [&](std::size_t k) {
    PathRun run = run_path(paths[k], filters, sample, explore_ctx);
    PathMetrics& m = metrics[k];
    m.evaluated = true;
    m.selection = std::move(run.selection);
    m.latency_ms = run.metrics.latency_ms;
    m.usage = run.metrics.usage;
    m.monetary_cost = llm::cost(run.metrics.usage, cfg.pricing);
    m.llm_calls = run.metrics.llm_calls;
  };

  evaluate(reference);
  metrics[reference].accuracy = 1.0;  // proxy ground truth by definition
  metrics[reference].survived = true;
  const std::vector<bool>& truth = metrics[reference].selection;

  bool batched_reference_failed = false;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    if (k == reference) continue;
    const ExecutionPath& path = paths[k];
    PathMetrics& m = metrics[k];
    if (path.batched) {
      if (batched_reference_failed && path.label != PathLabel::Reference) {
        m.skip_reason = "pruned: batched reference scored below the accuracy threshold";
        continue;
      }
      if (path.label == PathLabel::FusedVariant && path.unbatched_twin &&
          metrics[*path.unbatched_twin].evaluated && !metrics[*path.unbatched_twin].survived) {
        m.skip_reason = "pruned: unbatched fused counterpart scored below the accuracy threshold";
        continue;
      }
    }
    evaluate(k);
    m.accuracy = score(m.selection, truth);
    m.survived = m.accuracy >= cfg.acc_threshold;
    if (path.batched && path.label == PathLabel::Reference && !m.survived) {
      batched_reference_failed = true;
    }
  }
  return metrics;
}

std::vector<std::size_t> pareto_frontier(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (j == i) continue;
      const bool no_worse =
          points[j].first <= points[i].first && points[j].second <= points[i].second;
      const bool better =
          points[j].first < points[i].first || points[j].second < points[i].second;
      dominated = no_worse && better;
    }
    if (!dominated) frontier.push_back(i);
  }
  return frontier;
}

std::size_t select_path(const std::vector<ExecutionPath>& paths,
                        const std::vector<PathMetrics>& metrics,
                        const std::vector<std::size_t>& frontier, Objective objective) {
  if (frontier.empty()) throw ExecError("path selection over an empty frontier");
  auto key = [&](std::size_t index) {
    return objective == Objective::LatencyFirst ? metrics[index].latency_ms
                                                : metrics[index].monetary_cost;
  };
  std::size_t best = frontier[0];
  for (std::size_t pos = 1; pos < frontier.size(); ++pos) {
    const std::size_t candidate = frontier[pos];
    if (key(candidate) < key(best)) {
      best = candidate;
      continue;
    }
    if (key(candidate) > key(best)) continue;
    // Tie: fewer steps, then the reference path, then input order.
    if (paths[candidate].steps.size() < paths[best].steps.size()) {
      best = candidate;
    } else if (paths[candidate].steps.size() == paths[best].steps.size() &&
               paths[candidate].label == PathLabel::Reference &&
               paths[best].label != PathLabel::Reference) {
      best = candidate;
    }
  }
  return best;
}

namespace {

PhaseTrace phase_trace(std::size_t rows, const exec::OperatorMetrics& metrics) {
  PhaseTrace trace;
  trace.rows = rows;
  trace.llm_calls = metrics.llm_calls;
  trace.usage = metrics.usage;
  trace.latency_ms = metrics.latency_ms;
  return trace;
}

nlohmann::json phase_json(const PhaseTrace& phase) {
  return {{"rows", phase.rows},
          {"llm_calls", phase.llm_calls},
          {"input_tokens", phase.usage.input_tokens},
          {"output_tokens", phase.usage.output_tokens},
          {"latency_ms", phase.latency_ms}};
}

}  // namespace

nlohmann::json AqeTrace::to_json() const {
  nlohmann::json doc;
  doc["total_rows"] = total_rows;
  doc["phases"] = {{"expression_exploration", phase_json(phase1)},
                   {"path_exploration", phase_json(phase2)},
                   {"path_exploitation", phase_json(phase3)}};
  doc["selectivity"] = selectivity;
  doc["mcc"] = mcc;
  nlohmann::json path_docs = nlohmann::json::array();
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const ExecutionPath& path = paths[k];
    nlohmann::json entry;
    entry["name"] = path.name;
    entry["label"] = path_label_name(path.label);
    entry["batched"] = path.batched;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : path.steps) {
      steps.push_back({{"filters", step.filters}, {"est_selectivity", step.est_selectivity}});
    }
    entry["steps"] = std::move(steps);
    if (k < path_metrics.size()) {
      const PathMetrics& m = path_metrics[k];
      entry["evaluated"] = m.evaluated;
      entry["survived"] = m.survived;
      if (!m.skip_reason.empty()) entry["skip_reason"] = m.skip_reason;
      if (m.evaluated) {
        entry["accuracy"] = m.accuracy;
        entry["latency_ms"] = m.latency_ms;
        entry["monetary_cost"] = m.monetary_cost;
        entry["llm_calls"] = m.llm_calls;
        entry["input_tokens"] = m.usage.input_tokens;
        entry["output_tokens"] = m.usage.output_tokens;
        entry["selected_rows"] =
            static_cast<std::int64_t>(std::count(m.selection.begin(), m.selection.end(), true));
      }
    }
    path_docs.push_back(std::move(entry));
  }
  doc["paths"] = std::move(path_docs);
  doc["frontier"] = frontier;
  if (selected) doc["selected"] = paths.at(*selected).name;
  doc["notes"] = notes;
  return doc;
}

AqeResult run_aqe(const std::vector<sql::PlanPtr>& filters, const std::vector<Chunk>& input,
                  const AqeConfig& cfg, exec::ExecContext& ctx) {
  AqeResult out;
  out.metrics.label = fmt::format("AdaptiveSemFilter[{}]", filters.size());
  const std::size_t total = total_rows(input);
  out.trace.total_rows = total;
  out.verdicts.assign(total, false);
  if (total == 0 || filters.empty()) return out;

  // Phase boundaries land on the first chunk boundaries reaching the nominal
  // row limits.
  const double limit1 = cfg.delta1 * static_cast<double>(total);
  const double limit2 = (cfg.delta1 + cfg.delta2) * static_cast<double>(total);
  std::vector<Chunk> phase1, phase2, phase3;
  std::size_t seen = 0;
  for (const Chunk& chunk : input) {
    if (static_cast<double>(seen) < limit1) phase1.push_back(chunk);
    else if (static_cast<double>(seen) < limit2) phase2.push_back(chunk);
    else phase3.push_back(chunk);
    seen += chunk.row_count();
  }
  const std::size_t rows1 = total_rows(phase1);
  const std::size_t rows2 = total_rows(phase2);
  const std::size_t rows3 = total_rows(phase3);

  // Phase 1: independent per-tuple evaluation of every filter; the verdict
  // for these rows is the conjunction.
  FilterStats stats = collect_filter_stats(filters, phase1, ctx);
  for (std::size_t r = 0; r < rows1; ++r) {
    bool keep = true;
    for (std::size_t f = 0; f < filters.size() && keep; ++f) keep = stats.result_vectors[f][r];
    out.verdicts[r] = keep;
  }
  out.trace.phase1 = phase_trace(rows1, stats.cost);
  out.trace.selectivity = stats.selectivity;
  out.trace.mcc = stats.mcc;

  out.trace.paths = generate_paths(filters, stats, cfg, ctx.options);
  std::size_t reference = 0;
  for (std::size_t k = 0; k < out.trace.paths.size(); ++k) {
    if (!out.trace.paths[k].batched && out.trace.paths[k].label == PathLabel::Reference) {
      reference = k;
      break;
    }
  }

  // Phase 2: micro-execute the candidates; the reference's verdicts feed the
  // result, and the survivors' Pareto frontier yields the exploitation path.
  std::size_t selected = reference;
  if (rows2 > 0) {
    auto metrics = explore_paths(out.trace.paths, filters, phase2, cfg, ctx);
    const auto& truth = metrics[reference].selection;
    for (std::size_t r = 0; r < rows2; ++r) out.verdicts[rows1 + r] = truth[r];

    exec::OperatorMetrics explored;
    explored.label = "path exploration";
    explored.rows_in = static_cast<std::int64_t>(rows2);
    std::vector<std::pair<double, double>> points;
    std::vector<std::size_t> owners;
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      if (!metrics[k].evaluated) continue;
      explored.llm_calls += metrics[k].llm_calls;
      explored.usage += metrics[k].usage;
      explored.latency_ms += metrics[k].latency_ms;
      if (metrics[k].survived) {
        points.emplace_back(metrics[k].latency_ms, metrics[k].monetary_cost);
        owners.push_back(k);
      }
    }
    for (std::size_t pos : pareto_frontier(points)) out.trace.frontier.push_back(owners[pos]);
    selected = select_path(out.trace.paths, metrics, out.trace.frontier, cfg.objective);
    out.trace.path_metrics = std::move(metrics);
    out.trace.phase2 = phase_trace(rows2, explored);
  } else {
    out.trace.path_metrics.assign(out.trace.paths.size(), PathMetrics{});
    out.trace.notes.push_back(
        "path exploration skipped: the expression-exploration sample covered the input; "
        "the reference path is retained");
  }
  out.trace.selected = selected;

  // Phase 3: the selected path processes the remainder.
  if (rows3 > 0) {
    PathRun run = run_path(out.trace.paths[selected], filters, phase3, ctx);
    for (std::size_t r = 0; r < rows3; ++r) out.verdicts[rows1 + rows2 + r] = run.selection[r];
    out.trace.phase3 = phase_trace(rows3, run.metrics);
  }

  auto phase_metrics = [](const char* label, const PhaseTrace& phase) {
    exec::OperatorMetrics m;
    m.label = label;
    m.llm_calls = phase.llm_calls;
    m.usage = phase.usage;
    m.latency_ms = phase.latency_ms;
    m.rows_in = static_cast<std::int64_t>(phase.rows);
    return m;
  };
  out.metrics.children.push_back(phase_metrics("expression exploration", out.trace.phase1));
  out.metrics.children.push_back(phase_metrics("path exploration", out.trace.phase2));
  out.metrics.children.push_back(phase_metrics("path exploitation", out.trace.phase3));
  out.metrics.rows_in = static_cast<std::int64_t>(total);
  out.metrics.rows_out =
      static_cast<std::int64_t>(std::count(out.verdicts.begin(), out.verdicts.end(), true));
  return out;
}

}  // namespace semq::aqe
