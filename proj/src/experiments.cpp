#include "pptgnn/experiments.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "pptgnn/errors.hpp"

namespace pptgnn {

namespace {

std::vector<int64_t> target_windows(std::span<const CompiledGraph> graphs) {
  std::set<int64_t> windows;
  for (const auto& g : graphs) windows.insert(g.target_window_index.begin(), g.target_window_index.end());
  return {windows.begin(), windows.end()};
}

std::vector<CompiledGraph> unlabeled_copies(const SplitGraphs& split, const ModelConfig& config) {
  std::vector<CompiledGraph> out;
  for (const auto& g : split.graphs) out.push_back(compile_graph(without_labels(g), config, false));
  return out;
}

std::vector<size_t> label_counts(const CompiledGraph& g, size_t num_classes) {
  std::vector<size_t> counts(num_classes, 0);
  for (int32_t y : g.target_labels) {
    if (y != kUnlabeled) counts.at(static_cast<size_t>(y))++;
  }
  return counts;
}

std::vector<double> proportions(const std::vector<size_t>& counts) {
  size_t total = 0;
  for (size_t c : counts) total += c;
  std::vector<double> p(counts.size(), 0.0);
  if (total == 0) return p;
  for (size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return p;
}

}  // namespace

std::vector<AblationRow> ablation_suite(const PreparedDataset& data, const ModelConfig& config,
                                        const TrainConfig& train_config, const PretrainConfig& pretrain_config) {
  Rng init_rng(train_config.seed);
  const ParameterSet initial = init_parameters(config, init_rng);
  std::vector<AblationRow> rows;

  auto run = [&](const std::string& name, const SplitGraphs& tr, const SplitGraphs& va, const SplitGraphs& te,
                 const ParameterSet& start, double pretrain_seconds) {
    AblationRow row;
    row.variant = name;
    TrainResult result = train(tr.compiled, va.compiled, start, config, train_config);
    row.report = evaluate(te.compiled, result.params, config, data.vocab);
    row.report.training_seconds = result.seconds;
    row.train_seconds = result.seconds;
    row.pretrain_seconds = pretrain_seconds;
    row.test_windows = target_windows(te.compiled);
    rows.push_back(std::move(row));
  };

  run("spatial_only", spatial_only(data.train, config), spatial_only(data.val, config),
      spatial_only(data.test, config), initial, 0.0);
  run("temporal", data.train, data.val, data.test, initial, 0.0);

  PretrainConfig pc = pretrain_config;
  pc.seed = train_config.seed;
  PretrainResult base = pretrain(unlabeled_copies(data.train, config), config, pc);
  Rng head_rng(train_config.seed);
  run("temporal+pretrain", data.train, data.val, data.test, transfer_weights(base.params, config, head_rng),
      base.seconds);

  for (const auto& row : rows) {
    if (row.test_windows != rows.front().test_windows) {
      throw std::logic_error("ablation variants were evaluated on different test windows");
    }
  }
  return rows;
}

std::vector<size_t> rank_windows(std::span<const CompiledGraph> graphs, size_t num_classes, uint64_t seed) {
  std::vector<std::vector<size_t>> counts;
  std::vector<size_t> total(num_classes, 0);
  for (const auto& g : graphs) {
    counts.push_back(label_counts(g, num_classes));
    for (size_t c = 0; c < num_classes; ++c) total[c] += counts.back()[c];
  }
  const std::vector<double> target = proportions(total);
  Rng rng(seed);
  std::vector<uint64_t> tie(graphs.size());
  for (auto& t : tie) t = rng.next_u64();

  std::vector<size_t> ranked;
  std::vector<size_t> empty;
  std::vector<size_t> remaining;
  for (size_t i = 0; i < graphs.size(); ++i) {
    size_t n = 0;
    for (size_t c : counts[i]) n += c;
    (n ? remaining : empty).push_back(i);
  }
  std::vector<size_t> cumulative(num_classes, 0);
  while (!remaining.empty()) {
    size_t best = 0;
    double best_div = 0.0;
    for (size_t k = 0; k < remaining.size(); ++k) {
      const size_t w = remaining[k];
      std::vector<size_t> trial = cumulative;
      for (size_t c = 0; c < num_classes; ++c) trial[c] += counts[w][c];
      const auto p = proportions(trial);
      double div = 0.0;
      for (size_t c = 0; c < num_classes; ++c) div += std::abs(p[c] - target[c]);
      if (k == 0 || div < best_div || (div == best_div && tie[w] < tie[remaining[best]])) {
        best = k;
        best_div = div;
      }
    }
    const size_t w = remaining[best];
    for (size_t c = 0; c < num_classes; ++c) cumulative[c] += counts[w][c];
    ranked.push_back(w);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  std::sort(empty.begin(), empty.end(), [&](size_t a, size_t b) { return tie[a] < tie[b]; });
  ranked.insert(ranked.end(), empty.begin(), empty.end());
  return ranked;
}

WindowSelection undersample_windows(std::span<const CompiledGraph> graphs, size_t num_classes, double fraction,
                                    uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must be in (0, 1]");
  WindowSelection sel;
  std::vector<std::vector<size_t>> counts;
  std::vector<size_t> total(num_classes, 0);
  for (const auto& g : graphs) {
    counts.push_back(label_counts(g, num_classes));
    for (size_t c = 0; c < num_classes; ++c) total[c] += counts.back()[c];
  }
  for (size_t c : total) sel.total_flows += c;
  if (sel.total_flows == 0) throw EmptyDataError("no labeled target flows to undersample");
  sel.full_proportions = proportions(total);

  const std::vector<size_t> ranked = rank_windows(graphs, num_classes, seed);
  const double wanted = fraction * static_cast<double>(sel.total_flows);
  std::vector<size_t> picked(num_classes, 0);
  std::set<size_t> chosen;
  size_t flows = 0;
  for (size_t w : ranked) {
    if (!chosen.empty() && static_cast<double>(flows) >= wanted) break;
    chosen.insert(w);
    for (size_t c = 0; c < num_classes; ++c) {
      picked[c] += counts[w][c];
      flows += counts[w][c];
    }
  }
  for (size_t c = 0; c < num_classes; ++c) {
    if (total[c] == 0 || picked[c] > 0) continue;
    for (size_t w : ranked) {
      if (counts[w][c] == 0) continue;
      if (chosen.insert(w).second) {
        sel.forced.push_back(w);
        for (size_t k = 0; k < num_classes; ++k) {
          picked[k] += counts[w][k];
          flows += counts[w][k];
        }
      }
      break;
    }
  }
  sel.windows.assign(chosen.begin(), chosen.end());
  std::sort(sel.forced.begin(), sel.forced.end());
  sel.selected_flows = flows;
  sel.selected_proportions = proportions(picked);
  for (size_t c = 0; c < num_classes; ++c) {
    sel.max_deviation = std::max(sel.max_deviation, std::abs(sel.selected_proportions[c] - sel.full_proportions[c]));
  }
  sel.balance_violation = !sel.forced.empty() || sel.max_deviation > kBalanceTolerance;
  return sel;
}

FewShotResult fewshot(const FewShotPlan& plan, const PreparedDataset& data,
                      const std::map<std::string, ParameterSet>& bases, const ModelConfig& config,
                      const TrainConfig& finetune, const TrainConfig& reference) {
  FewShotResult out;
  const auto& train_graphs = data.train.compiled;
  if (std::isnan(plan.reference_score)) {
    Rng rng(reference.seed);
    TrainResult ref = train(train_graphs, data.val.compiled, init_parameters(config, rng), config, reference);
    out.reference_score = evaluate(data.test.compiled, ref.params, config, data.vocab).multiclass_macro_f1;
    out.reference_seconds = ref.seconds;
  } else {
    out.reference_score = plan.reference_score;
  }
  for (const std::string& mode : plan.modes) {
    if (mode != "none" && !bases.count(mode)) throw ConfigError("no pre-trained base for mode '" + mode + "'");
  }
  for (double fraction : plan.fractions) {
    const WindowSelection sel = undersample_windows(train_graphs, config.num_classes, fraction, finetune.seed);
    std::vector<CompiledGraph> subset;
    for (size_t w : sel.windows) subset.push_back(train_graphs[w]);
    for (const std::string& mode : plan.modes) {
      Rng rng(finetune.seed);
      ParameterSet start = mode == "none" ? init_parameters(config, rng) : transfer_weights(bases.at(mode), config, rng);
      TrainResult result = train(subset, data.val.compiled, std::move(start), config, finetune);
      FewShotRow row;
      row.fraction = fraction;
      row.mode = mode;
      row.epochs = finetune.epochs;
      row.windows = sel.windows.size();
      row.flows = sel.selected_flows;
      row.report = evaluate(data.test.compiled, result.params, config, data.vocab);
      row.report.training_seconds = result.seconds;
      row.macro_f1 = row.report.multiclass_macro_f1;
      row.percent_loss =
          out.reference_score > 0 ? 100.0 * (out.reference_score - row.macro_f1) / out.reference_score : NAN;
      row.seconds = result.seconds;
      row.balance_violation = sel.balance_violation;
      row.max_deviation = sel.max_deviation;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace pptgnn
