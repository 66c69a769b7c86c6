#include "pptgnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "pptgnn/errors.hpp"

namespace pptgnn {

FlowSplit chronological_split(std::span<const FlowRecord> flows, double window_size, const SplitRatios& ratios) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  if (!(window_size > 0)) throw ConfigError("window_size must be > 0");
  for (size_t i = 1; i < flows.size(); ++i) {
    if (flow_order_less(flows[i], flows[i - 1])) throw std::invalid_argument("chronological_split: unsorted flows");
  }
  FlowSplit split;
  const WindowRange all = default_window_range(flows, window_size);
  const size_t n = flows.size();
  auto boundary = [&](double cumulative) -> int64_t {
    const auto k = static_cast<size_t>(std::llround(cumulative * static_cast<double>(n)));
    if (k >= n) return all.last;
    return all.grid.index_of(flows[k].start_time);
  };
  const int64_t b1 = boundary(ratios.train);
  const int64_t b2 = std::max(b1, boundary(ratios.train + ratios.val));
  split.ranges[0] = {all.grid, all.first, b1};
  split.ranges[1] = {all.grid, b1, b2};
  split.ranges[2] = {all.grid, b2, all.last};
  for (const auto& f : flows) {
    const int64_t w = all.grid.index_of(f.start_time);
    const size_t part = w < b1 ? 0 : (w < b2 ? 1 : 2);
    split.parts[part].push_back(f);
  }
  constexpr std::array<const char*, 3> names = {"train", "val", "test"};
  const std::array<double, 3> wanted = {ratios.train, ratios.val, ratios.test};
  for (size_t i = 0; i < 3; ++i) {
    if (split.parts[i].empty() && wanted[i] > 0) {
      split.warnings.push_back(std::string(names[i]) + " split received no flows");
    }
  }
  return split;
}

SplitGraphs build_split_graphs(std::span<const FlowRecord> flows, const WindowRange& range,
                               const GraphBuildConfig& graph_config, const FeatureCodec& codec,
                               const ModelConfig& model_config, bool keep_labels) {
  SplitGraphs out;
  if (flows.empty() || range.last <= range.first) return out;
  out.snapshots = build_snapshots(flows, graph_config, &codec, range);
  out.graphs = assemble_all(out.snapshots, graph_config);
  out.compiled.reserve(out.graphs.size());
  for (const auto& g : out.graphs) out.compiled.push_back(compile_graph(g, model_config, keep_labels));
  return out;
}

SplitGraphs spatial_only(const SplitGraphs& split, const ModelConfig& model_config) {
  SplitGraphs out;
  out.snapshots = split.snapshots;
  for (size_t i = 0; i < split.graphs.size(); ++i) {
    out.graphs.push_back(without_temporal_edges(split.graphs[i]));
    CompiledGraph c = compile_graph(out.graphs.back(), model_config, true);
    c.target_labels = split.compiled[i].target_labels;
    out.compiled.push_back(std::move(c));
  }
  return out;
}

PreparedDataset prepare_dataset(std::span<const FlowRecord> flows, const LabelVocabulary& vocab,
                                const GraphBuildConfig& graph_config, ModelConfig& model_config,
                                const SplitRatios& ratios, const CodecOptions& codec_options) {
  graph_config.validate();
  PreparedDataset data;
  data.vocab = vocab;
  data.graph_config = graph_config;
  data.split = chronological_split(flows, graph_config.window_size, ratios);
  data.codec = fit_codec(data.split.train(), codec_options);
  model_config.feature_dim = data.codec.feature_dim();
  model_config.num_classes = std::max<size_t>(2, vocab.size());
  model_config.flow_encoding_dim = graph_config.flow_encoding_dim;
  model_config.window_encoding_dim = graph_config.window_encoding_dim;
  SplitGraphs* parts[3] = {&data.train, &data.val, &data.test};
  for (size_t i = 0; i < 3; ++i) {
    *parts[i] = build_split_graphs(data.split.parts[i], data.split.ranges[i], graph_config, data.codec, model_config);
  }
  return data;
}

std::vector<size_t> class_counts(std::span<const CompiledGraph> graphs, size_t num_classes) {
  std::vector<size_t> counts(num_classes, 0);
  for (const auto& g : graphs) {
    for (int32_t y : g.target_labels) {
      if (y == kUnlabeled) continue;
      if (static_cast<size_t>(y) >= num_classes) throw std::invalid_argument("label outside class range");
      counts[static_cast<size_t>(y)]++;
    }
  }
  return counts;
}

namespace {

std::vector<double> training_weights(std::span<const CompiledGraph> graphs, const ModelConfig& config,
                                     bool weighted) {
  std::vector<int32_t> labels;
  for (const auto& g : graphs) labels.insert(labels.end(), g.target_labels.begin(), g.target_labels.end());
  size_t labeled = 0;
  for (int32_t y : labels) labeled += y != kUnlabeled;
  if (labeled == 0) throw EmptyDataError("no labeled target flows to train on");
  if (!weighted) return {};
  return inverse_frequency_weights(labels, config.num_classes);
}

template <typename T>
std::vector<const T*> pointers(std::span<const T> items) {
  std::vector<const T*> out;
  for (const auto& x : items) out.push_back(&x);
  return out;
}

int32_t argmax_row(const Tensor& logits, Eigen::Index row) {
  Eigen::Index best = 0;
  logits.row(row).maxCoeff(&best);
  return static_cast<int32_t>(best);
}

LabelVocabulary vocab_for(const LabelVocabulary& vocab, size_t num_classes) {
  if (vocab.size() >= num_classes) return vocab;
  std::vector<std::string> names(vocab.names().begin() + 1, vocab.names().end());
  for (size_t i = vocab.size(); i < num_classes; ++i) names.push_back("~unused" + std::to_string(i));
  return LabelVocabulary(names);
}

double macro_f1_of(const std::vector<FlowPrediction>& predictions, size_t num_classes) {
  std::vector<int32_t> truth;
  std::vector<int32_t> pred;
  for (const auto& p : predictions) {
    if (p.label == kUnlabeled) continue;
    truth.push_back(p.label);
    pred.push_back(p.predicted);
  }
  return truth.empty() ? NAN : macro_f1(truth, pred, num_classes);
}

std::vector<FlowPrediction> predict_merged(const CompiledGraph& merged, const ParameterSet& params,
                                           const ModelConfig& config) {
  std::map<uint64_t, FlowPrediction> latest;
  if (merged.target_flows.empty()) return {};
  FlowLogits logits = forward(merged, params, config);
  for (size_t i = 0; i < logits.flow_ids.size(); ++i) {
    FlowPrediction p{logits.flow_ids[i], logits.window_index[i], merged.target_labels[i],
                     argmax_row(logits.logits, static_cast<Eigen::Index>(i))};
    auto [it, inserted] = latest.emplace(p.flow_id, p);
    if (!inserted && p.window_index >= it->second.window_index) it->second = p;
  }
  std::vector<FlowPrediction> out;
  out.reserve(latest.size());
  for (auto& [id, p] : latest) out.push_back(p);
  return out;
}

}  // namespace

TrainResult train(std::span<const CompiledGraph> train_graphs, std::span<const CompiledGraph> val_graphs,
                  ParameterSet params, const ModelConfig& config, const TrainConfig& options) {
  if (options.epochs == 0 || !(options.learning_rate > 0)) throw ConfigError("epochs and learning rate must be > 0");
  const auto started = std::chrono::steady_clock::now();
  const std::vector<double> weights = training_weights(train_graphs, config, options.weighted_loss);
  const bool use_val = options.select_on_validation && !val_graphs.empty();
  CompiledGraph val_merged;
  if (use_val) val_merged = merge_graphs(pointers(val_graphs));

  Rng rng(options.seed);
  AdamState adam(AdamConfig{.learning_rate = options.learning_rate});
  std::vector<size_t> order(train_graphs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t batch = options.batch_size == 0 ? train_graphs.size() : options.batch_size;
  // Without shuffling there is nothing to re-merge between epochs.
  std::vector<CompiledGraph> fixed_batches;
  const bool single_batch = batch >= train_graphs.size();
  if (single_batch) fixed_batches.push_back(merge_graphs(pointers(train_graphs)));

  TrainResult result;
  double best_score = -1.0;
  for (size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    double loss_sum = 0.0;
    size_t labeled_sum = 0;
    auto run_batch = [&](const CompiledGraph& g) {
      size_t labeled = 0;
      for (int32_t y : g.target_labels) labeled += y != kUnlabeled;
      if (labeled == 0) return;
      Evaluation eval = classification_objective(g, params, config, weights, true);
      adam_step(params, eval.grads, adam);
      loss_sum += eval.loss * static_cast<double>(labeled);
      labeled_sum += labeled;
    };
    if (single_batch) {
      run_batch(fixed_batches.front());
    } else {
      rng.shuffle(order);
      for (size_t begin = 0; begin < order.size(); begin += batch) {
        std::vector<const CompiledGraph*> members;
        for (size_t i = begin; i < std::min(order.size(), begin + batch); ++i) members.push_back(&train_graphs[order[i]]);
        run_batch(merge_graphs(members));
      }
    }
    log.train_loss = labeled_sum ? loss_sum / static_cast<double>(labeled_sum) : 0.0;
    if (use_val) {
      log.val_macro_f1 = macro_f1_of(predict_merged(val_merged, params, config), config.num_classes);
      if (!std::isnan(log.val_macro_f1) && log.val_macro_f1 > best_score) {
        best_score = log.val_macro_f1;
        result.best_epoch = epoch;
        result.params = params;
      }
    }
    result.log.push_back(log);
  }
  if (result.best_epoch == 0) {
    result.best_epoch = options.epochs;
    result.params = std::move(params);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::vector<FlowPrediction> predict(std::span<const CompiledGraph> graphs, const ParameterSet& params,
                                    const ModelConfig& config) {
  if (graphs.empty()) return {};
  return predict_merged(merge_graphs(pointers(graphs)), params, config);
}

MetricsReport evaluate(std::span<const CompiledGraph> graphs, const ParameterSet& params, const ModelConfig& config,
                       const LabelVocabulary& vocab) {
  std::vector<int32_t> truth;
  std::vector<int32_t> pred;
  for (const auto& p : predict(graphs, params, config)) {
    if (p.label == kUnlabeled) continue;
    truth.push_back(p.label);
    pred.push_back(p.predicted);
  }
  if (truth.empty()) throw EmptyDataError("no target flows");
  return compute_metrics(truth, pred, vocab_for(vocab, config.num_classes));
}

namespace {

struct FlowTable {
  Tensor features;
  std::vector<int32_t> labels;
};

FlowTable flow_table(std::span<const FlowRecord> flows, const FeatureCodec& codec) {
  FlowTable t;
  size_t n = 0;
  for (const auto& f : flows) n += f.label != kUnlabeled;
  t.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(codec.feature_dim()));
  Eigen::Index row = 0;
  for (const auto& f : flows) {
    if (f.label == kUnlabeled) continue;
    encode_flow_into(f, codec, std::span<double>(t.features.row(row).data(), codec.feature_dim()));
    t.labels.push_back(f.label);
    ++row;
  }
  return t;
}

ParameterSet init_mlp(const ModelConfig& config, Rng& rng) {
  ParameterSet params;
  size_t in = config.feature_dim;
  for (size_t i = 0; i < config.classifier_layers; ++i) {
    const size_t out = i + 1 == config.classifier_layers ? config.num_classes : config.classifier_hidden;
    params["mlp." + std::to_string(i) + ".W"] = glorot_uniform(in, out, rng);
    params["mlp." + std::to_string(i) + ".b"] = Tensor::Zero(1, static_cast<Eigen::Index>(out));
    in = out;
  }
  return params;
}

std::vector<int32_t> mlp_predict(const Tensor& x, const ParameterSet& params, const ModelConfig& config) {
  Tape tape;
  BoundParameters p(tape, params, false);
  const Tensor& logits = tape.value(tape_mlp(tape, tape.constant(x), p, "mlp", config.classifier_layers,
                                             config.leaky_slope));
  std::vector<int32_t> out(static_cast<size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<size_t>(i)] = argmax_row(logits, i);
  return out;
}

}  // namespace

BaselineResult mlp_baseline(const PreparedDataset& data, const ModelConfig& config, const TrainConfig& options) {
  const auto started = std::chrono::steady_clock::now();
  const FlowTable train_rows = flow_table(data.split.train(), data.codec);
  const FlowTable val_rows = flow_table(data.split.val(), data.codec);
  const FlowTable test_rows = flow_table(data.split.test(), data.codec);
  if (train_rows.labels.empty()) throw EmptyDataError("no labeled flows to train on");
  if (test_rows.labels.empty()) throw EmptyDataError("no target flows");
  const std::vector<double> weights =
      options.weighted_loss ? inverse_frequency_weights(train_rows.labels, config.num_classes) : std::vector<double>{};

  Rng rng(options.seed);
  Rng init_rng = rng.split();
  ParameterSet params = init_mlp(config, init_rng);
  AdamState adam(AdamConfig{.learning_rate = options.learning_rate});
  std::vector<uint32_t> order(train_rows.labels.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  constexpr size_t kRowsPerStep = 256;

  BaselineResult result;
  double best = -1.0;
  for (size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    EpochLog log;
    log.epoch = epoch;
    double loss_sum = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += kRowsPerStep) {
      std::vector<uint32_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), begin + kRowsPerStep)));
      std::vector<int32_t> labels;
      for (uint32_t r : rows) labels.push_back(train_rows.labels[r]);
      Tape tape;
      BoundParameters p(tape, params, true);
      Var x = tape.gather_rows(tape.constant(train_rows.features), rows);
      Var logits = tape_mlp(tape, x, p, "mlp", config.classifier_layers, config.leaky_slope);
      Var loss = tape.cross_entropy(logits, labels, weights);
      tape.backward(loss);
      adam_step(params, p.gradients(tape), adam);
      loss_sum += tape.value(loss)(0, 0) * static_cast<double>(rows.size());
    }
    log.train_loss = loss_sum / static_cast<double>(order.size());
    if (options.select_on_validation && !val_rows.labels.empty()) {
      log.val_macro_f1 = macro_f1(val_rows.labels, mlp_predict(val_rows.features, params, config), config.num_classes);
      if (log.val_macro_f1 > best) {
        best = log.val_macro_f1;
        result.training.best_epoch = epoch;
        result.training.params = params;
      }
    }
    result.training.log.push_back(log);
  }
  if (result.training.best_epoch == 0) {
    result.training.best_epoch = options.epochs;
    result.training.params = params;
  }
  result.training.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.report = compute_metrics(test_rows.labels, mlp_predict(test_rows.features, result.training.params, config),
                                  vocab_for(data.vocab, config.num_classes));
  result.report.training_seconds = result.training.seconds;
  return result;
}

}  // namespace pptgnn
