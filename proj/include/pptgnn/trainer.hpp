#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pptgnn/flow_ingest.hpp"
#include "pptgnn/metrics.hpp"
#include "pptgnn/model.hpp"
#include "pptgnn/window_builder.hpp"

namespace pptgnn {

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

/// Three contiguous time segments. Boundaries are the start-time quantiles
/// of the ratios, moved down to the edge of the window that holds them, so a
/// window belongs to exactly one split. A flow goes to the split of its start.
struct FlowSplit {
  std::array<std::vector<FlowRecord>, 3> parts;  // train, val, test
  std::array<WindowRange, 3> ranges;
  std::vector<std::string> warnings;  // e.g. a split that received no flows

  const std::vector<FlowRecord>& train() const { return parts[0]; }
  const std::vector<FlowRecord>& val() const { return parts[1]; }
  const std::vector<FlowRecord>& test() const { return parts[2]; }
};

FlowSplit chronological_split(std::span<const FlowRecord> flows, double window_size, const SplitRatios& ratios = {});

/// Graphs of one split: one TemporalGraph per non-empty window, compiled
/// for a given model shape.
struct SplitGraphs {
  std::vector<SnapshotPtr> snapshots;
  std::vector<TemporalGraph> graphs;
  std::vector<CompiledGraph> compiled;
};

SplitGraphs build_split_graphs(std::span<const FlowRecord> flows, const WindowRange& range,
                               const GraphBuildConfig& graph_config, const FeatureCodec& codec,
                               const ModelConfig& model_config, bool keep_labels = true);

// Recompiles every graph with intra- and inter-window temporal edges removed.
SplitGraphs spatial_only(const SplitGraphs& split, const ModelConfig& model_config);

struct PreparedDataset {
  LabelVocabulary vocab;
  FeatureCodec codec;  // fitted on the training split only
  GraphBuildConfig graph_config;
  FlowSplit split;
  SplitGraphs train, val, test;
};

/// Splits, fits the codec on the training part and builds graphs for all
/// three parts. `model_config.feature_dim` and `num_classes` are filled in.
PreparedDataset prepare_dataset(std::span<const FlowRecord> flows, const LabelVocabulary& vocab,
                                const GraphBuildConfig& graph_config, ModelConfig& model_config,
                                const SplitRatios& ratios = {}, const CodecOptions& codec_options = {});

struct TrainConfig {
  size_t epochs = 200;
  double learning_rate = 0.001;
  bool weighted_loss = true;
  uint64_t seed = 0;
  size_t batch_size = 8;  // graphs per optimizer step, 0 = all
  // Keep the epoch with the best validation macro F1 (last epoch when there
  // is no validation data).
  bool select_on_validation = true;
};

struct EpochLog {
  size_t epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = NAN;
};

struct TrainResult {
  ParameterSet params;
  std::vector<EpochLog> log;
  size_t best_epoch = 0;
  double seconds = 0.0;
};

// Labeled target flows across the graphs, per class.
std::vector<size_t> class_counts(std::span<const CompiledGraph> graphs, size_t num_classes);

/// Mini-batch Adam on class-weighted cross-entropy. Throws EmptyDataError when
/// the training graphs hold no labeled target flow.
TrainResult train(std::span<const CompiledGraph> train_graphs, std::span<const CompiledGraph> val_graphs,
                  ParameterSet params, const ModelConfig& config, const TrainConfig& options);

struct FlowPrediction {
  uint64_t flow_id = 0;
  int64_t window_index = 0;
  int32_t label = kUnlabeled;
  int32_t predicted = 0;
};

/// One prediction per flow: a flow seen in several target windows keeps the
/// prediction from its last window. Sorted by flow_id.
std::vector<FlowPrediction> predict(std::span<const CompiledGraph> graphs, const ParameterSet& params,
                                    const ModelConfig& config);

// Metrics over labeled flows; throws EmptyDataError if there are none.
MetricsReport evaluate(std::span<const CompiledGraph> graphs, const ParameterSet& params, const ModelConfig& config,
                       const LabelVocabulary& vocab);

struct BaselineResult {
  MetricsReport report;
  TrainResult training;
};

/// Multi-layer perceptron on encoded flow features only (no graph), with the
/// same classifier shape, loss and model selection as the GNN.
BaselineResult mlp_baseline(const PreparedDataset& data, const ModelConfig& config, const TrainConfig& options);

}  // namespace pptgnn
