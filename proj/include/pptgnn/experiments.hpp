#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pptgnn/metrics.hpp"
#include "pptgnn/pretrain.hpp"
#include "pptgnn/trainer.hpp"

namespace pptgnn {

struct AblationRow {
  std::string variant;  // spatial_only, temporal, temporal+pretrain
  MetricsReport report;
  double train_seconds = 0.0;
  double pretrain_seconds = 0.0;
  std::vector<int64_t> test_windows;
};

/// Three variants on identical splits and seeds: temporal edges removed,
/// temporal edges kept, and temporal edges plus in-context pre-training on
/// the label-stripped training graphs.
std::vector<AblationRow> ablation_suite(const PreparedDataset& data, const ModelConfig& config,
                                        const TrainConfig& train_config, const PretrainConfig& pretrain_config);

/// Windows ranked greedily so that every prefix keeps the class mix of the
/// full set as closely as possible (L1 distance of class proportions).
/// Ties go to a seeded random order. Windows without labeled flows come last.
std::vector<size_t> rank_windows(std::span<const CompiledGraph> graphs, size_t num_classes, uint64_t seed);

inline constexpr double kBalanceTolerance = 0.02;

struct WindowSelection {
  std::vector<size_t> windows;  // indices into the graph list, ascending
  std::vector<size_t> forced;   // added only to keep a class present
  std::vector<double> full_proportions;
  std::vector<double> selected_proportions;
  double max_deviation = 0.0;
  bool balance_violation = false;  // a class had to be forced in, or deviation > tolerance
  size_t selected_flows = 0;
  size_t total_flows = 0;
};

/// Shortest ranked prefix holding at least `fraction` of the labeled flows,
/// plus the best-ranked window of any class the prefix misses. Selections
/// grow monotonically with the fraction for a fixed seed.
WindowSelection undersample_windows(std::span<const CompiledGraph> graphs, size_t num_classes, double fraction,
                                    uint64_t seed);

struct FewShotPlan {
  std::vector<double> fractions = {0.05, 0.1, 0.2, 0.5};
  std::vector<std::string> modes = {"none", "in-context", "out-of-context"};
  double reference_score = NAN;  // computed by a full scratch run when NaN
};

struct FewShotRow {
  double fraction = 0.0;
  std::string mode;
  size_t epochs = 0;
  size_t windows = 0;
  size_t flows = 0;
  double macro_f1 = 0.0;
  double percent_loss = 0.0;
  double seconds = 0.0;
  bool balance_violation = false;
  double max_deviation = 0.0;
  MetricsReport report;
};

struct FewShotResult {
  double reference_score = 0.0;
  double reference_seconds = 0.0;
  std::vector<FewShotRow> rows;  // fraction-major, plan order
};

/// For each fraction and mode: undersample the training windows, start from
/// a fresh model ("none") or from bases.at(mode) via transfer_weights, and
/// train with `finetune`. The reference run trains from scratch on all
/// training windows with `reference`.
FewShotResult fewshot(const FewShotPlan& plan, const PreparedDataset& data,
                      const std::map<std::string, ParameterSet>& bases, const ModelConfig& config,
                      const TrainConfig& finetune, const TrainConfig& reference);

}  // namespace pptgnn
