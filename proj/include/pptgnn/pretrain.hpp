#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "pptgnn/kv_config.hpp"
#include "pptgnn/model.hpp"
#include "pptgnn/tensor.hpp"

namespace pptgnn {

using EdgeList = std::vector<std::pair<uint32_t, uint32_t>>;

/// Positive edges of a compiled graph plus corrupted negatives, per edge type.
struct LinkPredTask {
  double negative_ratio = 1.0;
  std::array<EdgeList, kEdgeTypeCount> positives;
  std::array<EdgeList, kEdgeTypeCount> negatives;
  std::array<size_t, kEdgeTypeCount> shortfall{};  // requested minus produced

  size_t num_positives() const;
  size_t num_negatives() const;
  size_t total_shortfall() const;
};

inline constexpr size_t kMaxNegativeAttempts = 100;

/// Endpoint corruption: each negative keeps one endpoint of a randomly drawn
/// positive and redraws the other among nodes of the right kind in the same
/// window (intra-window flow types also keep the earlier-to-later order).
/// Candidates that are positives or already drawn are rejected.
LinkPredTask sample_negatives(const CompiledGraph& graph, double ratio, Rng& rng);
LinkPredTask sample_negatives(const TemporalGraph& graph, double ratio, Rng& rng);

std::string scorer_prefix(EdgeType type);
ParameterSet init_scorers(const ModelConfig& config, Rng& rng);

struct LinkEvaluation {
  Evaluation objective;
  size_t correct = 0;
  size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

// Binary cross-entropy over every positive and negative edge of the task.
LinkEvaluation link_prediction_objective(const CompiledGraph& graph, const LinkPredTask& task,
                                         const ParameterSet& params, const ModelConfig& config, bool want_grads);

struct PretrainConfig {
  size_t epochs = 20;
  double learning_rate = 1e-4;
  double negative_ratio = 1.0;
  size_t batch_size = 1;  // graphs per optimizer step, 0 = all
  uint64_t seed = 0;
};

struct PretrainEpoch {
  size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  size_t negatives = 0;
  size_t shortfall = 0;
};

struct PretrainResult {
  ParameterSet params;  // trunk, scorers and an unused classifier head
  std::vector<PretrainEpoch> log;
  double seconds = 0.0;
};

/// Link-prediction pre-training. Graphs must be compiled without labels;
/// negatives are redrawn every epoch. Throws EmptyDataError on an empty corpus.
PretrainResult pretrain(std::span<const CompiledGraph> graphs, const ModelConfig& config,
                        const PretrainConfig& options);

/// Copies encoder and layer tensors into a fresh parameter set for `target`
/// and draws a new classifier head. Throws CompatibilityError listing every
/// trunk tensor whose shape differs or that is missing.
ParameterSet transfer_weights(const ParameterSet& pretrained, const ModelConfig& target, Rng& rng);

enum class PretrainMode { InContext, OutOfContext };
std::string_view pretrain_mode_name(PretrainMode mode);
PretrainMode parse_pretrain_mode(std::string_view name);

struct CorpusEntry {
  std::string id;
  std::string path;
  bool operator==(const CorpusEntry&) const = default;
};

/// Datasets feeding pre-training. Manifest text:
///   mode = out-of-context
///   target = ton_iot
///   dataset.unsw = data/unsw.pptf
struct PretrainCorpus {
  PretrainMode mode = PretrainMode::InContext;
  std::string target;
  std::vector<CorpusEntry> datasets;

  // Datasets that actually enter pre-training: the target is dropped in
  // out-of-context mode.
  std::vector<CorpusEntry> effective() const;
  KeyValueConfig to_kv() const;
  static PretrainCorpus from_kv(const KeyValueConfig& kv);
};

}  // namespace pptgnn
