#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pptgnn/autodiff.hpp"
#include "pptgnn/kv_config.hpp"
#include "pptgnn/tensor.hpp"
#include "pptgnn/window_builder.hpp"

namespace pptgnn {

enum class NodeKind : uint8_t { Flow, Ip };

// The four spatial types come first, then the four temporal ones.
enum class EdgeType : uint8_t {
  FlowToSrcIp,
  SrcIpToFlow,
  FlowToDstIp,
  DstIpToFlow,
  SameSrcFlow,
  SameDstFlow,
  IpRecurrence,
  FlowRecurrence,
};
inline constexpr size_t kEdgeTypeCount = 8;
inline constexpr std::array<EdgeType, 4> kSpatialTypes = {EdgeType::FlowToSrcIp, EdgeType::SrcIpToFlow,
                                                          EdgeType::FlowToDstIp, EdgeType::DstIpToFlow};
inline constexpr std::array<EdgeType, 4> kTemporalTypes = {EdgeType::SameSrcFlow, EdgeType::SameDstFlow,
                                                           EdgeType::IpRecurrence, EdgeType::FlowRecurrence};
inline constexpr std::array<EdgeType, kEdgeTypeCount> kAllEdgeTypes = {
    EdgeType::FlowToSrcIp, EdgeType::SrcIpToFlow, EdgeType::FlowToDstIp,  EdgeType::DstIpToFlow,
    EdgeType::SameSrcFlow, EdgeType::SameDstFlow, EdgeType::IpRecurrence, EdgeType::FlowRecurrence};

std::string_view edge_type_name(EdgeType type);
NodeKind source_kind(EdgeType type);
NodeKind target_kind(EdgeType type);
bool is_temporal(EdgeType type);
inline size_t index_of(EdgeType type) { return static_cast<size_t>(type); }

enum class StepKind : uint8_t { Temporal, Spatial };

std::string_view aggregation_name(Aggregation a);
Aggregation parse_aggregation(std::string_view name);

struct ModelConfig {
  size_t num_layers = 2;
  size_t hidden_size = 128;
  size_t classifier_layers = 2;
  size_t classifier_hidden = 128;
  Aggregation neighbor_aggregation = Aggregation::Mean;  // within one edge type
  Aggregation edge_type_aggregation = Aggregation::Sum;  // across edge types; Sum or Mean
  double leaky_slope = kLeakySlope;
  // Hand-calculation tests only: replaces the step non-linearity with identity.
  bool identity_activation = false;
  size_t num_classes = 2;
  size_t feature_dim = 0;
  size_t flow_encoding_dim = 30;
  size_t window_encoding_dim = 16;

  void validate() const;  // throws ConfigError
  KeyValueConfig to_kv() const;
  static ModelConfig from_kv(const KeyValueConfig& kv);
  bool operator==(const ModelConfig&) const = default;
};

/// A TemporalGraph flattened into per-kind node tables. Flow and IP nodes of
/// every snapshot are numbered consecutively (oldest window first); edges use
/// those global numbers. Several graphs can be merged into one disjoint batch.
struct CompiledGraph {
  Tensor flow_inputs;  // num_flows x (feature_dim + flow_encoding_dim)
  Tensor ip_inputs;    // num_ips x (1 + window_encoding_dim)
  std::array<std::vector<std::pair<uint32_t, uint32_t>>, kEdgeTypeCount> edges;  // (src, dst)
  std::array<std::shared_ptr<const Adjacency>, kEdgeTypeCount> adjacency;

  std::vector<uint64_t> flow_ids;
  std::vector<uint32_t> flow_window;  // window id, unique across merged graphs
  std::vector<uint32_t> flow_ordinal;
  std::vector<uint32_t> ip_window;
  std::vector<std::string> ip_keys;

  std::vector<uint32_t> target_flows;  // rows of the target-window flows
  std::vector<int32_t> target_labels;  // kUnlabeled when labels were stripped
  std::vector<int64_t> target_window_index;  // global window index of each target flow
  size_t num_windows = 0;

  size_t num_flows() const { return static_cast<size_t>(flow_inputs.rows()); }
  size_t num_ips() const { return static_cast<size_t>(ip_inputs.rows()); }
  size_t num_nodes(NodeKind kind) const { return kind == NodeKind::Flow ? num_flows() : num_ips(); }
  size_t num_edges() const;

  void build_adjacency();
};

CompiledGraph compile_graph(const TemporalGraph& graph, const ModelConfig& config, bool keep_labels = true);
CompiledGraph merge_graphs(std::span<const CompiledGraph* const> graphs);
// Relabels node storage: new row i holds old row perm[i]. Edges follow.
CompiledGraph permute_nodes(const CompiledGraph& graph, std::span<const uint32_t> flow_perm,
                            std::span<const uint32_t> ip_perm);

std::string step_param_name(size_t layer, StepKind step, EdgeType type, std::string_view matrix);
ParameterSet init_parameters(const ModelConfig& config, Rng& rng);
ParameterSet init_classifier(const ModelConfig& config, Rng& rng);
bool is_trunk_parameter(std::string_view name);

/// Hidden states of both node kinds.
struct NodeState {
  Tensor flow;
  Tensor ip;
};

struct LayerTrace {
  NodeState temporal;  // h^{k_temp}
  NodeState spatial;   // h^k
};

NodeState init_node_states(const CompiledGraph& graph, const ParameterSet& params, const ModelConfig& config);
// `layer` counts from 1, as in the parameter names.
NodeState temporal_step(const NodeState& states, const CompiledGraph& graph, size_t layer, const ParameterSet& params,
                        const ModelConfig& config);
NodeState spatial_step(const NodeState& states, const CompiledGraph& graph, size_t layer, const ParameterSet& params,
                       const ModelConfig& config);

struct FlowLogits {
  std::vector<uint64_t> flow_ids;
  std::vector<int64_t> window_index;
  Tensor logits;  // one row per target-window flow
};

FlowLogits forward(const CompiledGraph& graph, const ParameterSet& params, const ModelConfig& config,
                   std::vector<LayerTrace>* trace = nullptr);
FlowLogits forward(const TemporalGraph& graph, const ParameterSet& params, const ModelConfig& config);

// ---------------------------------------------------------------------------
// Tape-level building blocks shared by supervised training and pre-training.

class BoundParameters {
 public:
  BoundParameters(Tape& tape, const ParameterSet& params, bool requires_grad);
  Var operator[](const std::string& name) const;
  ParameterSet gradients(const Tape& tape) const;

 private:
  std::map<std::string, Var> vars_;
};

struct TapeStates {
  Var flow;
  Var ip;
};

TapeStates tape_encode(Tape& tape, const CompiledGraph& graph, const BoundParameters& params,
                       const ModelConfig& config);
TapeStates tape_step(Tape& tape, const CompiledGraph& graph, const TapeStates& states, size_t layer, StepKind step,
                     const BoundParameters& params, const ModelConfig& config);
TapeStates tape_trunk(Tape& tape, const CompiledGraph& graph, const BoundParameters& params, const ModelConfig& config,
                      std::vector<std::pair<TapeStates, TapeStates>>* per_layer = nullptr);
// Multi-layer perceptron over rows of `inputs`, parameters "{prefix}.{i}.W/b".
Var tape_mlp(Tape& tape, Var inputs, const BoundParameters& params, const std::string& prefix, size_t layers,
             double slope);

/// Cross-entropy over labeled target-window flows. Unlabeled targets are skipped.
Evaluation classification_objective(const CompiledGraph& graph, const ParameterSet& params, const ModelConfig& config,
                                    std::span<const double> class_weights, bool want_grads,
                                    bool track_branches = false);

}  // namespace pptgnn
