#include "pptgnn/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "pptgnn/errors.hpp"

namespace pptgnn {

std::string_view edge_type_name(EdgeType type) {
  switch (type) {
    case EdgeType::FlowToSrcIp: return "flow_to_src_ip";
    case EdgeType::SrcIpToFlow: return "src_ip_to_flow";
    case EdgeType::FlowToDstIp: return "flow_to_dst_ip";
    case EdgeType::DstIpToFlow: return "dst_ip_to_flow";
    case EdgeType::SameSrcFlow: return "same_src_flow";
    case EdgeType::SameDstFlow: return "same_dst_flow";
    case EdgeType::IpRecurrence: return "ip_recurrence";
    case EdgeType::FlowRecurrence: return "flow_recurrence";
  }
  return "unknown";
}

NodeKind source_kind(EdgeType type) {
  switch (type) {
    case EdgeType::SrcIpToFlow:
    case EdgeType::DstIpToFlow:
    case EdgeType::IpRecurrence: return NodeKind::Ip;
    default: return NodeKind::Flow;
  }
}

NodeKind target_kind(EdgeType type) {
  switch (type) {
    case EdgeType::FlowToSrcIp:
    case EdgeType::FlowToDstIp:
    case EdgeType::IpRecurrence: return NodeKind::Ip;
    default: return NodeKind::Flow;
  }
}

bool is_temporal(EdgeType type) { return index_of(type) >= 4; }

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::Sum: return "sum";
    case Aggregation::Mean: return "mean";
    case Aggregation::Max: return "max";
  }
  return "unknown";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "sum") return Aggregation::Sum;
  if (name == "mean") return Aggregation::Mean;
  if (name == "max") return Aggregation::Max;
  throw ConfigError("unknown aggregation '" + std::string(name) + "' (expected sum, mean or max)");
}

void ModelConfig::validate() const {
  if (num_layers < 1) throw ConfigError("model.num_layers must be >= 1");
  if (hidden_size < 1 || classifier_hidden < 1) throw ConfigError("model hidden sizes must be positive");
  if (classifier_layers < 1) throw ConfigError("model.classifier_layers must be >= 1");
  if (num_classes < 2) throw ConfigError("model.num_classes must be >= 2");
  if (feature_dim < 1) throw ConfigError("model.feature_dim must be positive");
  if (edge_type_aggregation == Aggregation::Max) throw ConfigError("edge_type_aggregation must be sum or mean");
  if (flow_encoding_dim == 0 || flow_encoding_dim % 2 || window_encoding_dim == 0 || window_encoding_dim % 2) {
    throw ConfigError("encoding dims must be even and positive");
  }
}

KeyValueConfig ModelConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("num_layers", static_cast<int64_t>(num_layers));
  kv.set("hidden_size", static_cast<int64_t>(hidden_size));
  kv.set("classifier_layers", static_cast<int64_t>(classifier_layers));
  kv.set("classifier_hidden", static_cast<int64_t>(classifier_hidden));
  kv.set("neighbor_aggregation", std::string(aggregation_name(neighbor_aggregation)));
  kv.set("edge_type_aggregation", std::string(aggregation_name(edge_type_aggregation)));
  kv.set("leaky_slope", leaky_slope);
  kv.set("identity_activation", identity_activation);
  kv.set("num_classes", static_cast<int64_t>(num_classes));
  kv.set("feature_dim", static_cast<int64_t>(feature_dim));
  kv.set("flow_encoding_dim", static_cast<int64_t>(flow_encoding_dim));
  kv.set("window_encoding_dim", static_cast<int64_t>(window_encoding_dim));
  return kv;
}

ModelConfig ModelConfig::from_kv(const KeyValueConfig& kv) {
  ModelConfig c;
  auto size = [&](const char* key, size_t& out) {
    if (kv.contains(key)) out = static_cast<size_t>(kv.get_int(key));
  };
  size("num_layers", c.num_layers);
  size("hidden_size", c.hidden_size);
  size("classifier_layers", c.classifier_layers);
  size("classifier_hidden", c.classifier_hidden);
  size("num_classes", c.num_classes);
  size("feature_dim", c.feature_dim);
  size("flow_encoding_dim", c.flow_encoding_dim);
  size("window_encoding_dim", c.window_encoding_dim);
  if (auto v = kv.get("neighbor_aggregation")) c.neighbor_aggregation = parse_aggregation(*v);
  if (auto v = kv.get("edge_type_aggregation")) c.edge_type_aggregation = parse_aggregation(*v);
  if (kv.contains("leaky_slope")) c.leaky_slope = kv.get_double("leaky_slope");
  if (kv.contains("identity_activation")) c.identity_activation = kv.get_bool("identity_activation");
  return c;
}

// ---------------------------------------------------------------------------
// Graph compilation

size_t CompiledGraph::num_edges() const {
  size_t n = 0;
  for (const auto& list : edges) n += list.size();
  return n;
}

void CompiledGraph::build_adjacency() {
  for (EdgeType type : kAllEdgeTypes) {
    const size_t t = index_of(type);
    adjacency[t] = std::make_shared<const Adjacency>(Adjacency::from_edges(edges[t], num_nodes(target_kind(type))));
  }
}

CompiledGraph compile_graph(const TemporalGraph& graph, const ModelConfig& config, bool keep_labels) {
  CompiledGraph g;
  const size_t windows = graph.snapshots.size();
  std::vector<uint32_t> flow_offset(windows + 1, 0);
  std::vector<uint32_t> ip_offset(windows + 1, 0);
  for (size_t w = 0; w < windows; ++w) {
    flow_offset[w + 1] = flow_offset[w] + static_cast<uint32_t>(graph.snapshots[w]->flow_nodes.size());
    ip_offset[w + 1] = ip_offset[w] + static_cast<uint32_t>(graph.snapshots[w]->ip_nodes.size());
  }
  const size_t flow_in = config.feature_dim + config.flow_encoding_dim;
  const size_t ip_in = 1 + config.window_encoding_dim;
  g.flow_inputs = Tensor::Zero(flow_offset[windows], static_cast<Eigen::Index>(flow_in));
  g.ip_inputs = Tensor::Zero(ip_offset[windows], static_cast<Eigen::Index>(ip_in));
  g.num_windows = windows;

  for (size_t w = 0; w < windows; ++w) {
    const WindowSnapshot& snap = *graph.snapshots[w];
    const size_t period = std::max<size_t>(1, snap.flow_nodes.size());
    for (size_t i = 0; i < snap.flow_nodes.size(); ++i) {
      const FlowNode& node = snap.flow_nodes[i];
      if (node.features.size() != config.feature_dim) {
        throw CompatibilityError("flow features have dim " + std::to_string(node.features.size()) +
                                 " but the model expects feature_dim " + std::to_string(config.feature_dim));
      }
      const auto row = static_cast<Eigen::Index>(flow_offset[w] + i);
      for (size_t k = 0; k < node.features.size(); ++k) g.flow_inputs(row, static_cast<Eigen::Index>(k)) = node.features[k];
      auto enc = cyclical_encode(node.ordinal, period, config.flow_encoding_dim);
      for (size_t k = 0; k < enc.size(); ++k) {
        g.flow_inputs(row, static_cast<Eigen::Index>(config.feature_dim + k)) = enc[k];
      }
      g.flow_ids.push_back(node.flow_id);
      g.flow_window.push_back(static_cast<uint32_t>(w));
      g.flow_ordinal.push_back(node.ordinal);
    }
    auto enc = cyclical_encode(graph.memory_position(w), graph.window_memory, config.window_encoding_dim);
    for (size_t i = 0; i < snap.ip_nodes.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(ip_offset[w] + i);
      g.ip_inputs(row, 0) = 1.0;
      for (size_t k = 0; k < enc.size(); ++k) g.ip_inputs(row, static_cast<Eigen::Index>(1 + k)) = enc[k];
      g.ip_window.push_back(static_cast<uint32_t>(w));
      g.ip_keys.push_back(snap.ip_nodes[i]);
    }

    auto add = [&](EdgeType type, const std::vector<IndexEdge>& list, uint32_t src_off, uint32_t dst_off) {
      for (const auto& e : list) g.edges[index_of(type)].push_back({src_off + e.src, dst_off + e.dst});
    };
    add(EdgeType::FlowToSrcIp, snap.spatial(SpatialEdge::FlowToSrcIp), flow_offset[w], ip_offset[w]);
    add(EdgeType::SrcIpToFlow, snap.spatial(SpatialEdge::SrcIpToFlow), ip_offset[w], flow_offset[w]);
    add(EdgeType::FlowToDstIp, snap.spatial(SpatialEdge::FlowToDstIp), flow_offset[w], ip_offset[w]);
    add(EdgeType::DstIpToFlow, snap.spatial(SpatialEdge::DstIpToFlow), ip_offset[w], flow_offset[w]);
    add(EdgeType::SameSrcFlow, snap.intra(IntraTemporalEdge::SameSource), flow_offset[w], flow_offset[w]);
    add(EdgeType::SameDstFlow, snap.intra(IntraTemporalEdge::SameDestination), flow_offset[w], flow_offset[w]);
  }
  for (const auto& e : graph.inter_ip_edges) {
    g.edges[index_of(EdgeType::IpRecurrence)].push_back(
        {ip_offset[e.src_window] + e.src_node, ip_offset[e.dst_window] + e.dst_node});
  }
  for (const auto& e : graph.inter_flow_edges) {
    g.edges[index_of(EdgeType::FlowRecurrence)].push_back(
        {flow_offset[e.src_window] + e.src_node, flow_offset[e.dst_window] + e.dst_node});
  }
  if (windows > 0) {
    const size_t t = windows - 1;
    const WindowSnapshot& target = *graph.snapshots[t];
    for (size_t i = 0; i < target.flow_nodes.size(); ++i) {
      g.target_flows.push_back(flow_offset[t] + static_cast<uint32_t>(i));
      g.target_labels.push_back(keep_labels ? target.flow_nodes[i].label : kUnlabeled);
      g.target_window_index.push_back(target.window_index);
    }
  }
  g.build_adjacency();
  return g;
}

CompiledGraph merge_graphs(std::span<const CompiledGraph* const> graphs) {
  CompiledGraph out;
  if (graphs.empty()) return out;
  Eigen::Index flows = 0;
  Eigen::Index ips = 0;
  for (const auto* g : graphs) {
    flows += g->flow_inputs.rows();
    ips += g->ip_inputs.rows();
  }
  out.flow_inputs.resize(flows, graphs.front()->flow_inputs.cols());
  out.ip_inputs.resize(ips, graphs.front()->ip_inputs.cols());
  uint32_t flow_off = 0;
  uint32_t ip_off = 0;
  uint32_t window_off = 0;
  for (const auto* g : graphs) {
    if (g->flow_inputs.cols() != out.flow_inputs.cols() || g->ip_inputs.cols() != out.ip_inputs.cols()) {
      throw CompatibilityError("merge_graphs: graphs were compiled with different input dims");
    }
    out.flow_inputs.middleRows(flow_off, g->flow_inputs.rows()) = g->flow_inputs;
    out.ip_inputs.middleRows(ip_off, g->ip_inputs.rows()) = g->ip_inputs;
    for (EdgeType type : kAllEdgeTypes) {
      const size_t t = index_of(type);
      const uint32_t so = source_kind(type) == NodeKind::Flow ? flow_off : ip_off;
      const uint32_t d_o = target_kind(type) == NodeKind::Flow ? flow_off : ip_off;
      for (const auto& [s, d] : g->edges[t]) out.edges[t].push_back({s + so, d + d_o});
    }
    out.flow_ids.insert(out.flow_ids.end(), g->flow_ids.begin(), g->flow_ids.end());
    for (uint32_t w : g->flow_window) out.flow_window.push_back(w + window_off);
    out.flow_ordinal.insert(out.flow_ordinal.end(), g->flow_ordinal.begin(), g->flow_ordinal.end());
    for (uint32_t w : g->ip_window) out.ip_window.push_back(w + window_off);
    out.ip_keys.insert(out.ip_keys.end(), g->ip_keys.begin(), g->ip_keys.end());
    for (uint32_t f : g->target_flows) out.target_flows.push_back(f + flow_off);
    out.target_labels.insert(out.target_labels.end(), g->target_labels.begin(), g->target_labels.end());
    out.target_window_index.insert(out.target_window_index.end(), g->target_window_index.begin(),
                                   g->target_window_index.end());
    flow_off += static_cast<uint32_t>(g->flow_inputs.rows());
    ip_off += static_cast<uint32_t>(g->ip_inputs.rows());
    window_off += static_cast<uint32_t>(g->num_windows);
  }
  out.num_windows = window_off;
  out.build_adjacency();
  return out;
}

CompiledGraph permute_nodes(const CompiledGraph& g, std::span<const uint32_t> flow_perm,
                            std::span<const uint32_t> ip_perm) {
  if (flow_perm.size() != g.num_flows() || ip_perm.size() != g.num_ips()) {
    throw std::invalid_argument("permute_nodes: permutation size mismatch");
  }
  std::vector<uint32_t> flow_new(flow_perm.size());
  std::vector<uint32_t> ip_new(ip_perm.size());
  for (uint32_t i = 0; i < flow_perm.size(); ++i) flow_new[flow_perm[i]] = i;
  for (uint32_t i = 0; i < ip_perm.size(); ++i) ip_new[ip_perm[i]] = i;

  CompiledGraph out;
  out.num_windows = g.num_windows;
  out.flow_inputs.resize(g.flow_inputs.rows(), g.flow_inputs.cols());
  out.ip_inputs.resize(g.ip_inputs.rows(), g.ip_inputs.cols());
  for (uint32_t i = 0; i < flow_perm.size(); ++i) {
    out.flow_inputs.row(i) = g.flow_inputs.row(flow_perm[i]);
    out.flow_ids.push_back(g.flow_ids[flow_perm[i]]);
    out.flow_window.push_back(g.flow_window[flow_perm[i]]);
    out.flow_ordinal.push_back(g.flow_ordinal[flow_perm[i]]);
  }
  for (uint32_t i = 0; i < ip_perm.size(); ++i) {
    out.ip_inputs.row(i) = g.ip_inputs.row(ip_perm[i]);
    out.ip_window.push_back(g.ip_window[ip_perm[i]]);
    out.ip_keys.push_back(g.ip_keys[ip_perm[i]]);
  }
  for (EdgeType type : kAllEdgeTypes) {
    const size_t t = index_of(type);
    const auto& smap = source_kind(type) == NodeKind::Flow ? flow_new : ip_new;
    const auto& dmap = target_kind(type) == NodeKind::Flow ? flow_new : ip_new;
    for (const auto& [s, d] : g.edges[t]) out.edges[t].push_back({smap[s], dmap[d]});
  }
  for (uint32_t f : g.target_flows) out.target_flows.push_back(flow_new[f]);
  out.target_labels = g.target_labels;
  out.target_window_index = g.target_window_index;
  out.build_adjacency();
  return out;
}

// ---------------------------------------------------------------------------
// Parameters

std::string step_param_name(size_t layer, StepKind step, EdgeType type, std::string_view matrix) {
  return "layer" + std::to_string(layer) + (step == StepKind::Temporal ? ".temporal." : ".spatial.") +
         std::string(edge_type_name(type)) + "." + std::string(matrix);
}

namespace {

const std::array<EdgeType, 4>& step_types(StepKind step) {
  return step == StepKind::Temporal ? kTemporalTypes : kSpatialTypes;
}

}  // namespace

ParameterSet init_classifier(const ModelConfig& config, Rng& rng) {
  ParameterSet params;
  size_t in = config.hidden_size;
  for (size_t i = 0; i < config.classifier_layers; ++i) {
    const bool last = i + 1 == config.classifier_layers;
    const size_t out = last ? config.num_classes : config.classifier_hidden;
    const std::string prefix = "classifier." + std::to_string(i);
    params[prefix + ".W"] = glorot_uniform(in, out, rng);
    params[prefix + ".b"] = Tensor::Zero(1, static_cast<Eigen::Index>(out));
    in = out;
  }
  return params;
}

ParameterSet init_parameters(const ModelConfig& config, Rng& rng) {
  config.validate();
  ParameterSet params;
  const size_t h = config.hidden_size;
  params["encoder.flow.W"] = glorot_uniform(config.feature_dim + config.flow_encoding_dim, h, rng);
  params["encoder.flow.b"] = Tensor::Zero(1, static_cast<Eigen::Index>(h));
  params["encoder.ip.W"] = glorot_uniform(1 + config.window_encoding_dim, h, rng);
  params["encoder.ip.b"] = Tensor::Zero(1, static_cast<Eigen::Index>(h));
  for (size_t layer = 1; layer <= config.num_layers; ++layer) {
    for (StepKind step : {StepKind::Temporal, StepKind::Spatial}) {
      for (EdgeType type : step_types(step)) {
        params[step_param_name(layer, step, type, "W1")] = glorot_uniform(h, h, rng);
        params[step_param_name(layer, step, type, "W2")] = glorot_uniform(h, h, rng);
      }
    }
  }
  params.merge(init_classifier(config, rng));
  return params;
}

bool is_trunk_parameter(std::string_view name) {
  return name.starts_with("encoder.") || name.starts_with("layer");
}

BoundParameters::BoundParameters(Tape& tape, const ParameterSet& params, bool requires_grad) {
  for (const auto& [name, value] : params) {
    vars_.emplace(name, requires_grad ? tape.parameter(value) : tape.constant(value));
  }
}

Var BoundParameters::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw CompatibilityError("missing parameter '" + name + "'");
  return it->second;
}

ParameterSet BoundParameters::gradients(const Tape& tape) const {
  ParameterSet grads;
  for (const auto& [name, var] : vars_) {
    if (tape.requires_grad(var)) grads.emplace(name, tape.grad(var));
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Forward pass

TapeStates tape_encode(Tape& tape, const CompiledGraph& graph, const BoundParameters& p, const ModelConfig& config) {
  if (static_cast<size_t>(graph.flow_inputs.cols()) != config.feature_dim + config.flow_encoding_dim) {
    throw CompatibilityError("flow inputs have " + std::to_string(graph.flow_inputs.cols()) +
                             " columns but the encoder expects " +
                             std::to_string(config.feature_dim + config.flow_encoding_dim));
  }
  Var flow_in = tape.constant(graph.flow_inputs);
  Var ip_in = tape.constant(graph.ip_inputs);
  Var flow = tape.leaky_relu(tape.add_row(tape.matmul(flow_in, p["encoder.flow.W"]), p["encoder.flow.b"]),
                             config.leaky_slope);
  Var ip = tape.leaky_relu(tape.add_row(tape.matmul(ip_in, p["encoder.ip.W"]), p["encoder.ip.b"]),
                           config.leaky_slope);
  return {flow, ip};
}

TapeStates tape_step(Tape& tape, const CompiledGraph& graph, const TapeStates& states, size_t layer, StepKind step,
                     const BoundParameters& p, const ModelConfig& config) {
  TapeStates out = states;
  for (NodeKind kind : {NodeKind::Flow, NodeKind::Ip}) {
    const Var self = kind == NodeKind::Flow ? states.flow : states.ip;
    const size_t n = graph.num_nodes(kind);
    std::vector<double> type_count(n, 0.0);
    Var pre;
    for (EdgeType type : step_types(step)) {
      if (target_kind(type) != kind) continue;
      const auto& adj = graph.adjacency[index_of(type)];
      if (!adj || adj->sources.empty()) continue;
      std::vector<double> has(n, 0.0);
      for (size_t v = 0; v < n; ++v) {
        if (adj->degree(v) > 0) {
          has[v] = 1.0;
          type_count[v] += 1.0;
        }
      }
      const Var src = source_kind(type) == NodeKind::Flow ? states.flow : states.ip;
      Var self_term = tape.matmul(tape.scale_rows(self, std::move(has)), p[step_param_name(layer, step, type, "W1")]);
      Var neighbor_term = tape.matmul(tape.aggregate(src, adj, config.neighbor_aggregation),
                                      p[step_param_name(layer, step, type, "W2")]);
      Var term = tape.add(self_term, neighbor_term);
      pre = pre.valid() ? tape.add(pre, term) : term;
    }
    if (!pre.valid()) continue;  // no incoming edges of this step: pass-through
    if (config.edge_type_aggregation == Aggregation::Mean) {
      std::vector<double> inv(n);
      for (size_t v = 0; v < n; ++v) inv[v] = type_count[v] > 0 ? 1.0 / type_count[v] : 1.0;
      pre = tape.scale_rows(pre, std::move(inv));
    }
    Var activated = config.identity_activation ? pre : tape.leaky_relu(pre, config.leaky_slope);
    std::vector<uint8_t> touched(n);
    for (size_t v = 0; v < n; ++v) touched[v] = type_count[v] > 0;
    Var updated = tape.select_rows(std::move(touched), activated, self);
    (kind == NodeKind::Flow ? out.flow : out.ip) = updated;
  }
  return out;
}

TapeStates tape_trunk(Tape& tape, const CompiledGraph& graph, const BoundParameters& p, const ModelConfig& config,
                      std::vector<std::pair<TapeStates, TapeStates>>* per_layer) {
  TapeStates h = tape_encode(tape, graph, p, config);
  for (size_t layer = 1; layer <= config.num_layers; ++layer) {
    TapeStates temporal = tape_step(tape, graph, h, layer, StepKind::Temporal, p, config);
    h = tape_step(tape, graph, temporal, layer, StepKind::Spatial, p, config);
    if (per_layer) per_layer->push_back({temporal, h});
  }
  return h;
}

Var tape_mlp(Tape& tape, Var inputs, const BoundParameters& p, const std::string& prefix, size_t layers,
             double slope) {
  Var x = inputs;
  for (size_t i = 0; i < layers; ++i) {
    const std::string name = prefix + "." + std::to_string(i);
    x = tape.add_row(tape.matmul(x, p[name + ".W"]), p[name + ".b"]);
    if (i + 1 < layers) x = tape.leaky_relu(x, slope);
  }
  return x;
}

namespace {

NodeState read_states(const Tape& tape, const TapeStates& s) { return {tape.value(s.flow), tape.value(s.ip)}; }

NodeState run_step(const NodeState& states, const CompiledGraph& graph, size_t layer, StepKind step,
                   const ParameterSet& params, const ModelConfig& config) {
  Tape tape;
  BoundParameters p(tape, params, false);
  TapeStates in{tape.constant(states.flow), tape.constant(states.ip)};
  return read_states(tape, tape_step(tape, graph, in, layer, step, p, config));
}

}  // namespace

NodeState init_node_states(const CompiledGraph& graph, const ParameterSet& params, const ModelConfig& config) {
  Tape tape;
  BoundParameters p(tape, params, false);
  return read_states(tape, tape_encode(tape, graph, p, config));
}

NodeState temporal_step(const NodeState& states, const CompiledGraph& graph, size_t layer, const ParameterSet& params,
                        const ModelConfig& config) {
  return run_step(states, graph, layer, StepKind::Temporal, params, config);
}

NodeState spatial_step(const NodeState& states, const CompiledGraph& graph, size_t layer, const ParameterSet& params,
                       const ModelConfig& config) {
  return run_step(states, graph, layer, StepKind::Spatial, params, config);
}

FlowLogits forward(const CompiledGraph& graph, const ParameterSet& params, const ModelConfig& config,
                   std::vector<LayerTrace>* trace) {
  Tape tape;
  BoundParameters p(tape, params, false);
  std::vector<std::pair<TapeStates, TapeStates>> layers;
  TapeStates h = tape_trunk(tape, graph, p, config, trace ? &layers : nullptr);
  if (trace) {
    for (const auto& [temporal, spatial] : layers) {
      trace->push_back({read_states(tape, temporal), read_states(tape, spatial)});
    }
  }
  FlowLogits out;
  Var targets = tape.gather_rows(h.flow, graph.target_flows);
  out.logits = tape.value(tape_mlp(tape, targets, p, "classifier", config.classifier_layers, config.leaky_slope));
  for (uint32_t row : graph.target_flows) out.flow_ids.push_back(graph.flow_ids[row]);
  out.window_index = graph.target_window_index;
  return out;
}

FlowLogits forward(const TemporalGraph& graph, const ParameterSet& params, const ModelConfig& config) {
  return forward(compile_graph(graph, config), params, config);
}

Evaluation classification_objective(const CompiledGraph& graph, const ParameterSet& params, const ModelConfig& config,
                                    std::span<const double> class_weights, bool want_grads, bool track_branches) {
  Evaluation eval;
  std::vector<uint32_t> rows;
  std::vector<int32_t> labels;
  for (size_t i = 0; i < graph.target_flows.size(); ++i) {
    if (graph.target_labels[i] == kUnlabeled) continue;
    rows.push_back(graph.target_flows[i]);
    labels.push_back(graph.target_labels[i]);
  }
  if (rows.empty()) return eval;
  Tape tape(track_branches);
  BoundParameters p(tape, params, want_grads);
  TapeStates h = tape_trunk(tape, graph, p, config);
  Var logits = tape_mlp(tape, tape.gather_rows(h.flow, std::move(rows)), p, "classifier", config.classifier_layers,
                        config.leaky_slope);
  Var loss = tape.cross_entropy(logits, std::move(labels),
                                std::vector<double>(class_weights.begin(), class_weights.end()));
  eval.loss = tape.value(loss)(0, 0);
  eval.branch_signature = tape.branch_signature();
  if (want_grads) {
    tape.backward(loss);
    eval.grads = p.gradients(tape);
  }
  return eval;
}

}  // namespace pptgnn
