#include "pptgnn/pretrain.hpp"

#include <chrono>
#include <unordered_set>

#include "pptgnn/checkpoint.hpp"
#include "pptgnn/errors.hpp"

namespace pptgnn {

size_t LinkPredTask::num_positives() const {
  size_t n = 0;
  for (const auto& l : positives) n += l.size();
  return n;
}

size_t LinkPredTask::num_negatives() const {
  size_t n = 0;
  for (const auto& l : negatives) n += l.size();
  return n;
}

size_t LinkPredTask::total_shortfall() const {
  size_t n = 0;
  for (size_t s : shortfall) n += s;
  return n;
}

namespace {

uint64_t edge_key(uint32_t s, uint32_t d) { return (static_cast<uint64_t>(s) << 32) | d; }

std::vector<std::vector<uint32_t>> nodes_by_window(const std::vector<uint32_t>& window_of, size_t windows) {
  std::vector<std::vector<uint32_t>> out(windows);
  for (uint32_t i = 0; i < window_of.size(); ++i) out[window_of[i]].push_back(i);
  return out;
}

}  // namespace

LinkPredTask sample_negatives(const CompiledGraph& graph, double ratio, Rng& rng) {
  if (ratio < 0.0) throw ConfigError("negative_ratio must be >= 0");
  LinkPredTask task;
  task.negative_ratio = ratio;
  const auto flows = nodes_by_window(graph.flow_window, graph.num_windows);
  const auto ips = nodes_by_window(graph.ip_window, graph.num_windows);
  auto window_of = [&](NodeKind kind, uint32_t node) {
    return kind == NodeKind::Flow ? graph.flow_window[node] : graph.ip_window[node];
  };

  for (EdgeType type : kAllEdgeTypes) {
    const size_t t = index_of(type);
    const EdgeList& pos = graph.edges[t];
    task.positives[t] = pos;
    const auto wanted = static_cast<size_t>(std::floor(ratio * static_cast<double>(pos.size())));
    if (wanted == 0) continue;
    const bool ordered = type == EdgeType::SameSrcFlow || type == EdgeType::SameDstFlow;
    std::unordered_set<uint64_t> seen;
    for (const auto& [s, d] : pos) seen.insert(edge_key(s, d));
    EdgeList& neg = task.negatives[t];
    for (size_t k = 0; k < wanted; ++k) {
      bool found = false;
      for (size_t attempt = 0; attempt < kMaxNegativeAttempts && !found; ++attempt) {
        auto [s, d] = pos[rng.below(pos.size())];
        const bool corrupt_src = rng.below(2) == 0;
        const NodeKind kind = corrupt_src ? source_kind(type) : target_kind(type);
        const uint32_t window = window_of(kind, corrupt_src ? s : d);
        const auto& pool = kind == NodeKind::Flow ? flows[window] : ips[window];
        const uint32_t c = pool[rng.below(pool.size())];
        (corrupt_src ? s : d) = c;
        if (ordered && graph.flow_ordinal[s] >= graph.flow_ordinal[d]) continue;
        if (!seen.insert(edge_key(s, d)).second) continue;
        neg.push_back({s, d});
        found = true;
      }
    }
    task.shortfall[t] = wanted - neg.size();
  }
  return task;
}

LinkPredTask sample_negatives(const TemporalGraph& graph, double ratio, Rng& rng) {
  ModelConfig structure;
  structure.feature_dim = 0;
  for (const auto& snap : graph.snapshots) {
    if (!snap->flow_nodes.empty()) {
      structure.feature_dim = snap->flow_nodes.front().features.size();
      break;
    }
  }
  return sample_negatives(compile_graph(graph, structure, false), ratio, rng);
}

std::string scorer_prefix(EdgeType type) { return "scorer." + std::string(edge_type_name(type)); }

ParameterSet init_scorers(const ModelConfig& config, Rng& rng) {
  ParameterSet params;
  const size_t h = config.hidden_size;
  for (EdgeType type : kAllEdgeTypes) {
    const std::string prefix = scorer_prefix(type);
    params[prefix + ".0.W"] = glorot_uniform(2 * h, h, rng);
    params[prefix + ".0.b"] = Tensor::Zero(1, static_cast<Eigen::Index>(h));
    params[prefix + ".1.W"] = glorot_uniform(h, 1, rng);
    params[prefix + ".1.b"] = Tensor::Zero(1, 1);
  }
  return params;
}

LinkEvaluation link_prediction_objective(const CompiledGraph& graph, const LinkPredTask& task,
                                         const ParameterSet& params, const ModelConfig& config, bool want_grads) {
  LinkEvaluation out;
  const double total = static_cast<double>(task.num_positives() + task.num_negatives());
  if (total == 0) return out;
  Tape tape;
  BoundParameters p(tape, params, want_grads);
  TapeStates h = tape_trunk(tape, graph, p, config);
  Var loss;
  for (EdgeType type : kAllEdgeTypes) {
    const size_t t = index_of(type);
    std::vector<uint32_t> src;
    std::vector<uint32_t> dst;
    std::vector<int32_t> labels;
    for (const auto& [s, d] : task.positives[t]) {
      src.push_back(s);
      dst.push_back(d);
      labels.push_back(1);
    }
    for (const auto& [s, d] : task.negatives[t]) {
      src.push_back(s);
      dst.push_back(d);
      labels.push_back(0);
    }
    if (labels.empty()) continue;
    const Var src_state = source_kind(type) == NodeKind::Flow ? h.flow : h.ip;
    const Var dst_state = target_kind(type) == NodeKind::Flow ? h.flow : h.ip;
    Var x = tape.concat_cols(tape.gather_rows(src_state, std::move(src)), tape.gather_rows(dst_state, std::move(dst)));
    Var logits = tape_mlp(tape, x, p, scorer_prefix(type), 2, config.leaky_slope);
    const Tensor& values = tape.value(logits);
    for (size_t i = 0; i < labels.size(); ++i) {
      out.correct += (values(static_cast<Eigen::Index>(i), 0) > 0.0) == (labels[i] == 1);
    }
    out.total += labels.size();
    const double share = static_cast<double>(labels.size()) / total;
    Var part = tape.scale(tape.binary_cross_entropy(logits, std::move(labels)), share);
    loss = loss.valid() ? tape.add(loss, part) : part;
  }
  out.objective.loss = tape.value(loss)(0, 0);
  if (want_grads) {
    tape.backward(loss);
    out.objective.grads = p.gradients(tape);
  }
  return out;
}

PretrainResult pretrain(std::span<const CompiledGraph> graphs, const ModelConfig& config,
                        const PretrainConfig& options) {
  if (graphs.empty()) throw EmptyDataError("pre-training corpus is empty");
  if (options.epochs == 0 || options.learning_rate <= 0.0) throw ConfigError("pretrain epochs and lr must be positive");
  const auto started = std::chrono::steady_clock::now();
  Rng rng(options.seed);
  Rng init_rng = rng.split();
  PretrainResult result;
  for (auto& [name, t] : init_parameters(config, init_rng)) {
    if (is_trunk_parameter(name)) result.params.emplace(name, std::move(t));
  }
  result.params.merge(init_scorers(config, init_rng));

  AdamState adam(AdamConfig{.learning_rate = options.learning_rate});
  std::vector<size_t> order(graphs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t batch = options.batch_size == 0 ? graphs.size() : options.batch_size;

  for (size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    PretrainEpoch log;
    log.epoch = epoch;
    double loss_sum = 0.0;
    size_t correct = 0;
    size_t total = 0;
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      std::vector<const CompiledGraph*> members;
      for (size_t i = begin; i < std::min(order.size(), begin + batch); ++i) members.push_back(&graphs[order[i]]);
      CompiledGraph merged = merge_graphs(members);
      LinkPredTask task = sample_negatives(merged, options.negative_ratio, rng);
      LinkEvaluation eval = link_prediction_objective(merged, task, result.params, config, true);
      if (eval.total == 0) continue;
      adam_step(result.params, eval.objective.grads, adam);
      loss_sum += eval.objective.loss * static_cast<double>(eval.total);
      correct += eval.correct;
      total += eval.total;
      log.negatives += task.num_negatives();
      log.shortfall += task.total_shortfall();
    }
    if (total == 0) throw EmptyDataError("pre-training corpus has no edges");
    log.loss = loss_sum / static_cast<double>(total);
    log.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    result.log.push_back(log);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

ParameterSet transfer_weights(const ParameterSet& pretrained, const ModelConfig& target, Rng& rng) {
  ParameterSet out;
  std::string problems;
  for (const auto& [name, shape] : expected_shapes(target)) {
    if (!is_trunk_parameter(name)) continue;
    auto it = pretrained.find(name);
    if (it == pretrained.end()) {
      problems += " " + name + " (missing)";
    } else if (it->second.rows() != shape.first || it->second.cols() != shape.second) {
      problems += " " + name + " (" + std::to_string(it->second.rows()) + "x" + std::to_string(it->second.cols()) +
                  " vs " + std::to_string(shape.first) + "x" + std::to_string(shape.second) + ")";
    } else {
      out.emplace(name, it->second);
    }
  }
  if (!problems.empty()) throw CompatibilityError("pre-trained trunk does not fit the target model:" + problems);
  out.merge(init_classifier(target, rng));
  return out;
}

std::string_view pretrain_mode_name(PretrainMode mode) {
  return mode == PretrainMode::InContext ? "in-context" : "out-of-context";
}

PretrainMode parse_pretrain_mode(std::string_view name) {
  if (name == "in-context") return PretrainMode::InContext;
  if (name == "out-of-context") return PretrainMode::OutOfContext;
  throw ConfigError("unknown pre-training mode '" + std::string(name) + "'");
}

std::vector<CorpusEntry> PretrainCorpus::effective() const {
  std::vector<CorpusEntry> out;
  for (const auto& d : datasets) {
    if (mode == PretrainMode::OutOfContext && d.id == target) continue;
    out.push_back(d);
  }
  return out;
}

KeyValueConfig PretrainCorpus::to_kv() const {
  KeyValueConfig kv;
  kv.set("mode", std::string(pretrain_mode_name(mode)));
  kv.set("target", target);
  for (const auto& d : datasets) kv.set("dataset." + d.id, d.path);
  return kv;
}

PretrainCorpus PretrainCorpus::from_kv(const KeyValueConfig& kv) {
  PretrainCorpus corpus;
  corpus.mode = parse_pretrain_mode(kv.require("mode"));
  corpus.target = kv.get("target").value_or("");
  const KeyValueConfig datasets = kv.section("dataset.");
  for (const auto& [id, path] : datasets.entries()) corpus.datasets.push_back({id, path});
  return corpus;
}

}  // namespace pptgnn
