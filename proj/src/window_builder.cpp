#include "pptgnn/window_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "pptgnn/errors.hpp"
#include "pptgnn/kv_config.hpp"

namespace pptgnn {

void GraphBuildConfig::validate() const {
  if (!(window_size > 0.0) || !std::isfinite(window_size)) throw ConfigError("window_size must be > 0");
  if (window_memory < 1) throw ConfigError("window_memory must be >= 1");
  if (flow_memory < 1) throw ConfigError("flow_memory must be >= 1");
  if (flow_encoding_dim == 0 || flow_encoding_dim % 2) throw ConfigError("flow_encoding_dim must be even and > 0");
  if (window_encoding_dim == 0 || window_encoding_dim % 2) {
    throw ConfigError("window_encoding_dim must be even and > 0");
  }
}

KeyValueConfig GraphBuildConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("window_size", window_size);
  kv.set("window_memory", static_cast<int64_t>(window_memory));
  kv.set("flow_memory", static_cast<int64_t>(flow_memory));
  kv.set("flow_encoding_dim", static_cast<int64_t>(flow_encoding_dim));
  kv.set("window_encoding_dim", static_cast<int64_t>(window_encoding_dim));
  return kv;
}

GraphBuildConfig GraphBuildConfig::from_kv(const KeyValueConfig& kv) {
  GraphBuildConfig c;
  if (kv.contains("window_size")) c.window_size = kv.get_double("window_size");
  auto size = [&](const char* key, size_t& out) {
    if (!kv.contains(key)) return;
    int64_t v = kv.get_int(key);
    if (v < 0) throw ConfigError(std::string("graph.") + key + " must be non-negative");
    out = static_cast<size_t>(v);
  };
  size("window_memory", c.window_memory);
  size("flow_memory", c.flow_memory);
  size("flow_encoding_dim", c.flow_encoding_dim);
  size("window_encoding_dim", c.window_encoding_dim);
  return c;
}

int64_t WindowGrid::index_of(double t) const {
  auto index = static_cast<int64_t>(std::floor((t - origin) / size));
  // floor() on the quotient can land one off the interval comparison.
  while (t < start(index)) --index;
  while (t >= start(index + 1)) ++index;
  return index;
}

WindowRange default_window_range(std::span<const FlowRecord> flows, double window_size) {
  WindowRange range;
  range.grid.size = window_size;
  if (flows.empty()) return range;
  range.grid.origin = flows.front().start_time;
  double max_end = flows.front().end_time;
  for (const auto& f : flows) max_end = std::max(max_end, f.end_time);
  range.first = 0;
  range.last = range.grid.index_of(max_end) + 1;
  return range;
}

std::vector<double> cyclical_encode(size_t position, size_t period, size_t dim) {
  if (dim % 2) throw std::invalid_argument("cyclical_encode: dim must be even");
  if (period == 0) throw std::invalid_argument("cyclical_encode: period must be > 0");
  std::vector<double> out(dim);
  // Reduce first so position == period is bit-identical to position 0.
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(position % period) / static_cast<double>(period);
  for (size_t k = 0; k < dim / 2; ++k) {
    const double angle = phase * static_cast<double>(k + 1);
    out[2 * k] = std::sin(angle);
    out[2 * k + 1] = std::cos(angle);
  }
  return out;
}

WindowSnapshot add_intra_temporal_edges(WindowSnapshot snapshot, const GraphBuildConfig& config) {
  const size_t n = snapshot.flow_nodes.size();
  auto chains = [&](SpatialEdge flow_to_ip) {
    // ip -> flows in ordinal order
    std::map<uint32_t, std::vector<uint32_t>> by_ip;
    std::vector<uint32_t> ip_of(n, 0);
    for (const auto& e : snapshot.spatial(flow_to_ip)) ip_of[e.src] = e.dst;
    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[snapshot.flow_nodes[i].ordinal] = i;
    for (uint32_t flow : order) by_ip[ip_of[flow]].push_back(flow);
    std::vector<IndexEdge> edges;
    for (const auto& [ip, flows] : by_ip) {
      for (size_t j = 1; j < flows.size(); ++j) {
        size_t first = j > config.flow_memory ? j - config.flow_memory : 0;
        for (size_t p = first; p < j; ++p) edges.push_back({flows[p], flows[j]});
      }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
  };
  snapshot.intra_temporal_edges[static_cast<size_t>(IntraTemporalEdge::SameSource)] = chains(SpatialEdge::FlowToSrcIp);
  snapshot.intra_temporal_edges[static_cast<size_t>(IntraTemporalEdge::SameDestination)] =
      chains(SpatialEdge::FlowToDstIp);
  return snapshot;
}

std::vector<SnapshotPtr> build_snapshots(std::span<const FlowRecord> flows, const GraphBuildConfig& config,
                                         const FeatureCodec* codec, std::optional<WindowRange> range) {
  config.validate();
  for (size_t i = 1; i < flows.size(); ++i) {
    if (flow_order_less(flows[i], flows[i - 1])) {
      throw std::invalid_argument("build_snapshots: flows must be sorted by (start_time, flow_id)");
    }
  }
  if (!range) {
    if (flows.empty()) return {};
    range = default_window_range(flows, config.window_size);
  }
  const WindowRange r = *range;
  if (r.last < r.first) throw std::invalid_argument("build_snapshots: empty window range");

  // Flows arrive sorted, so appending keeps every window's list in ordinal order.
  std::vector<std::vector<size_t>> members(static_cast<size_t>(r.last - r.first));
  for (size_t i = 0; i < flows.size(); ++i) {
    int64_t ws = r.grid.index_of(flows[i].start_time);
    int64_t we = r.grid.index_of(flows[i].end_time);
    if (ws >= r.first && ws < r.last) members[static_cast<size_t>(ws - r.first)].push_back(i);
    if (we != ws && we >= r.first && we < r.last) members[static_cast<size_t>(we - r.first)].push_back(i);
  }

  std::vector<SnapshotPtr> snapshots;
  snapshots.reserve(members.size());
  for (size_t w = 0; w < members.size(); ++w) {
    WindowSnapshot snap;
    snap.window_index = r.first + static_cast<int64_t>(w);
    snap.window_start = r.grid.start(snap.window_index);
    snap.window_end = r.grid.start(snap.window_index + 1);
    std::unordered_map<std::string_view, uint32_t> ip_index;
    auto ip_node = [&](const std::string& key) {
      auto [it, inserted] = ip_index.emplace(key, static_cast<uint32_t>(snap.ip_nodes.size()));
      if (inserted) snap.ip_nodes.push_back(key);
      return it->second;
    };
    for (size_t pos = 0; pos < members[w].size(); ++pos) {
      const FlowRecord& f = flows[members[w][pos]];
      FlowNode node;
      node.flow_id = f.flow_id;
      node.ordinal = static_cast<uint32_t>(pos);
      node.label = f.label;
      node.start_time = f.start_time;
      if (codec) node.features = encode_flow(f, *codec);
      const auto flow = static_cast<uint32_t>(snap.flow_nodes.size());
      snap.flow_nodes.push_back(std::move(node));
      const uint32_t src = ip_node(f.src_ip);
      const uint32_t dst = ip_node(f.dst_ip);
      snap.spatial_edges[static_cast<size_t>(SpatialEdge::FlowToSrcIp)].push_back({flow, src});
      snap.spatial_edges[static_cast<size_t>(SpatialEdge::SrcIpToFlow)].push_back({src, flow});
      snap.spatial_edges[static_cast<size_t>(SpatialEdge::FlowToDstIp)].push_back({flow, dst});
      snap.spatial_edges[static_cast<size_t>(SpatialEdge::DstIpToFlow)].push_back({dst, flow});
    }
    for (auto& list : snap.spatial_edges) std::sort(list.begin(), list.end());
    snapshots.push_back(std::make_shared<const WindowSnapshot>(add_intra_temporal_edges(std::move(snap), config)));
  }
  return snapshots;
}

TemporalGraph assemble_temporal_graph(std::span<const SnapshotPtr> snapshots, size_t target,
                                      const GraphBuildConfig& config) {
  if (target >= snapshots.size()) throw std::out_of_range("assemble_temporal_graph: target out of range");
  TemporalGraph graph;
  graph.window_memory = config.window_memory;
  const size_t first = target + 1 >= config.window_memory ? target + 1 - config.window_memory : 0;
  graph.snapshots.assign(snapshots.begin() + static_cast<std::ptrdiff_t>(first),
                         snapshots.begin() + static_cast<std::ptrdiff_t>(target) + 1);

  // key -> occurrences (window, node) in window order
  std::map<std::string_view, std::vector<std::pair<uint32_t, uint32_t>>> ip_occ;
  std::map<uint64_t, std::vector<std::pair<uint32_t, uint32_t>>> flow_occ;
  for (uint32_t w = 0; w < graph.snapshots.size(); ++w) {
    const auto& snap = *graph.snapshots[w];
    for (uint32_t i = 0; i < snap.ip_nodes.size(); ++i) ip_occ[snap.ip_nodes[i]].push_back({w, i});
    for (uint32_t i = 0; i < snap.flow_nodes.size(); ++i) flow_occ[snap.flow_nodes[i].flow_id].push_back({w, i});
  }
  auto connect = [](const auto& occurrences, std::vector<InterWindowEdge>& out) {
    for (const auto& [key, occ] : occurrences) {
      for (size_t a = 0; a < occ.size(); ++a) {
        for (size_t b = a + 1; b < occ.size(); ++b) {
          if (occ[a].first < occ[b].first) out.push_back({occ[a].first, occ[a].second, occ[b].first, occ[b].second});
        }
      }
    }
    std::sort(out.begin(), out.end());
  };
  connect(ip_occ, graph.inter_ip_edges);
  connect(flow_occ, graph.inter_flow_edges);
  return graph;
}

std::vector<TemporalGraph> assemble_all(std::span<const SnapshotPtr> snapshots, const GraphBuildConfig& config) {
  std::vector<TemporalGraph> graphs;
  for (size_t t = 0; t < snapshots.size(); ++t) {
    if (!snapshots[t]->empty()) graphs.push_back(assemble_temporal_graph(snapshots, t, config));
  }
  return graphs;
}

TemporalGraph without_temporal_edges(const TemporalGraph& graph) {
  TemporalGraph out;
  out.window_memory = graph.window_memory;
  for (const auto& snap : graph.snapshots) {
    auto copy = std::make_shared<WindowSnapshot>(*snap);
    for (auto& list : copy->intra_temporal_edges) list.clear();
    out.snapshots.push_back(std::move(copy));
  }
  return out;
}

TemporalGraph without_labels(const TemporalGraph& graph) {
  TemporalGraph out = graph;
  for (auto& snap : out.snapshots) {
    auto copy = std::make_shared<WindowSnapshot>(*snap);
    for (auto& node : copy->flow_nodes) node.label = kUnlabeled;
    snap = std::move(copy);
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, kSpatialEdgeTypes> kSpatialNames = {"flow_to_src_ip", "src_ip_to_flow",
                                                                           "flow_to_dst_ip", "dst_ip_to_flow"};
constexpr std::array<std::string_view, kIntraTemporalEdgeTypes> kIntraNames = {"same_src_flow", "same_dst_flow"};

}  // namespace

std::string dump_snapshot(const WindowSnapshot& snap) {
  std::ostringstream out;
  out << "window " << snap.window_index << " start=" << format_double(snap.window_start)
      << " end=" << format_double(snap.window_end) << " ips=" << snap.ip_nodes.size()
      << " flows=" << snap.flow_nodes.size() << '\n';
  for (size_t i = 0; i < snap.ip_nodes.size(); ++i) out << "  ip " << i << ' ' << snap.ip_nodes[i] << '\n';
  for (size_t i = 0; i < snap.flow_nodes.size(); ++i) {
    const auto& f = snap.flow_nodes[i];
    out << "  flow " << i << " id=" << f.flow_id << " ordinal=" << f.ordinal << " label=" << f.label << '\n';
  }
  for (size_t t = 0; t < kSpatialEdgeTypes; ++t) {
    for (const auto& e : snap.spatial_edges[t]) out << "  edge " << kSpatialNames[t] << ' ' << e.src << ' ' << e.dst << '\n';
  }
  for (size_t t = 0; t < kIntraTemporalEdgeTypes; ++t) {
    for (const auto& e : snap.intra_temporal_edges[t]) {
      out << "  edge " << kIntraNames[t] << ' ' << e.src << ' ' << e.dst << '\n';
    }
  }
  return out.str();
}

std::string dump_temporal_graph(const TemporalGraph& graph) {
  std::ostringstream out;
  out << "temporal_graph windows=" << graph.snapshots.size() << " memory=" << graph.window_memory
      << " target=" << graph.target_window() << '\n';
  for (const auto& snap : graph.snapshots) out << dump_snapshot(*snap);
  for (const auto& e : graph.inter_ip_edges) {
    out << "inter ip_recurrence " << e.src_window << ' ' << e.src_node << ' ' << e.dst_window << ' ' << e.dst_node
        << '\n';
  }
  for (const auto& e : graph.inter_flow_edges) {
    out << "inter flow_recurrence " << e.src_window << ' ' << e.src_node << ' ' << e.dst_window << ' ' << e.dst_node
        << '\n';
  }
  return out.str();
}

}  // namespace pptgnn
