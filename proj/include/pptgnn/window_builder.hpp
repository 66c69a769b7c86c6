#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pptgnn/flow_ingest.hpp"
#include "pptgnn/kv_config.hpp"

namespace pptgnn {

struct GraphBuildConfig {
  double window_size = 5.0;        // seconds
  size_t window_memory = 5;        // windows visible to a prediction, current one included
  size_t flow_memory = 20;         // max predecessors per intra-window chain
  size_t flow_encoding_dim = 30;   // cyclical encoding of the flow order inside a window
  size_t window_encoding_dim = 16; // cyclical encoding of the window position inside memory

  void validate() const;  // throws ConfigError
  KeyValueConfig to_kv() const;
  static GraphBuildConfig from_kv(const KeyValueConfig& kv);
  bool operator==(const GraphBuildConfig&) const = default;
};

struct IndexEdge {
  uint32_t src = 0;
  uint32_t dst = 0;
  auto operator<=>(const IndexEdge&) const = default;
};

enum class SpatialEdge : uint8_t { FlowToSrcIp, SrcIpToFlow, FlowToDstIp, DstIpToFlow };
enum class IntraTemporalEdge : uint8_t { SameSource, SameDestination };
inline constexpr size_t kSpatialEdgeTypes = 4;
inline constexpr size_t kIntraTemporalEdgeTypes = 2;

struct FlowNode {
  uint64_t flow_id = 0;
  std::vector<double> features;  // encoded by the dataset's FeatureCodec; empty when built without one
  uint32_t ordinal = 0;          // position in (start_time, flow_id) order within the window
  int32_t label = kUnlabeled;
  double start_time = 0.0;
};

/// Heterogeneous graph for one window. Flow-to-IP edges index into
/// flow_nodes (flow side) and ip_nodes (IP side); intra-window temporal edges
/// index flow_nodes on both ends and always point from earlier to later flows.
struct WindowSnapshot {
  int64_t window_index = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::vector<std::string> ip_nodes;
  std::vector<FlowNode> flow_nodes;
  std::array<std::vector<IndexEdge>, kSpatialEdgeTypes> spatial_edges;
  std::array<std::vector<IndexEdge>, kIntraTemporalEdgeTypes> intra_temporal_edges;

  const std::vector<IndexEdge>& spatial(SpatialEdge type) const { return spatial_edges[static_cast<size_t>(type)]; }
  const std::vector<IndexEdge>& intra(IntraTemporalEdge type) const {
    return intra_temporal_edges[static_cast<size_t>(type)];
  }
  bool empty() const { return flow_nodes.empty(); }
};

using SnapshotPtr = std::shared_ptr<const WindowSnapshot>;

/// Window tiling: window i covers [origin + i * size, origin + (i + 1) * size).
struct WindowGrid {
  double origin = 0.0;
  double size = 1.0;

  double start(int64_t index) const { return origin + static_cast<double>(index) * size; }
  // Index of the window whose half-open interval contains t.
  int64_t index_of(double t) const;
};

struct WindowRange {
  WindowGrid grid;
  int64_t first = 0;  // inclusive
  int64_t last = 0;   // exclusive
};

// Default tiling for a sorted flow sequence: origin at the earliest start,
// enough windows that every start and end time falls in one of them.
WindowRange default_window_range(std::span<const FlowRecord> flows, double window_size);

/// One snapshot per window of `range` (all windows from the default tiling
/// when omitted). A flow belongs to the window holding its start and the
/// window holding its end. Throws std::invalid_argument on unsorted input.
std::vector<SnapshotPtr> build_snapshots(std::span<const FlowRecord> flows, const GraphBuildConfig& config,
                                         const FeatureCodec* codec = nullptr,
                                         std::optional<WindowRange> range = std::nullopt);

// Replaces the snapshot's intra-window temporal edges with the chains
// implied by its spatial edges and config.flow_memory.
WindowSnapshot add_intra_temporal_edges(WindowSnapshot snapshot, const GraphBuildConfig& config);

/// Edge between node `src_node` of snapshot `src_window` and node `dst_node`
/// of snapshot `dst_window`; windows are positions in TemporalGraph::snapshots.
struct InterWindowEdge {
  uint32_t src_window = 0;
  uint32_t src_node = 0;
  uint32_t dst_window = 0;
  uint32_t dst_node = 0;
  auto operator<=>(const InterWindowEdge&) const = default;
};

struct TemporalGraph {
  std::vector<SnapshotPtr> snapshots;  // oldest first; the last one is the target window
  std::vector<InterWindowEdge> inter_ip_edges;
  std::vector<InterWindowEdge> inter_flow_edges;
  size_t window_memory = 1;

  size_t target_window() const { return snapshots.empty() ? 0 : snapshots.size() - 1; }
  const WindowSnapshot& target() const { return *snapshots.back(); }
  // Position of a snapshot inside the memory; the target is always window_memory - 1.
  size_t memory_position(size_t window) const { return window_memory - snapshots.size() + window; }
};

TemporalGraph assemble_temporal_graph(std::span<const SnapshotPtr> snapshots, size_t target,
                                      const GraphBuildConfig& config);

// Every window with at least one flow becomes the target of one graph.
std::vector<TemporalGraph> assemble_all(std::span<const SnapshotPtr> snapshots, const GraphBuildConfig& config);

// Same graph with every intra- and inter-window temporal edge removed.
TemporalGraph without_temporal_edges(const TemporalGraph& graph);

// Copy whose flow labels are all kUnlabeled.
TemporalGraph without_labels(const TemporalGraph& graph);

/// (sin, cos) pairs at frequencies 1..dim/2 of 2*pi*position/period.
std::vector<double> cyclical_encode(size_t position, size_t period, size_t dim);

// Canonical text dump; see docs/graph-format.md.
std::string dump_snapshot(const WindowSnapshot& snapshot);
std::string dump_temporal_graph(const TemporalGraph& graph);

}  // namespace pptgnn
