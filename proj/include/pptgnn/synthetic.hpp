#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pptgnn/flow_ingest.hpp"

namespace pptgnn {

struct SyntheticDataset {
  std::vector<FlowRecord> flows;  // sorted, labeled, flow_id = rank in time order
  LabelVocabulary vocab;
};

/// Classes Benign / Bulk / Shell differ in byte and packet volumes and in the
/// destination port; endpoints and timing are random. Flows stay inside
/// `duration` seconds.
SyntheticDataset feature_separable(size_t flows, uint64_t seed, double duration = 60.0);

/// Every flow has the same feature distribution. Benign clients send one
/// flow per window to a small server pool; Scan sources send a burst of 4 to
/// 8 flows to never-seen destinations. Only the graph tells them apart.
SyntheticDataset topology_only(size_t windows, uint64_t seed, double window_size = 5.0);

struct TemporalPatternOptions {
  size_t windows = 40;
  double window_size = 5.0;
  size_t bursts_per_window = 4;
  size_t max_burst = 5;               // burst length uniform in 1..max_burst
  size_t background_per_window = 6;   // single flows from a recurring client pool
  size_t clients = 12;
  size_t servers = 4;
  double byte_scale = 1.0;
};

/// A flow's label is its position among the flows of its source IP inside
/// its window: first is Benign, second Probe, later ones Flood. Features are
/// drawn independently of the label and every flow starts and ends inside
/// one window; one flow sits at t = 0 so windows line up with the grid.
SyntheticDataset temporal_pattern(const TemporalPatternOptions& options, uint64_t seed);

/// Network `member` of the planted-pattern family: the temporal-pattern rule
/// with traffic volume, burst shape, host pools and byte scale drawn from the
/// member id, so different members behave like different networks.
TemporalPatternOptions planted_family_member(uint64_t member);
SyntheticDataset planted_pattern(uint64_t member, uint64_t seed, size_t windows = 40);

}  // namespace pptgnn
