#include "pptgnn/synthetic.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "pptgnn/tensor.hpp"

namespace pptgnn {

namespace {

std::string ip(const char* prefix, size_t a, size_t b) {
  return std::string(prefix) + std::to_string(a) + "." + std::to_string(b);
}

// Label-independent traffic counters.
void random_counters(FlowRecord& f, Rng& rng, double byte_scale) {
  static constexpr std::array<uint16_t, 5> kPorts = {80, 443, 53, 22, 8080};
  f.src_port = static_cast<uint16_t>(1024 + rng.below(64000));
  f.dst_port = kPorts[rng.below(kPorts.size())];
  f.protocol = rng.below(4) == 0 ? 17 : 6;
  f.in_pkts = 1 + rng.below(40);
  f.out_pkts = 1 + rng.below(40);
  f.in_bytes = static_cast<uint64_t>(byte_scale * static_cast<double>(f.in_pkts * (40 + rng.below(1400))));
  f.out_bytes = static_cast<uint64_t>(byte_scale * static_cast<double>(f.out_pkts * (40 + rng.below(1400))));
  f.tcp_flags = f.protocol == 6 ? static_cast<uint8_t>(rng.below(256)) : 0;
}

void set_times(FlowRecord& f, double start, double duration) {
  f.start_time = start;
  f.end_time = start + duration;
  f.duration = duration;
}

SyntheticDataset finish(std::vector<FlowRecord> flows) {
  sort_flows(flows);
  for (size_t i = 0; i < flows.size(); ++i) flows[i].flow_id = i;
  SyntheticDataset out;
  out.vocab = LabelVocabulary::from_records(flows);
  out.vocab.assign(flows);
  out.flows = std::move(flows);
  return out;
}

}  // namespace

SyntheticDataset feature_separable(size_t count, uint64_t seed, double duration) {
  Rng rng(seed);
  static constexpr std::array<const char*, 3> kNames = {"Benign", "Bulk", "Shell"};
  static constexpr std::array<double, 3> kBytes = {400.0, 60000.0, 6000.0};
  static constexpr std::array<uint16_t, 3> kPort = {443, 21, 22};
  std::vector<FlowRecord> flows;
  for (size_t i = 0; i < count; ++i) {
    const size_t c = rng.below(3);
    FlowRecord f;
    set_times(f, rng.uniform(0.0, duration * 0.98), rng.uniform(0.0, duration * 0.02));
    f.src_ip = ip("10.0.", 0, rng.below(20));
    f.dst_ip = ip("10.1.", 0, rng.below(10));
    f.src_port = static_cast<uint16_t>(1024 + rng.below(64000));
    f.dst_port = kPort[c];
    f.protocol = 6;
    f.in_pkts = static_cast<uint64_t>(kBytes[c] / 200.0 * rng.uniform(0.8, 1.2)) + 1;
    f.out_pkts = f.in_pkts / 2 + 1;
    f.in_bytes = static_cast<uint64_t>(kBytes[c] * rng.uniform(0.8, 1.2));
    f.out_bytes = static_cast<uint64_t>(kBytes[c] * 0.1 * rng.uniform(0.8, 1.2));
    f.tcp_flags = static_cast<uint8_t>(rng.below(256));
    f.attack_name = kNames[c];
    flows.push_back(std::move(f));
  }
  return finish(std::move(flows));
}

SyntheticDataset topology_only(size_t windows, uint64_t seed, double window_size) {
  Rng rng(seed);
  std::vector<FlowRecord> flows;
  size_t fresh = 0;
  for (size_t w = 0; w < windows; ++w) {
    const double base = static_cast<double>(w) * window_size;
    auto add = [&](const std::string& src, const std::string& dst, const char* label) {
      FlowRecord f;
      const double d = rng.uniform(0.0, 0.1 * window_size);
      set_times(f, base + rng.uniform(0.0, 0.85 * window_size), d);
      f.src_ip = src;
      f.dst_ip = dst;
      random_counters(f, rng, 1.0);
      f.attack_name = label;
      flows.push_back(std::move(f));
    };
    const size_t clients = 6 + rng.below(5);
    for (size_t c = 0; c < clients; ++c) add(ip("10.0.", 0, c), ip("10.1.", 0, rng.below(3)), "Benign");
    const size_t scanners = 1 + rng.below(2);
    for (size_t s = 0; s < scanners; ++s) {
      const std::string src = ip("10.66.", w, s);
      const size_t burst = 4 + rng.below(5);
      for (size_t k = 0; k < burst; ++k) {
        ++fresh;
        add(src, ip("172.16.", fresh / 250, fresh % 250), "Scan");
      }
    }
  }
  if (!flows.empty()) {
    auto first = std::min_element(flows.begin(), flows.end(),
                                  [](const FlowRecord& a, const FlowRecord& b) { return a.start_time < b.start_time; });
    set_times(*first, 0.0, first->duration);
  }
  return finish(std::move(flows));
}

SyntheticDataset temporal_pattern(const TemporalPatternOptions& o, uint64_t seed) {
  Rng rng(seed);
  std::vector<FlowRecord> flows;
  size_t fresh = 0;
  for (size_t w = 0; w < o.windows; ++w) {
    const double base = static_cast<double>(w) * o.window_size;
    auto add = [&](const std::string& src, const std::string& dst, double at) {
      FlowRecord f;
      const double latest_end = base + 0.999 * o.window_size;
      set_times(f, at, std::min(rng.uniform(0.0, 0.05 * o.window_size), latest_end - at));
      f.src_ip = src;
      f.dst_ip = dst;
      random_counters(f, rng, o.byte_scale);
      flows.push_back(std::move(f));
    };
    for (size_t b = 0; b < o.background_per_window; ++b) {
      const double at = (w == 0 && b == 0) ? 0.0 : base + rng.uniform(0.0, 0.9 * o.window_size);
      add(ip("10.0.", 0, rng.below(o.clients)), ip("10.1.", 0, rng.below(o.servers)), at);
    }
    for (size_t b = 0; b < o.bursts_per_window; ++b) {
      const std::string src = ip("10.66.", w, b);
      const size_t length = 1 + rng.below(o.max_burst);
      for (size_t k = 0; k < length; ++k) {
        ++fresh;
        add(src, ip("172.16.", fresh / 250, fresh % 250), base + rng.uniform(0.0, 0.9 * o.window_size));
      }
    }
  }
  sort_flows(flows);
  std::map<std::pair<size_t, std::string>, size_t> seen;
  for (auto& f : flows) {
    const auto window = static_cast<size_t>(f.start_time / o.window_size);
    const size_t position = seen[{window, f.src_ip}]++;
    f.attack_name = position == 0 ? "Benign" : (position == 1 ? "Probe" : "Flood");
  }
  return finish(std::move(flows));
}

TemporalPatternOptions planted_family_member(uint64_t member) {
  Rng rng(0x9e3779b97f4a7c15ULL ^ member);
  TemporalPatternOptions o;
  o.bursts_per_window = 3 + rng.below(3);
  o.max_burst = 4 + rng.below(3);
  o.background_per_window = 4 + rng.below(5);
  o.clients = 8 + rng.below(12);
  o.servers = 2 + rng.below(5);
  o.byte_scale = rng.uniform(0.5, 4.0);
  return o;
}

SyntheticDataset planted_pattern(uint64_t member, uint64_t seed, size_t windows) {
  TemporalPatternOptions o = planted_family_member(member);
  o.windows = windows;
  return temporal_pattern(o, seed);
}

}  // namespace pptgnn
