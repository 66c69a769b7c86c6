#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pptgnn {

inline constexpr int32_t kUnlabeled = -1;
inline constexpr std::string_view kBenignClass = "Benign";

/// One flow restricted to fields a NetFlow v9 exporter reports. IP addresses
/// are opaque endpoint keys; they are never turned into features.
struct FlowRecord {
  uint64_t flow_id = 0;
  double start_time = 0.0;  // seconds since epoch
  double end_time = 0.0;
  std::string src_ip;
  std::string dst_ip;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint8_t protocol = 0;
  uint64_t in_bytes = 0;
  uint64_t out_bytes = 0;
  uint64_t in_pkts = 0;
  uint64_t out_pkts = 0;
  uint8_t tcp_flags = 0;
  double duration = 0.0;
  int32_t label = kUnlabeled;
  std::optional<std::string> attack_name;

  bool operator==(const FlowRecord&) const = default;
};

// Empty string when the record satisfies every FlowRecord invariant.
std::string validate_record(const FlowRecord& record);

// Ascending start_time, ties by flow_id.
bool flow_order_less(const FlowRecord& a, const FlowRecord& b);
void sort_flows(std::vector<FlowRecord>& flows);

/// Class names with index 0 reserved for benign traffic. Other names are
/// kept in lexicographic order so the vocabulary does not depend on row order.
class LabelVocabulary {
 public:
  LabelVocabulary();
  explicit LabelVocabulary(std::vector<std::string> attack_names);

  static LabelVocabulary from_records(std::span<const FlowRecord> records);
  static bool is_benign_alias(std::string_view name);

  size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(size_t index) const { return names_.at(index); }
  std::optional<int32_t> index_of(std::string_view name) const;

  // Sets `label` on every record carrying an attack_name. Throws
  // SchemaError on names outside the vocabulary.
  void assign(std::span<FlowRecord> records) const;

  std::string serialize() const;  // comma-separated names
  static LabelVocabulary parse(std::string_view text);

  bool operator==(const LabelVocabulary&) const = default;

 private:
  std::vector<std::string> names_;
  std::map<std::string, int32_t, std::less<>> index_;
};

/// Maps canonical field names onto CSV column headers. Required fields:
/// start_time end_time src_ip dst_ip src_port dst_port protocol in_bytes
/// out_bytes in_pkts out_pkts tcp_flags. Optional: flow_id duration attack.
struct CsvSchema {
  std::map<std::string, std::string> columns;

  static CsvSchema canonical();
  static CsvSchema from_text(std::string_view text);  // "field = column" lines
  static const std::vector<std::string>& required_fields();
  static const std::vector<std::string>& optional_fields();
};

struct RowDiagnostic {
  size_t line = 0;  // 1-based physical line in the CSV, header is line 1
  std::string message;
};

struct LoadResult {
  std::vector<FlowRecord> records;
  size_t accepted = 0;
  size_t rejected = 0;
  std::vector<RowDiagnostic> diagnostics;
  LabelVocabulary vocabulary;
};

LoadResult load_flow_csv(const std::string& path, const CsvSchema& schema);
LoadResult parse_flow_csv(std::string_view text, const CsvSchema& schema);

// ISO-8601 ("2019-05-04T12:00:01.250Z", offsets and a space separator allowed).
std::optional<double> parse_iso8601(std::string_view text);

// Writes records as CSV under the canonical column names.
std::string to_canonical_csv(std::span<const FlowRecord> records);

/// Binary flow cache ("PPTF"), little-endian. See docs/flow-cache-format.md.
inline constexpr uint32_t kFlowCacheVersion = 1;
void write_flow_cache(const std::string& path, std::span<const FlowRecord> records);
std::vector<FlowRecord> read_flow_cache(const std::string& path);
std::string encode_flow_cache(std::span<const FlowRecord> records);
std::vector<FlowRecord> decode_flow_cache(std::string_view bytes);

inline constexpr std::array<std::string_view, 7> kNumericFeatures = {
    "in_bytes", "out_bytes", "in_pkts", "out_pkts", "duration", "src_port", "dst_port"};
inline constexpr size_t kFlagBits = 8;
inline constexpr double kMinStd = 1e-8;

struct FeatureStat {
  double mean = 0.0;
  double std = 1.0;
  bool operator==(const FeatureStat&) const = default;
};

/// Frozen encoding of flow records into dense vectors laid out as
/// [z-scored numerics | protocol one-hot | tcp flag bits, LSB first].
struct FeatureCodec {
  std::array<FeatureStat, kNumericFeatures.size()> numeric_stats{};
  std::vector<uint8_t> protocol_vocab;

  size_t feature_dim() const { return kNumericFeatures.size() + protocol_vocab.size() + kFlagBits; }

  std::string serialize() const;
  static FeatureCodec parse(std::string_view text);
  uint64_t hash() const;

  bool operator==(const FeatureCodec&) const = default;
};

struct CodecOptions {
  // When set, the protocol vocabulary is fixed instead of observed. Corpora
  // that share a model trunk need the same vocabulary to get equal dims.
  std::optional<std::vector<uint8_t>> protocol_vocab;
};

FeatureCodec fit_codec(std::span<const FlowRecord> records, const CodecOptions& options = {});
std::vector<double> encode_flow(const FlowRecord& record, const FeatureCodec& codec);
void encode_flow_into(const FlowRecord& record, const FeatureCodec& codec, std::span<double> out);
double numeric_feature(const FlowRecord& record, size_t index);

}  // namespace pptgnn
