#include "pptgnn/flow_ingest.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "pptgnn/errors.hpp"
#include "pptgnn/kv_config.hpp"

namespace pptgnn {

std::string validate_record(const FlowRecord& r) {
  if (!std::isfinite(r.start_time) || !std::isfinite(r.end_time)) return "non-finite timestamp";
  if (r.end_time < r.start_time) return "end_time precedes start_time";
  if (!std::isfinite(r.duration) || std::abs(r.duration - (r.end_time - r.start_time)) > 1e-6) {
    return "duration does not match end_time - start_time";
  }
  if (r.src_ip.empty() || r.dst_ip.empty()) return "empty endpoint key";
  return {};
}

bool flow_order_less(const FlowRecord& a, const FlowRecord& b) {
  if (a.start_time != b.start_time) return a.start_time < b.start_time;
  return a.flow_id < b.flow_id;
}

void sort_flows(std::vector<FlowRecord>& flows) { std::stable_sort(flows.begin(), flows.end(), flow_order_less); }

// ---------------------------------------------------------------------------
// LabelVocabulary

LabelVocabulary::LabelVocabulary() : LabelVocabulary(std::vector<std::string>{}) {}

LabelVocabulary::LabelVocabulary(std::vector<std::string> attack_names) {
  names_.emplace_back(kBenignClass);
  std::sort(attack_names.begin(), attack_names.end());
  attack_names.erase(std::unique(attack_names.begin(), attack_names.end()), attack_names.end());
  for (auto& name : attack_names) {
    if (is_benign_alias(name)) continue;
    names_.push_back(std::move(name));
  }
  for (size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], static_cast<int32_t>(i));
}

bool LabelVocabulary::is_benign_alias(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower.empty() || lower == "benign" || lower == "normal";
}

LabelVocabulary LabelVocabulary::from_records(std::span<const FlowRecord> records) {
  std::vector<std::string> names;
  for (const auto& r : records) {
    if (r.attack_name && !is_benign_alias(*r.attack_name)) names.push_back(*r.attack_name);
  }
  return LabelVocabulary(std::move(names));
}

std::optional<int32_t> LabelVocabulary::index_of(std::string_view name) const {
  if (is_benign_alias(name)) return 0;
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void LabelVocabulary::assign(std::span<FlowRecord> records) const {
  for (auto& r : records) {
    if (!r.attack_name) continue;
    auto index = index_of(*r.attack_name);
    if (!index) throw SchemaError("attack class '" + *r.attack_name + "' not in label vocabulary");
    r.label = *index;
  }
}

std::string LabelVocabulary::serialize() const {
  std::string out;
  for (size_t i = 0; i < names_.size(); ++i) {
    if (i) out += ',';
    out += names_[i];
  }
  return out;
}

LabelVocabulary LabelVocabulary::parse(std::string_view text) {
  auto parts = split(text, ',');
  if (parts.empty() || trim(parts[0]) != kBenignClass) {
    throw FormatError("label vocabulary must start with " + std::string(kBenignClass));
  }
  std::vector<std::string> names;
  for (size_t i = 1; i < parts.size(); ++i) names.push_back(trim(parts[i]));
  LabelVocabulary vocab(names);
  if (vocab.size() != parts.size()) throw FormatError("label vocabulary is not canonical: " + std::string(text));
  return vocab;
}

// ---------------------------------------------------------------------------
// CSV

const std::vector<std::string>& CsvSchema::required_fields() {
  static const std::vector<std::string> fields = {
      "start_time", "end_time", "src_ip",  "dst_ip",   "src_port", "dst_port",
      "protocol",   "in_bytes", "out_bytes", "in_pkts", "out_pkts", "tcp_flags"};
  return fields;
}

const std::vector<std::string>& CsvSchema::optional_fields() {
  static const std::vector<std::string> fields = {"flow_id", "duration", "attack"};
  return fields;
}

CsvSchema CsvSchema::canonical() {
  CsvSchema schema;
  for (const auto& f : required_fields()) schema.columns[f] = f;
  for (const auto& f : optional_fields()) schema.columns[f] = f;
  return schema;
}

CsvSchema CsvSchema::from_text(std::string_view text) {
  auto kv = KeyValueConfig::parse(text);
  CsvSchema schema = canonical();
  for (const auto& [field, column] : kv.entries()) {
    bool known = std::find(required_fields().begin(), required_fields().end(), field) != required_fields().end() ||
                 std::find(optional_fields().begin(), optional_fields().end(), field) != optional_fields().end();
    if (!known) throw SchemaError("unknown schema field '" + field + "'");
    schema.columns[field] = column;
  }
  return schema;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::string csv_quote(std::string_view value) {
  if (value.find_first_of(",\"\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

template <typename T>
bool parse_unsigned(std::string_view text, uint64_t max_value, T& out) {
  uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    // Some exporters write integral counters as "12.0".
    double d = 0;
    auto [dptr, dec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (dec != std::errc() || dptr != text.data() + text.size()) return false;
    if (!std::isfinite(d) || d < 0 || d != std::floor(d) || d > static_cast<double>(max_value)) return false;
    value = static_cast<uint64_t>(d);
  }
  if (value > max_value) return false;
  out = static_cast<T>(value);
  return true;
}

enum class TimeFormat { Epoch, Iso8601 };

std::optional<double> parse_epoch(std::string_view text) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

std::optional<double> parse_iso8601(std::string_view s) {
  auto digits = [&](size_t pos, size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (size_t i = pos; i < pos + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
      v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
  };
  int year, month, day, hour, minute, second;
  if (!digits(0, 4, year) || s.size() < 19 || s[4] != '-' || !digits(5, 2, month) || s[7] != '-' ||
      !digits(8, 2, day) || (s[10] != 'T' && s[10] != ' ') || !digits(11, 2, hour) || s[13] != ':' ||
      !digits(14, 2, minute) || s[16] != ':' || !digits(17, 2, second)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year(year), std::chrono::month(static_cast<unsigned>(month)),
                     std::chrono::day(static_cast<unsigned>(day))};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) return std::nullopt;
  double fraction = 0.0;
  size_t pos = 19;
  if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
    size_t begin = ++pos;
    double scale = 0.1;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      fraction += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == begin) return std::nullopt;
  }
  int offset_seconds = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int sign = s[pos] == '+' ? 1 : -1;
      int oh, om = 0;
      if (!digits(pos + 1, 2, oh)) return std::nullopt;
      pos += 3;
      if (pos < s.size() && s[pos] == ':') ++pos;
      if (pos < s.size()) {
        if (!digits(pos, 2, om)) return std::nullopt;
        pos += 2;
      }
      offset_seconds = sign * (oh * 3600 + om * 60);
    }
  }
  if (pos != s.size()) return std::nullopt;
  auto days = sys_days(ymd).time_since_epoch().count();
  double whole = static_cast<double>(days) * 86400.0 + hour * 3600 + minute * 60 + second - offset_seconds;
  return whole + fraction;
}

LoadResult parse_flow_csv(std::string_view text, const CsvSchema& schema) {
  LoadResult result;
  std::vector<std::string_view> lines;
  for (size_t start = 0; start < text.size();) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  if (!lines.empty() && lines[0].size() >= 3 && static_cast<unsigned char>(lines[0][0]) == 0xEF) {
    lines[0].remove_prefix(3);  // UTF-8 BOM
  }
  if (lines.empty() || trim(lines[0]).empty()) return result;

  auto header = split_csv_line(lines[0]);
  std::map<std::string, size_t> column_index;
  for (size_t i = 0; i < header.size(); ++i) column_index.emplace(header[i], i);

  std::map<std::string, size_t> field_col;
  for (const auto& field : CsvSchema::required_fields()) {
    auto mapped = schema.columns.find(field);
    std::string column = mapped == schema.columns.end() ? field : mapped->second;
    auto it = column_index.find(column);
    if (it == column_index.end()) {
      throw SchemaError("missing column '" + column + "' (field " + field + ")");
    }
    field_col[field] = it->second;
  }
  for (const auto& field : CsvSchema::optional_fields()) {
    auto mapped = schema.columns.find(field);
    if (mapped == schema.columns.end()) continue;
    auto it = column_index.find(mapped->second);
    if (it != column_index.end()) field_col[field] = it->second;
  }

  std::map<std::string, std::optional<TimeFormat>> time_format = {{"start_time", std::nullopt},
                                                                   {"end_time", std::nullopt}};
  std::unordered_map<uint64_t, size_t> seen_ids;
  std::vector<FlowRecord> records;

  for (size_t li = 1; li < lines.size(); ++li) {
    const size_t line_no = li + 1;
    if (trim(lines[li]).empty()) continue;
    auto fields = split_csv_line(lines[li]);
    auto reject = [&](std::string message) {
      ++result.rejected;
      result.diagnostics.push_back({line_no, std::move(message)});
    };
    if (fields.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    auto get = [&](const std::string& field) -> const std::string& { return fields[field_col.at(field)]; };

    FlowRecord r;
    std::string error;
    for (const char* field : {"start_time", "end_time"}) {
      const std::string& value = get(field);
      auto& format = time_format[field];
      if (!format) format = parse_epoch(value) ? TimeFormat::Epoch : TimeFormat::Iso8601;
      auto parsed = *format == TimeFormat::Epoch ? parse_epoch(value) : parse_iso8601(value);
      if (!parsed) {
        error = std::string("unparseable timestamp in ") + field + ": '" + value + "'";
        break;
      }
      (std::string_view(field) == "start_time" ? r.start_time : r.end_time) = *parsed;
    }
    if (!error.empty()) {
      reject(error);
      continue;
    }
    r.src_ip = get("src_ip");
    r.dst_ip = get("dst_ip");
    auto numeric = [&](const char* field, uint64_t max_value, auto& out) {
      if (!error.empty()) return;
      if (!parse_unsigned(get(field), max_value, out)) {
        error = std::string("invalid ") + field + ": '" + get(field) + "'";
      }
    };
    numeric("src_port", 65535, r.src_port);
    numeric("dst_port", 65535, r.dst_port);
    numeric("protocol", 255, r.protocol);
    numeric("in_bytes", UINT64_MAX, r.in_bytes);
    numeric("out_bytes", UINT64_MAX, r.out_bytes);
    numeric("in_pkts", UINT64_MAX, r.in_pkts);
    numeric("out_pkts", UINT64_MAX, r.out_pkts);
    numeric("tcp_flags", 255, r.tcp_flags);
    if (field_col.count("flow_id")) {
      numeric("flow_id", UINT64_MAX, r.flow_id);
    } else {
      r.flow_id = li;
    }
    if (!error.empty()) {
      reject(error);
      continue;
    }
    r.duration = r.end_time - r.start_time;
    if (field_col.count("duration")) {
      auto d = parse_epoch(get("duration"));
      if (!d) {
        reject("invalid duration: '" + get("duration") + "'");
        continue;
      }
      r.duration = *d;
    }
    if (field_col.count("attack")) {
      const std::string& name = get("attack");
      r.attack_name = LabelVocabulary::is_benign_alias(name) ? std::string(kBenignClass) : name;
    }
    if (std::string violation = validate_record(r); !violation.empty()) {
      reject(violation);
      continue;
    }
    if (auto [it, inserted] = seen_ids.emplace(r.flow_id, line_no); !inserted) {
      reject("duplicate flow_id " + std::to_string(r.flow_id) + " (first seen on line " +
             std::to_string(it->second) + ")");
      continue;
    }
    records.push_back(std::move(r));
  }

  sort_flows(records);
  result.vocabulary = LabelVocabulary::from_records(records);
  result.vocabulary.assign(records);
  result.accepted = records.size();
  result.records = std::move(records);
  return result;
}

LoadResult load_flow_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_flow_csv(buffer.str(), schema);
}

std::string to_canonical_csv(std::span<const FlowRecord> records) {
  std::ostringstream out;
  out << "flow_id,start_time,end_time,src_ip,dst_ip,src_port,dst_port,protocol,in_bytes,out_bytes,"
         "in_pkts,out_pkts,tcp_flags,duration,attack\n";
  for (const auto& r : records) {
    out << r.flow_id << ',' << format_double(r.start_time) << ',' << format_double(r.end_time) << ','
        << csv_quote(r.src_ip) << ',' << csv_quote(r.dst_ip) << ',' << r.src_port << ',' << r.dst_port << ','
        << static_cast<int>(r.protocol) << ',' << r.in_bytes << ',' << r.out_bytes << ',' << r.in_pkts << ','
        << r.out_pkts << ',' << static_cast<int>(r.tcp_flags) << ',' << format_double(r.duration) << ','
        << csv_quote(r.attack_name.value_or("")) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Binary flow cache

namespace {

constexpr char kFlowMagic[4] = {'P', 'P', 'T', 'F'};
constexpr uint32_t kNoString = 0xFFFFFFFFu;

class ByteWriter {
 public:
  void bytes(const void* data, size_t n) { out_.append(static_cast<const char*>(data), n); }
  template <typename T>
  void le(T value) {
    using U = std::make_unsigned_t<T>;
    U bits = static_cast<U>(value);
    for (size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  void f64(double value) { le(std::bit_cast<uint64_t>(value)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  template <typename T>
  T le() {
    need(sizeof(T));
    std::make_unsigned_t<T> bits = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(bits);
  }
  double f64() { return std::bit_cast<double>(le<uint64_t>()); }
  std::string_view take(size_t n) {
    need(n);
    auto view = bytes_.substr(pos_, n);
    pos_ += n;
    return view;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("flow cache truncated");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string encode_flow_cache(std::span<const FlowRecord> records) {
  std::vector<std::string> strings;
  std::unordered_map<std::string, uint32_t> string_index;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = string_index.emplace(s, static_cast<uint32_t>(strings.size()));
    if (inserted) strings.push_back(s);
    return it->second;
  };
  for (const auto& r : records) {
    intern(r.src_ip);
    intern(r.dst_ip);
    if (r.attack_name) intern(*r.attack_name);
  }

  ByteWriter w;
  w.bytes(kFlowMagic, 4);
  w.le<uint32_t>(kFlowCacheVersion);
  w.le<uint64_t>(records.size());
  w.le<uint64_t>(strings.size());
  for (const auto& s : strings) {
    w.le<uint32_t>(static_cast<uint32_t>(s.size()));
    w.bytes(s.data(), s.size());
  }
  for (const auto& r : records) {
    w.le<uint64_t>(r.flow_id);
    w.f64(r.start_time);
    w.f64(r.end_time);
    w.f64(r.duration);
    w.le<uint32_t>(string_index.at(r.src_ip));
    w.le<uint32_t>(string_index.at(r.dst_ip));
    w.le<uint16_t>(r.src_port);
    w.le<uint16_t>(r.dst_port);
    w.le<uint8_t>(r.protocol);
    w.le<uint8_t>(r.tcp_flags);
    w.le<uint16_t>(0);
    w.le<uint64_t>(r.in_bytes);
    w.le<uint64_t>(r.out_bytes);
    w.le<uint64_t>(r.in_pkts);
    w.le<uint64_t>(r.out_pkts);
    w.le<int32_t>(r.label);
    w.le<uint32_t>(r.attack_name ? string_index.at(*r.attack_name) : kNoString);
  }
  return w.take();
}

std::vector<FlowRecord> decode_flow_cache(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.take(4) != std::string_view(kFlowMagic, 4)) throw FormatError("not a flow cache (bad magic)");
  uint32_t version = r.le<uint32_t>();
  if (version != kFlowCacheVersion) {
    throw FormatError("unsupported flow cache version " + std::to_string(version));
  }
  uint64_t count = r.le<uint64_t>();
  uint64_t string_count = r.le<uint64_t>();
  std::vector<std::string> strings;
  strings.reserve(string_count);
  for (uint64_t i = 0; i < string_count; ++i) strings.emplace_back(r.take(r.le<uint32_t>()));
  auto lookup = [&](uint32_t index) -> const std::string& {
    if (index >= strings.size()) throw FormatError("flow cache string index out of range");
    return strings[index];
  };
  std::vector<FlowRecord> records;
  records.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    FlowRecord f;
    f.flow_id = r.le<uint64_t>();
    f.start_time = r.f64();
    f.end_time = r.f64();
    f.duration = r.f64();
    f.src_ip = lookup(r.le<uint32_t>());
    f.dst_ip = lookup(r.le<uint32_t>());
    f.src_port = r.le<uint16_t>();
    f.dst_port = r.le<uint16_t>();
    f.protocol = r.le<uint8_t>();
    f.tcp_flags = r.le<uint8_t>();
    r.le<uint16_t>();
    f.in_bytes = r.le<uint64_t>();
    f.out_bytes = r.le<uint64_t>();
    f.in_pkts = r.le<uint64_t>();
    f.out_pkts = r.le<uint64_t>();
    f.label = r.le<int32_t>();
    uint32_t attack = r.le<uint32_t>();
    if (attack != kNoString) f.attack_name = lookup(attack);
    records.push_back(std::move(f));
  }
  if (!r.done()) throw FormatError("trailing bytes after flow cache records");
  return records;
}

void write_flow_cache(const std::string& path, std::span<const FlowRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  std::string bytes = encode_flow_cache(records);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<FlowRecord> read_flow_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return decode_flow_cache(buffer.str());
}

// ---------------------------------------------------------------------------
// FeatureCodec

double numeric_feature(const FlowRecord& r, size_t index) {
  switch (index) {
    case 0: return static_cast<double>(r.in_bytes);
    case 1: return static_cast<double>(r.out_bytes);
    case 2: return static_cast<double>(r.in_pkts);
    case 3: return static_cast<double>(r.out_pkts);
    case 4: return r.duration;
    case 5: return static_cast<double>(r.src_port);
    case 6: return static_cast<double>(r.dst_port);
  }
  throw std::out_of_range("numeric feature index");
}

FeatureCodec fit_codec(std::span<const FlowRecord> records, const CodecOptions& options) {
  if (records.empty()) throw EmptyDataError("cannot fit codec on empty split");
  FeatureCodec codec;
  const double n = static_cast<double>(records.size());
  for (size_t k = 0; k < kNumericFeatures.size(); ++k) {
    double sum = 0.0;
    for (const auto& r : records) sum += numeric_feature(r, k);
    double mean = sum / n;
    double sq = 0.0;
    for (const auto& r : records) {
      double d = numeric_feature(r, k) - mean;
      sq += d * d;
    }
    codec.numeric_stats[k] = {mean, std::max(std::sqrt(sq / n), kMinStd)};
  }
  if (options.protocol_vocab) {
    codec.protocol_vocab = *options.protocol_vocab;
    std::sort(codec.protocol_vocab.begin(), codec.protocol_vocab.end());
    codec.protocol_vocab.erase(std::unique(codec.protocol_vocab.begin(), codec.protocol_vocab.end()),
                               codec.protocol_vocab.end());
  } else {
    std::array<bool, 256> seen{};
    for (const auto& r : records) seen[r.protocol] = true;
    for (size_t p = 0; p < seen.size(); ++p) {
      if (seen[p]) codec.protocol_vocab.push_back(static_cast<uint8_t>(p));
    }
  }
  return codec;
}

void encode_flow_into(const FlowRecord& record, const FeatureCodec& codec, std::span<double> out) {
  if (out.size() != codec.feature_dim()) throw std::invalid_argument("encode_flow_into: wrong output size");
  std::fill(out.begin(), out.end(), 0.0);
  size_t pos = 0;
  for (size_t k = 0; k < kNumericFeatures.size(); ++k, ++pos) {
    const auto& stat = codec.numeric_stats[k];
    out[pos] = (numeric_feature(record, k) - stat.mean) / stat.std;
  }
  auto it = std::lower_bound(codec.protocol_vocab.begin(), codec.protocol_vocab.end(), record.protocol);
  if (it != codec.protocol_vocab.end() && *it == record.protocol) {
    out[pos + static_cast<size_t>(it - codec.protocol_vocab.begin())] = 1.0;
  }
  pos += codec.protocol_vocab.size();
  for (size_t bit = 0; bit < kFlagBits; ++bit) out[pos + bit] = (record.tcp_flags >> bit) & 1u;
}

std::vector<double> encode_flow(const FlowRecord& record, const FeatureCodec& codec) {
  std::vector<double> out(codec.feature_dim());
  encode_flow_into(record, codec, out);
  return out;
}

std::string FeatureCodec::serialize() const {
  KeyValueConfig kv;
  for (size_t k = 0; k < kNumericFeatures.size(); ++k) {
    std::string name(kNumericFeatures[k]);
    kv.set("numeric." + name + ".mean", numeric_stats[k].mean);
    kv.set("numeric." + name + ".std", numeric_stats[k].std);
  }
  std::string protocols;
  for (size_t i = 0; i < protocol_vocab.size(); ++i) {
    if (i) protocols += ',';
    protocols += std::to_string(protocol_vocab[i]);
  }
  kv.set("protocol_vocab", protocols);
  kv.set("feature_dim", static_cast<int64_t>(feature_dim()));
  return kv.serialize();
}

FeatureCodec FeatureCodec::parse(std::string_view text) {
  auto kv = KeyValueConfig::parse(text);
  FeatureCodec codec;
  for (size_t k = 0; k < kNumericFeatures.size(); ++k) {
    std::string name(kNumericFeatures[k]);
    codec.numeric_stats[k] = {kv.get_double("numeric." + name + ".mean"), kv.get_double("numeric." + name + ".std")};
  }
  std::string protocols = kv.require("protocol_vocab");
  if (!protocols.empty()) {
    for (const auto& p : split(protocols, ',')) {
      int value = std::stoi(p);
      if (value < 0 || value > 255) throw FormatError("protocol out of range in codec");
      codec.protocol_vocab.push_back(static_cast<uint8_t>(value));
    }
  }
  if (kv.contains("feature_dim") && static_cast<size_t>(kv.get_int("feature_dim")) != codec.feature_dim()) {
    throw FormatError("codec feature_dim inconsistent with protocol vocabulary");
  }
  return codec;
}

uint64_t FeatureCodec::hash() const { return fnv1a64(serialize()); }

}  // namespace pptgnn
