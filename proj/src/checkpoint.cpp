#include "pptgnn/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "pptgnn/errors.hpp"

namespace pptgnn {

namespace {

constexpr char kMagic[4] = {'P', 'P', 'T', 'G'};
constexpr uint8_t kDtypeF64 = 1;
constexpr uint8_t kDtypeF32 = 2;

template <typename T>
void put(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view b) : bytes_(b) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    std::make_unsigned_t<T> bits = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(bits);
  }
  std::string_view take(size_t n) {
    need(n);
    auto v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint truncated");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

FeatureCodec Checkpoint::codec() const {
  KeyValueConfig section = metadata.section("codec.");
  KeyValueConfig body;
  for (const auto& [k, v] : section.entries()) {
    if (k != "hash") body.set(k, v);
  }
  FeatureCodec c = FeatureCodec::parse(body.serialize());
  if (auto stored = metadata.get("codec.hash"); stored && *stored != std::to_string(c.hash())) {
    throw CompatibilityError("checkpoint codec hash mismatch");
  }
  return c;
}

LabelVocabulary Checkpoint::vocabulary() const { return LabelVocabulary::parse(metadata.require("vocab.classes")); }

KeyValueConfig checkpoint_metadata(const ModelConfig& model, const GraphBuildConfig& graph, const FeatureCodec& codec,
                                   const LabelVocabulary& vocab) {
  KeyValueConfig kv;
  kv.merge(model.to_kv(), "model.");
  kv.merge(graph.to_kv(), "graph.");
  kv.merge(KeyValueConfig::parse(codec.serialize()), "codec.");
  kv.set("codec.hash", std::to_string(codec.hash()));
  kv.set("vocab.classes", vocab.serialize());
  return kv;
}

std::string encode_checkpoint(const ParameterSet& params, const KeyValueConfig& metadata) {
  std::string out(kMagic, 4);
  put<uint32_t>(out, kCheckpointVersion);
  const std::string meta = metadata.serialize();
  put<uint64_t>(out, meta.size());
  out += meta;
  put<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    if (name.size() > UINT16_MAX) throw FormatError("tensor name too long");
    put<uint16_t>(out, static_cast<uint16_t>(name.size()));
    out += name;
    put<uint8_t>(out, kDtypeF64);
    put<uint8_t>(out, 2);
    put<uint64_t>(out, static_cast<uint64_t>(t.rows()));
    put<uint64_t>(out, static_cast<uint64_t>(t.cols()));
    for (Eigen::Index i = 0; i < t.size(); ++i) put<uint64_t>(out, std::bit_cast<uint64_t>(t.data()[i]));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4) != std::string_view(kMagic, 4)) throw FormatError("not a checkpoint (bad magic)");
  const auto version = r.get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw CompatibilityError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  ck.metadata = KeyValueConfig::parse(r.take(r.get<uint64_t>()));
  const auto count = r.get<uint32_t>();
  for (uint32_t i = 0; i < count; ++i) {
    std::string name(r.take(r.get<uint16_t>()));
    const auto dtype = r.get<uint8_t>();
    const auto rank = r.get<uint8_t>();
    std::vector<uint64_t> dims(rank);
    for (auto& d : dims) d = r.get<uint64_t>();
    Eigen::Index rows = rank >= 1 ? static_cast<Eigen::Index>(dims[0]) : 1;
    Eigen::Index cols = 1;
    for (size_t k = 1; k < dims.size(); ++k) cols *= static_cast<Eigen::Index>(dims[k]);
    Tensor t(rows, cols);
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      if (dtype == kDtypeF64) {
        t.data()[k] = std::bit_cast<double>(r.get<uint64_t>());
      } else if (dtype == kDtypeF32) {
        t.data()[k] = std::bit_cast<float>(r.get<uint32_t>());
      } else {
        throw FormatError("tensor '" + name + "' has unknown dtype tag " + std::to_string(dtype));
      }
    }
    if (!ck.params.emplace(std::move(name), std::move(t)).second) throw FormatError("duplicate tensor name");
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint tensors");
  return ck;
}

void save_checkpoint(const std::string& path, const ParameterSet& params, const KeyValueConfig& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  const std::string bytes = encode_checkpoint(params, metadata);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return decode_checkpoint(buffer.str());
}

std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> expected_shapes(const ModelConfig& config) {
  Rng rng(0);
  std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> shapes;
  for (const auto& [name, t] : init_parameters(config, rng)) shapes[name] = {t.rows(), t.cols()};
  return shapes;
}

void check_compatible(const Checkpoint& checkpoint, size_t data_feature_dim) {
  const ModelConfig config = checkpoint.model_config();
  if (config.feature_dim != data_feature_dim) {
    throw CompatibilityError("checkpoint feature_dim " + std::to_string(config.feature_dim) +
                             " does not match data feature_dim " + std::to_string(data_feature_dim));
  }
  std::string problems;
  for (const auto& [name, shape] : expected_shapes(config)) {
    auto it = checkpoint.params.find(name);
    if (it == checkpoint.params.end()) {
      problems += " " + name + " (missing)";
    } else if (it->second.rows() != shape.first || it->second.cols() != shape.second) {
      problems += " " + name + " (" + std::to_string(it->second.rows()) + "x" + std::to_string(it->second.cols()) +
                  ", expected " + std::to_string(shape.first) + "x" + std::to_string(shape.second) + ")";
    }
  }
  if (!problems.empty()) throw CompatibilityError("checkpoint tensors do not match model config:" + problems);
}

}  // namespace pptgnn
