#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pptgnn/flow_ingest.hpp"
#include "pptgnn/kv_config.hpp"
#include "pptgnn/model.hpp"
#include "pptgnn/tensor.hpp"
#include "pptgnn/window_builder.hpp"

namespace pptgnn {

// "PPTG" checkpoint, little-endian; byte layout in docs/checkpoint-format.md.
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  KeyValueConfig metadata;
  ParameterSet params;

  ModelConfig model_config() const { return ModelConfig::from_kv(metadata.section("model.")); }
  GraphBuildConfig graph_config() const { return GraphBuildConfig::from_kv(metadata.section("graph.")); }
  FeatureCodec codec() const;
  LabelVocabulary vocabulary() const;
};

/// Metadata block shared by every checkpoint writer: model.*, graph.*,
/// codec.* (with codec.hash) and vocab.classes.
KeyValueConfig checkpoint_metadata(const ModelConfig& model, const GraphBuildConfig& graph, const FeatureCodec& codec,
                                   const LabelVocabulary& vocab);

std::string encode_checkpoint(const ParameterSet& params, const KeyValueConfig& metadata);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::string& path, const ParameterSet& params, const KeyValueConfig& metadata);
Checkpoint load_checkpoint(const std::string& path);

// Shapes init_parameters() would produce for `config`.
std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> expected_shapes(const ModelConfig& config);

/// Throws CompatibilityError when a tensor named by the config is missing or
/// has the wrong shape, or when the data's feature_dim differs from the
/// checkpoint's. Extra tensors (pre-training scorers) are allowed.
void check_compatible(const Checkpoint& checkpoint, size_t data_feature_dim);

}  // namespace pptgnn
