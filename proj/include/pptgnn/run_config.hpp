#pragma once

#include <map>
#include <string>
#include <string_view>

#include "pptgnn/experiments.hpp"
#include "pptgnn/kv_config.hpp"
#include "pptgnn/model.hpp"
#include "pptgnn/pretrain.hpp"
#include "pptgnn/trainer.hpp"
#include "pptgnn/window_builder.hpp"

namespace pptgnn {

/// Every setting of one CLI run with the place its value came from. Flags
/// override the config file, the file overrides the environment (seed only)
/// and the environment overrides built-in defaults.
class RunConfig {
 public:
  enum class Source { Default, Environment, File, Flag };

  void define(const std::string& key, std::string value);
  // Unknown keys are a ConfigError so typos do not pass silently.
  void apply_file(const KeyValueConfig& file);
  void apply(const std::string& key, std::string value, Source source);

  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const { return values_.get_double(key); }
  int64_t get_int(const std::string& key) const { return values_.get_int(key); }
  size_t get_size(const std::string& key) const;
  bool get_bool(const std::string& key) const { return values_.get_bool(key); }
  uint64_t seed() const;
  Source source(const std::string& key) const { return sources_.at(key); }

  const KeyValueConfig& values() const { return values_; }
  std::string provenance_text() const;

  GraphBuildConfig graph() const;
  ModelConfig model() const;  // feature_dim and num_classes are left for the data to fill in
  SplitRatios split() const;
  TrainConfig train() const;
  PretrainConfig pretrain() const;
  FewShotPlan fewshot_plan() const;
  TrainConfig fewshot_finetune() const;
  TrainConfig fewshot_reference() const;

  // run_config.txt (loadable with --config) and run_config_provenance.txt.
  void write(const std::string& directory) const;

 private:
  KeyValueConfig values_;
  std::map<std::string, Source> sources_;
};

std::string_view source_name(RunConfig::Source source);

/// Defaults for one subcommand. train: lr 0.001, 200 epochs; finetune: lr
/// 0.01, 50 epochs; pretrain: lr 0.0001 with 5 s windows and memory 5.
RunConfig default_run_config(std::string_view command);

}  // namespace pptgnn
