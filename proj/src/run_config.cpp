#include "pptgnn/run_config.hpp"

#include <filesystem>

#include "pptgnn/errors.hpp"
#include "pptgnn/report.hpp"

namespace pptgnn {

std::string_view source_name(RunConfig::Source source) {
  switch (source) {
    case RunConfig::Source::Default: return "default";
    case RunConfig::Source::Environment: return "env";
    case RunConfig::Source::File: return "file";
    case RunConfig::Source::Flag: return "flag";
  }
  return "?";
}

void RunConfig::define(const std::string& key, std::string value) {
  values_.set(key, std::move(value));
  sources_[key] = Source::Default;
}

void RunConfig::apply_file(const KeyValueConfig& file) {
  for (const auto& [key, value] : file.entries()) apply(key, value, Source::File);
}

void RunConfig::apply(const std::string& key, std::string value, Source source) {
  if (!sources_.count(key)) throw ConfigError("unknown config key '" + key + "'");
  values_.set(key, std::move(value));
  sources_[key] = source;
}

std::string RunConfig::get(const std::string& key) const { return values_.require(key); }

size_t RunConfig::get_size(const std::string& key) const {
  const int64_t v = get_int(key);
  if (v < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<size_t>(v);
}

uint64_t RunConfig::seed() const {
  const int64_t v = get_int("seed");
  if (v < 0) throw ConfigError("seed must be non-negative");
  return static_cast<uint64_t>(v);
}

std::string RunConfig::provenance_text() const {
  std::string out;
  for (const auto& [key, source] : sources_) out += key + " = " + std::string(source_name(source)) + "\n";
  return out;
}

GraphBuildConfig RunConfig::graph() const {
  GraphBuildConfig c = GraphBuildConfig::from_kv(values_.section("graph."));
  c.validate();
  return c;
}

ModelConfig RunConfig::model() const {
  ModelConfig c = ModelConfig::from_kv(values_.section("model."));
  const GraphBuildConfig g = graph();
  c.flow_encoding_dim = g.flow_encoding_dim;
  c.window_encoding_dim = g.window_encoding_dim;
  return c;
}

SplitRatios RunConfig::split() const {
  return {get_double("split.train"), get_double("split.val"), get_double("split.test")};
}

TrainConfig RunConfig::train() const {
  TrainConfig t;
  t.epochs = get_size("train.epochs");
  t.learning_rate = get_double("train.learning_rate");
  t.weighted_loss = get_bool("train.weighted_loss");
  t.batch_size = get_size("train.batch_size");
  t.seed = seed();
  return t;
}

PretrainConfig RunConfig::pretrain() const {
  PretrainConfig p;
  p.epochs = get_size("pretrain.epochs");
  p.learning_rate = get_double("pretrain.learning_rate");
  p.negative_ratio = get_double("pretrain.negative_ratio");
  p.batch_size = get_size("pretrain.batch_size");
  p.seed = seed();
  return p;
}

FewShotPlan RunConfig::fewshot_plan() const {
  FewShotPlan plan;
  plan.fractions.clear();
  for (const auto& f : pptgnn::split(get("fewshot.fractions"), ',')) plan.fractions.push_back(parse_double(f));
  plan.modes.clear();
  for (const auto& m : pptgnn::split(get("fewshot.modes"), ',')) {
    std::string mode = trim(m);
    if (mode != "none") parse_pretrain_mode(mode);
    plan.modes.push_back(mode);
  }
  for (double f : plan.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fewshot.fractions must lie in (0, 1]");
  }
  return plan;
}

TrainConfig RunConfig::fewshot_finetune() const {
  TrainConfig t = train();
  t.epochs = get_size("fewshot.epochs");
  t.learning_rate = get_double("fewshot.learning_rate");
  return t;
}

TrainConfig RunConfig::fewshot_reference() const {
  TrainConfig t = train();
  t.epochs = get_size("fewshot.reference_epochs");
  t.learning_rate = get_double("fewshot.reference_learning_rate");
  return t;
}

void RunConfig::write(const std::string& directory) const {
  std::filesystem::create_directories(directory);
  write_text_file((std::filesystem::path(directory) / "run_config.txt").string(), values_.serialize());
  write_text_file((std::filesystem::path(directory) / "run_config_provenance.txt").string(), provenance_text());
}

RunConfig default_run_config(std::string_view command) {
  RunConfig rc;
  rc.define("seed", "0");
  rc.define("run.id", std::string(command));
  const KeyValueConfig gkv = GraphBuildConfig{}.to_kv();
  for (const auto& [k, v] : gkv.entries()) rc.define("graph." + k, v);
  const ModelConfig model;
  const KeyValueConfig mkv = model.to_kv();
  for (const char* key : {"num_layers", "hidden_size", "classifier_layers", "classifier_hidden",
                          "neighbor_aggregation", "edge_type_aggregation", "leaky_slope"}) {
    rc.define(std::string("model.") + key, mkv.require(key));
  }
  const SplitRatios ratios;
  rc.define("split.train", format_double(ratios.train));
  rc.define("split.val", format_double(ratios.val));
  rc.define("split.test", format_double(ratios.test));

  const bool finetune = command == "finetune";
  rc.define("train.epochs", finetune ? "50" : "200");
  rc.define("train.learning_rate", finetune ? "0.01" : "0.001");
  rc.define("train.weighted_loss", "true");
  rc.define("train.batch_size", "8");

  const PretrainConfig pre;
  rc.define("pretrain.epochs", std::to_string(pre.epochs));
  rc.define("pretrain.learning_rate", "0.0001");
  rc.define("pretrain.negative_ratio", format_double(pre.negative_ratio));
  rc.define("pretrain.batch_size", std::to_string(pre.batch_size));

  rc.define("fewshot.fractions", "0.05,0.1,0.2,0.5");
  rc.define("fewshot.modes", "none,in-context");
  rc.define("fewshot.epochs", "50");
  rc.define("fewshot.learning_rate", "0.01");
  rc.define("fewshot.reference_epochs", "200");
  rc.define("fewshot.reference_learning_rate", "0.001");

  rc.define("finetune.fraction", "1");
  rc.define("evaluate.split", "all");
  rc.define("codec.protocols", "");

  rc.define("data.input", "");
  rc.define("data.schema", "");
  rc.define("data.checkpoint", "");
  rc.define("data.corpus", "");

  if (const char* env = std::getenv("PPT_SEED"); env && *env) rc.apply("seed", env, RunConfig::Source::Environment);
  return rc;
}

}  // namespace pptgnn
