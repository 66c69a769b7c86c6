#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "pptgnn/checkpoint.hpp"
#include "pptgnn/errors.hpp"
#include "pptgnn/experiments.hpp"
#include "pptgnn/flow_ingest.hpp"
#include "pptgnn/report.hpp"
#include "pptgnn/run_config.hpp"
#include "pptgnn/synthetic.hpp"

namespace fs = std::filesystem;
using namespace pptgnn;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCompatibility = 3;
constexpr int kExitEmpty = 4;

struct Flags {
  std::string config;
  std::string out_dir = ".";
  std::optional<uint64_t> seed;
  std::optional<std::string> run_id;
  std::optional<std::string> input;
  std::optional<std::string> schema;
  std::optional<std::string> checkpoint;
  std::optional<std::string> corpus;
  std::optional<size_t> epochs;
  std::optional<double> lr;
  std::optional<double> window_size;
  std::optional<size_t> window_memory;
  std::optional<size_t> flow_memory;
  std::optional<size_t> hidden;
  std::optional<size_t> layers;
  std::optional<size_t> batch_size;
  std::optional<std::string> aggregation;
  std::vector<std::string> sets;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool training) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--out-dir", f.out_dir, "directory for every output of the run");
  cmd->add_option("--seed", f.seed, "seed (falls back to PPT_SEED, then 0)");
  cmd->add_option("--run-id", f.run_id, "prefix for report file names");
  cmd->add_option("--input", f.input, "flow CSV or .pptf cache");
  cmd->add_option("--schema", f.schema, "CSV column mapping file (field = column)");
  cmd->add_option("--window-size", f.window_size, "window length in seconds");
  cmd->add_option("--window-memory", f.window_memory, "windows visible per prediction");
  cmd->add_option("--flow-memory", f.flow_memory, "max predecessors per intra-window chain");
  cmd->add_option("--set", f.sets, "override any config key: key=value")->allow_extra_args(false);
  if (!training) return;
  cmd->add_option("--epochs", f.epochs, "training epochs");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--hidden", f.hidden, "GNN and classifier hidden size");
  cmd->add_option("--layers", f.layers, "spatio-temporal layers");
  cmd->add_option("--batch-size", f.batch_size, "graphs per optimizer step (0 = all)");
  cmd->add_option("--aggregation", f.aggregation, "neighbor aggregation: sum, mean or max");
}

RunConfig resolve(std::string_view command, const Flags& f) {
  RunConfig rc = default_run_config(command);
  if (!f.config.empty()) rc.apply_file(KeyValueConfig::load(f.config));
  auto flag = [&](const std::string& key, const std::string& value) { rc.apply(key, value, RunConfig::Source::Flag); };
  const std::string prefix = command == "pretrain" ? "pretrain." : "train.";
  if (f.seed) flag("seed", std::to_string(*f.seed));
  if (f.run_id) flag("run.id", *f.run_id);
  if (f.input) flag("data.input", *f.input);
  if (f.schema) flag("data.schema", *f.schema);
  if (f.checkpoint) flag("data.checkpoint", *f.checkpoint);
  if (f.corpus) flag("data.corpus", *f.corpus);
  if (f.window_size) flag("graph.window_size", format_double(*f.window_size));
  if (f.window_memory) flag("graph.window_memory", std::to_string(*f.window_memory));
  if (f.flow_memory) flag("graph.flow_memory", std::to_string(*f.flow_memory));
  if (f.epochs) flag(prefix + "epochs", std::to_string(*f.epochs));
  if (f.lr) flag(prefix + "learning_rate", format_double(*f.lr));
  if (f.batch_size) flag(prefix + "batch_size", std::to_string(*f.batch_size));
  if (f.hidden) {
    flag("model.hidden_size", std::to_string(*f.hidden));
    flag("model.classifier_hidden", std::to_string(*f.hidden));
  }
  if (f.layers) flag("model.num_layers", std::to_string(*f.layers));
  if (f.aggregation) flag("model.neighbor_aggregation", *f.aggregation);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    flag(trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)));
  }
  // Validate everything up front so bad values fail before any work starts.
  rc.graph();
  rc.model();
  rc.split();
  rc.train();
  rc.pretrain();
  rc.fewshot_plan();
  return rc;
}

CodecOptions codec_options(const RunConfig& rc) {
  CodecOptions options;
  const std::string text = rc.get("codec.protocols");
  if (text.empty()) return options;
  std::vector<uint8_t> vocab;
  for (const auto& p : split(text, ',')) {
    const double v = parse_double(p);
    if (v < 0 || v > 255 || v != std::floor(v)) throw ConfigError("codec.protocols: bad protocol '" + p + "'");
    vocab.push_back(static_cast<uint8_t>(v));
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  options.protocol_vocab = vocab;
  return options;
}

struct LoadedFlows {
  std::vector<FlowRecord> records;
  LabelVocabulary vocab;
};

LoadedFlows load_flows(const std::string& path, const std::string& schema_path, bool verbose = false) {
  if (path.empty()) throw ConfigError("--input is required");
  LoadedFlows out;
  if (fs::path(path).extension() == ".pptf") {
    out.records = read_flow_cache(path);
    out.vocab = LabelVocabulary::from_records(out.records);
    out.vocab.assign(out.records);
    return out;
  }
  const CsvSchema schema = schema_path.empty() ? CsvSchema::canonical() : CsvSchema::from_text(read_text_file(schema_path));
  LoadResult r = load_flow_csv(path, schema);
  for (const auto& d : r.diagnostics) std::cerr << path << ":" << d.line << ": " << d.message << "\n";
  if (verbose || r.rejected) std::cout << "accepted " << r.accepted << " rejected " << r.rejected << "\n";
  out.records = std::move(r.records);
  out.vocab = std::move(r.vocabulary);
  return out;
}

std::string out_path(const RunConfig& rc, const std::string& dir, const std::string& kind,
                     const std::string& ext = "csv") {
  return (fs::path(dir) / report_file_name(rc.get("run.id"), rc.seed(), kind, ext)).string();
}

void write_report_set(const RunConfig& rc, const std::string& dir, const std::string& title, const MetricsReport& r) {
  write_text_file(out_path(rc, dir, "metrics"), metrics_csv({{title, r}}));
  write_text_file(out_path(rc, dir, "per_class"), per_class_csv(r));
  write_text_file(out_path(rc, dir, "confusion"), confusion_csv(r, false));
  write_text_file(out_path(rc, dir, "confusion_normalized"), confusion_csv(r, true));
  write_text_file(out_path(rc, dir, "summary", "txt"), summary_text(title, r));
}

std::string checkpoint_digest(const std::string& path) {
  return std::to_string(fnv1a64(read_text_file(path)));
}

void finish_run(const RunConfig& rc, const std::string& dir) { rc.write(dir); }

// ---------------------------------------------------------------------------

int cmd_ingest(const Flags& f, const std::string& output) {
  if (!f.input) throw ConfigError("--input is required");
  if (output.empty()) throw ConfigError("--out is required");
  LoadedFlows flows = load_flows(*f.input, f.schema.value_or(""), true);
  write_flow_cache(output, flows.records);
  std::cout << "wrote " << flows.records.size() << " records to " << output << "\n";
  return 0;
}

int cmd_build(const Flags& f) {
  const RunConfig rc = resolve("build", f);
  const LoadedFlows flows = load_flows(rc.get("data.input"), rc.get("data.schema"));
  const GraphBuildConfig graph = rc.graph();
  fs::create_directories(f.out_dir);
  std::string dump;
  if (!flows.records.empty()) {
    const FeatureCodec codec = fit_codec(flows.records, codec_options(rc));
    const auto snapshots = build_snapshots(flows.records, graph, &codec);
    for (const auto& g : assemble_all(snapshots, graph)) {
      dump += "graph target=" + std::to_string(g.target().window_index) + "\n" + dump_temporal_graph(g) + "\n";
    }
    std::cout << snapshots.size() << " windows\n";
  }
  write_text_file(out_path(rc, f.out_dir, "graphs", "txt"), dump);
  finish_run(rc, f.out_dir);
  return 0;
}

int cmd_train(const Flags& f) {
  const RunConfig rc = resolve("train", f);
  const LoadedFlows flows = load_flows(rc.get("data.input"), rc.get("data.schema"));
  ModelConfig model = rc.model();
  PreparedDataset data = prepare_dataset(flows.records, flows.vocab, rc.graph(), model, rc.split(), codec_options(rc));
  for (const auto& w : data.split.warnings) std::cerr << "warning: " << w << "\n";
  Rng rng(rc.seed());
  TrainResult result = train(data.train.compiled, data.val.compiled, init_parameters(model, rng), model, rc.train());
  MetricsReport report = evaluate(data.test.compiled, result.params, model, data.vocab);
  fs::create_directories(f.out_dir);
  KeyValueConfig meta = checkpoint_metadata(model, data.graph_config, data.codec, data.vocab);
  meta.set("provenance.kind", "scratch");
  meta.set("provenance.seed", std::to_string(rc.seed()));
  meta.set("provenance.best_epoch", std::to_string(result.best_epoch));
  save_checkpoint(out_path(rc, f.out_dir, "checkpoint", "pptg"), result.params, meta);
  write_text_file(out_path(rc, f.out_dir, "epochs"), epoch_log_csv(result.log));
  write_report_set(rc, f.out_dir, "train", report);
  write_text_file(out_path(rc, f.out_dir, "timing"), timing_csv({{"train", result.seconds}}));
  finish_run(rc, f.out_dir);
  std::cout << summary_text("test", report);
  return 0;
}

struct CorpusData {
  std::vector<CompiledGraph> graphs;
  KeyValueConfig manifest;
};

CorpusData load_corpus(const RunConfig& rc, const ModelConfig& base, ModelConfig& model) {
  PretrainCorpus corpus;
  if (const std::string path = rc.get("data.corpus"); !path.empty()) {
    corpus = PretrainCorpus::from_kv(KeyValueConfig::load(path));
    const fs::path dir = fs::path(path).parent_path();
    for (auto& d : corpus.datasets) {
      if (fs::path(d.path).is_relative()) d.path = (dir / d.path).string();
    }
  } else {
    const std::string input = rc.get("data.input");
    if (input.empty()) throw ConfigError("pretrain needs --input or --corpus");
    corpus.datasets.push_back({fs::path(input).stem().string(), input});
  }
  const GraphBuildConfig graph = rc.graph();
  CorpusData out;
  out.manifest = corpus.to_kv();
  model = base;
  std::optional<size_t> dim;
  for (const auto& entry : corpus.effective()) {
    LoadedFlows flows = load_flows(entry.path, rc.get("data.schema"));
    for (auto& r : flows.records) {
      r.label = kUnlabeled;
      r.attack_name.reset();
    }
    if (flows.records.empty()) continue;
    const FeatureCodec codec = fit_codec(flows.records, codec_options(rc));
    if (dim && *dim != codec.feature_dim()) {
      throw CompatibilityError("dataset '" + entry.id + "' has feature_dim " + std::to_string(codec.feature_dim()) +
                               " but earlier datasets have " + std::to_string(*dim) +
                               "; fix the protocol set with codec.protocols");
    }
    dim = codec.feature_dim();
    model.feature_dim = codec.feature_dim();
    out.manifest.set("codec_hash." + entry.id, std::to_string(codec.hash()));
    const auto snapshots = build_snapshots(flows.records, graph, &codec);
    for (const auto& g : assemble_all(snapshots, graph)) out.graphs.push_back(compile_graph(g, model, false));
  }
  if (out.graphs.empty()) throw EmptyDataError("pre-training corpus is empty");
  return out;
}

int cmd_pretrain(const Flags& f) {
  const RunConfig rc = resolve("pretrain", f);
  ModelConfig model;
  ModelConfig base = rc.model();
  base.num_classes = 2;
  CorpusData corpus = load_corpus(rc, base, model);
  PretrainResult result = pretrain(corpus.graphs, model, rc.pretrain());
  fs::create_directories(f.out_dir);
  KeyValueConfig meta;
  meta.merge(model.to_kv(), "model.");
  meta.merge(rc.graph().to_kv(), "graph.");
  meta.merge(corpus.manifest, "corpus.");
  meta.set("provenance.kind", "pretrain");
  meta.set("provenance.seed", std::to_string(rc.seed()));
  save_checkpoint(out_path(rc, f.out_dir, "checkpoint", "pptg"), result.params, meta);
  write_text_file(out_path(rc, f.out_dir, "pretrain_log"), pretrain_log_csv(result.log));
  write_text_file(out_path(rc, f.out_dir, "timing"), timing_csv({{"pretrain", result.seconds}}));
  finish_run(rc, f.out_dir);
  const auto& last = result.log.back();
  std::printf("pretrained on %zu graphs: loss %.4f link accuracy %.4f\n", corpus.graphs.size(), last.loss,
              last.accuracy);
  return 0;
}

int cmd_finetune(const Flags& f) {
  if (!f.checkpoint) {
    std::cerr << "finetune requires --from-checkpoint\n";
    return kExitUsage;
  }
  const RunConfig rc = resolve("finetune", f);
  const Checkpoint source = load_checkpoint(rc.get("data.checkpoint"));
  const LoadedFlows flows = load_flows(rc.get("data.input"), rc.get("data.schema"));
  ModelConfig model = source.model_config();
  const GraphBuildConfig graph = rc.graph();
  const size_t source_dim = model.feature_dim;
  PreparedDataset data = prepare_dataset(flows.records, flows.vocab, graph, model, rc.split(), codec_options(rc));
  if (model.feature_dim != source_dim) {
    throw CompatibilityError("checkpoint feature_dim " + std::to_string(source_dim) + " does not match data feature_dim " +
                             std::to_string(model.feature_dim));
  }
  Rng rng(rc.seed());
  ParameterSet start = transfer_weights(source.params, model, rng);

  const double fraction = rc.get_double("finetune.fraction");
  std::vector<CompiledGraph> subset = data.train.compiled;
  if (fraction < 1.0) {
    const WindowSelection sel = undersample_windows(data.train.compiled, model.num_classes, fraction, rc.seed());
    if (sel.balance_violation) {
      std::cerr << "warning: class balance off by " << sel.max_deviation << " at fraction " << fraction << "\n";
    }
    subset.clear();
    for (size_t w : sel.windows) subset.push_back(data.train.compiled[w]);
  }
  TrainResult result = train(subset, data.val.compiled, std::move(start), model, rc.train());
  MetricsReport report = evaluate(data.test.compiled, result.params, model, data.vocab);
  fs::create_directories(f.out_dir);
  KeyValueConfig meta = checkpoint_metadata(model, graph, data.codec, data.vocab);
  meta.set("provenance.kind", "finetune");
  meta.set("provenance.seed", std::to_string(rc.seed()));
  meta.set("provenance.source_digest", checkpoint_digest(rc.get("data.checkpoint")));
  meta.set("provenance.fraction", format_double(fraction));
  meta.merge(source.metadata.section("corpus."), "provenance.corpus.");
  save_checkpoint(out_path(rc, f.out_dir, "checkpoint", "pptg"), result.params, meta);
  write_text_file(out_path(rc, f.out_dir, "epochs"), epoch_log_csv(result.log));
  write_report_set(rc, f.out_dir, "finetune", report);
  write_text_file(out_path(rc, f.out_dir, "timing"), timing_csv({{"finetune", result.seconds}}));
  finish_run(rc, f.out_dir);
  std::cout << summary_text("test", report);
  return 0;
}

int cmd_evaluate(const Flags& f) {
  if (!f.checkpoint) throw ConfigError("evaluate requires --from-checkpoint");
  const RunConfig rc = resolve("evaluate", f);
  const Checkpoint ck = load_checkpoint(rc.get("data.checkpoint"));
  const FeatureCodec codec = ck.codec();
  check_compatible(ck, codec.feature_dim());
  const ModelConfig model = ck.model_config();
  const GraphBuildConfig graph = ck.graph_config();
  const LabelVocabulary vocab = ck.vocabulary();

  LoadedFlows flows = load_flows(rc.get("data.input"), rc.get("data.schema"));
  for (auto& r : flows.records) {
    if (!r.attack_name) continue;
    const auto idx = LabelVocabulary::is_benign_alias(*r.attack_name) ? std::optional<int32_t>(0)
                                                                       : vocab.index_of(*r.attack_name);
    if (!idx) throw CompatibilityError("class '" + *r.attack_name + "' is not in the checkpoint vocabulary");
    r.label = *idx;
  }
  std::vector<CompiledGraph> graphs;
  const std::string which = rc.get("evaluate.split");
  if (which == "all") {
    if (!flows.records.empty()) {
      graphs = build_split_graphs(flows.records, default_window_range(flows.records, graph.window_size), graph, codec,
                                  model)
                   .compiled;
    }
  } else if (which == "test") {
    const FlowSplit split = chronological_split(flows.records, graph.window_size, rc.split());
    graphs = build_split_graphs(split.test(), split.ranges[2], graph, codec, model).compiled;
  } else {
    throw ConfigError("evaluate.split must be 'test' or 'all'");
  }
  const MetricsReport report = evaluate(graphs, ck.params, model, vocab);
  fs::create_directories(f.out_dir);
  write_report_set(rc, f.out_dir, "evaluate", report);
  finish_run(rc, f.out_dir);
  std::cout << summary_text("evaluate", report);
  return 0;
}

int cmd_ablate(const Flags& f) {
  const RunConfig rc = resolve("ablate", f);
  const LoadedFlows flows = load_flows(rc.get("data.input"), rc.get("data.schema"));
  ModelConfig model = rc.model();
  PreparedDataset data = prepare_dataset(flows.records, flows.vocab, rc.graph(), model, rc.split(), codec_options(rc));
  const auto rows = ablation_suite(data, model, rc.train(), rc.pretrain());
  fs::create_directories(f.out_dir);
  write_text_file(out_path(rc, f.out_dir, "ablation"), ablation_csv(rows));
  std::vector<std::pair<std::string, double>> timing;
  std::string summary;
  for (const auto& row : rows) {
    timing.push_back({row.variant + ".train", row.train_seconds});
    if (row.pretrain_seconds > 0) timing.push_back({row.variant + ".pretrain", row.pretrain_seconds});
    summary += summary_text(row.variant, row.report) + "\n";
  }
  write_text_file(out_path(rc, f.out_dir, "timing"), timing_csv(timing));
  write_text_file(out_path(rc, f.out_dir, "summary", "txt"), summary);
  finish_run(rc, f.out_dir);
  std::cout << ablation_csv(rows);
  return 0;
}

int cmd_fewshot(const Flags& f, const std::vector<std::string>& base_specs) {
  const RunConfig rc = resolve("fewshot", f);
  const LoadedFlows flows = load_flows(rc.get("data.input"), rc.get("data.schema"));
  ModelConfig model = rc.model();
  PreparedDataset data = prepare_dataset(flows.records, flows.vocab, rc.graph(), model, rc.split(), codec_options(rc));
  const FewShotPlan plan = rc.fewshot_plan();

  std::map<std::string, ParameterSet> bases;
  for (const auto& spec : base_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--base expects mode=checkpoint");
    const std::string mode(pretrain_mode_name(parse_pretrain_mode(spec.substr(0, eq))));
    const Checkpoint ck = load_checkpoint(spec.substr(eq + 1));
    const ModelConfig pre = ck.model_config();
    model.num_layers = pre.num_layers;
    model.hidden_size = pre.hidden_size;
    bases[mode] = ck.params;
  }
  double pretrain_seconds = 0.0;
  for (const auto& mode : plan.modes) {
    if (mode == "none" || bases.count(mode)) continue;
    if (mode != "in-context") throw ConfigError("fewshot mode '" + mode + "' needs --base " + mode + "=<checkpoint>");
    std::vector<CompiledGraph> unlabeled;
    for (const auto& g : data.train.graphs) unlabeled.push_back(compile_graph(without_labels(g), model, false));
    PretrainResult pre = pretrain(unlabeled, model, rc.pretrain());
    pretrain_seconds = pre.seconds;
    bases[mode] = std::move(pre.params);
  }
  const FewShotResult result = fewshot(plan, data, bases, model, rc.fewshot_finetune(), rc.fewshot_reference());
  fs::create_directories(f.out_dir);
  write_text_file(out_path(rc, f.out_dir, "fewshot"), fewshot_csv(result));
  std::string timing = fewshot_timing_csv(result);
  if (pretrain_seconds > 0) timing += "pretrain,in-context,," + format_double(pretrain_seconds) + ",\n";
  write_text_file(out_path(rc, f.out_dir, "fewshot_timing"), timing);
  finish_run(rc, f.out_dir);
  std::cout << fewshot_csv(result);
  return 0;
}

int cmd_synth(const std::string& kind, uint64_t seed, size_t size, uint64_t member, const std::string& output) {
  if (output.empty()) throw ConfigError("--out is required");
  SyntheticDataset ds;
  if (kind == "feature") {
    ds = feature_separable(size, seed);
  } else if (kind == "topology") {
    ds = topology_only(size, seed);
  } else if (kind == "temporal") {
    TemporalPatternOptions o;
    o.windows = size;
    ds = temporal_pattern(o, seed);
  } else if (kind == "planted") {
    ds = planted_pattern(member, seed, size);
  } else {
    throw ConfigError("unknown synthetic kind '" + kind + "'");
  }
  write_text_file(output, to_canonical_csv(ds.flows));
  std::cout << "wrote " << ds.flows.size() << " flows to " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal flow-graph GNN for network intrusion detection"};
  app.require_subcommand(1);
  Flags flags;
  std::string ingest_out;
  std::vector<std::string> bases;
  std::string synth_kind = "temporal";
  std::string synth_out;
  uint64_t synth_seed = 0;
  size_t synth_size = 40;
  uint64_t synth_member = 0;

  auto* ingest = app.add_subcommand("ingest", "validate a flow CSV and write a .pptf cache");
  ingest->add_option("--input", flags.input, "flow CSV")->required();
  ingest->add_option("--schema", flags.schema, "CSV column mapping file (field = column)");
  ingest->add_option("--out", ingest_out, "output cache path")->required();

  auto* build = app.add_subcommand("build", "dump the window graphs of a dataset");
  add_run_flags(build, flags, false);

  auto* pretrain_cmd = app.add_subcommand("pretrain", "self-supervised link-prediction pre-training");
  add_run_flags(pretrain_cmd, flags, true);
  pretrain_cmd->add_option("--corpus", flags.corpus, "corpus manifest (mode, target, dataset.<id> = path)");

  auto* train_cmd = app.add_subcommand("train", "train from scratch and evaluate on the test split");
  add_run_flags(train_cmd, flags, true);

  auto* finetune = app.add_subcommand("finetune", "fine-tune from a pre-trained checkpoint");
  add_run_flags(finetune, flags, true);
  finetune->add_option("--from-checkpoint", flags.checkpoint, "pre-trained checkpoint");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a trained checkpoint");
  add_run_flags(evaluate_cmd, flags, false);
  evaluate_cmd->add_option("--from-checkpoint", flags.checkpoint, "trained checkpoint");

  auto* ablate = app.add_subcommand("ablate", "spatial-only / +temporal / +pre-training comparison");
  add_run_flags(ablate, flags, true);

  auto* fewshot_cmd = app.add_subcommand("fewshot", "few-shot fine-tuning over training-data fractions");
  add_run_flags(fewshot_cmd, flags, true);
  fewshot_cmd->add_option("--base", bases, "pre-trained base as mode=checkpoint (in-context, out-of-context)");

  auto* synth = app.add_subcommand("synth", "write a synthetic labeled flow CSV");
  synth->add_option("--kind", synth_kind, "feature, topology, temporal or planted");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--size", synth_size, "flows (feature) or windows (other kinds)");
  synth->add_option("--member", synth_member, "planted family member");
  synth->add_option("--out", synth_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(flags, ingest_out);
    if (*build) return cmd_build(flags);
    if (*pretrain_cmd) return cmd_pretrain(flags);
    if (*train_cmd) return cmd_train(flags);
    if (*finetune) return cmd_finetune(flags);
    if (*evaluate_cmd) return cmd_evaluate(flags);
    if (*ablate) return cmd_ablate(flags);
    if (*fewshot_cmd) return cmd_fewshot(flags, bases);
    if (*synth) return cmd_synth(synth_kind, synth_seed, synth_size, synth_member, synth_out);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CompatibilityError& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return kExitCompatibility;
  } catch (const EmptyDataError& e) {
    std::cerr << "empty data: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
