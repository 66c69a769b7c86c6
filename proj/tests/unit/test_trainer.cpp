#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "pptgnn/errors.hpp"
#include "pptgnn/experiments.hpp"
#include "pptgnn/synthetic.hpp"
#include "pptgnn/trainer.hpp"

using namespace pptgnn;
using testutil::make_flow;

namespace {

std::vector<FlowRecord> ticking_flows(size_t n) {
  std::vector<FlowRecord> flows;
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    flows.push_back(make_flow(i, t, t + 0.5, "h" + std::to_string(i % 3), "s", static_cast<int32_t>(i % 2)));
  }
  return flows;
}

ModelConfig tiny_model() {
  ModelConfig c;
  c.hidden_size = 8;
  c.classifier_hidden = 8;
  return c;
}

PreparedDataset pattern_data(ModelConfig& config, uint64_t seed = 3) {
  const auto d = temporal_pattern(TemporalPatternOptions{.windows = 16}, seed);
  return prepare_dataset(d.flows, d.vocab, GraphBuildConfig{}, config);
}

}  // namespace

TEST_CASE("chronological split snaps to window edges") {
  const auto flows = ticking_flows(20);
  const FlowSplit s = chronological_split(flows, 5.0);
  CHECK(s.train().size() == 10);
  CHECK(s.val().size() == 5);
  CHECK(s.test().size() == 5);
  CHECK(s.ranges[0].first == 0);
  CHECK(s.ranges[0].last == 2);
  CHECK(s.ranges[1].first == 2);
  CHECK(s.ranges[1].last == 3);
  CHECK(s.ranges[2].last == 4);
  CHECK(s.train().back().flow_id == 9);
  CHECK(s.warnings.empty());

  const FlowSplit all = chronological_split(flows, 5.0, SplitRatios{1, 0, 0});
  CHECK(all.train().size() == 20);
  CHECK(all.val().empty());
  CHECK(all.warnings.empty());
  CHECK_THROWS_AS(chronological_split(flows, 5.0, SplitRatios{0.5, 0.5, 0.5}), ConfigError);
}

TEST_CASE("undersampling grows with the fraction and keeps the mix") {
  ModelConfig config = tiny_model();
  const PreparedDataset data = pattern_data(config);
  const auto& graphs = data.train.compiled;
  std::vector<size_t> previous;
  for (double f : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    const WindowSelection sel = undersample_windows(graphs, config.num_classes, f, 7);
    CHECK(std::includes(sel.windows.begin(), sel.windows.end(), previous.begin(), previous.end()));
    CHECK(static_cast<double>(sel.selected_flows) >= f * static_cast<double>(sel.total_flows) - 1e-9);
    for (double p : sel.selected_proportions) CHECK(p >= 0.0);
    previous = sel.windows;
  }
  const WindowSelection sel = undersample_windows(graphs, config.num_classes, 0.2, 7);
  CHECK(sel.selected_flows < sel.total_flows);
  if (!sel.balance_violation) CHECK(sel.max_deviation <= kBalanceTolerance);
  for (size_t c = 0; c < config.num_classes; ++c) {
    if (sel.full_proportions[c] > 0) CHECK(sel.selected_proportions[c] > 0);
  }
  CHECK(undersample_windows(graphs, config.num_classes, 1.0, 7).windows.size() == graphs.size());
  CHECK(undersample_windows(graphs, config.num_classes, 0.2, 7).windows == sel.windows);
}

TEST_CASE("training is deterministic for a seed") {
  ModelConfig config = tiny_model();
  const PreparedDataset data = pattern_data(config);
  TrainConfig opts;
  opts.epochs = 4;
  opts.seed = 11;
  Rng r1(11), r2(11);
  const TrainResult a = train(data.train.compiled, data.val.compiled, init_parameters(config, r1), config, opts);
  const TrainResult b = train(data.train.compiled, data.val.compiled, init_parameters(config, r2), config, opts);
  REQUIRE(a.log.size() == 4);
  CHECK(a.params == b.params);
  for (size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].train_loss == b.log[i].train_loss);

  const auto preds = predict(data.test.compiled, a.params, config);
  CHECK(std::is_sorted(preds.begin(), preds.end(),
                       [](const FlowPrediction& x, const FlowPrediction& y) { return x.flow_id < y.flow_id; }));
  CHECK(preds.size() == data.split.test().size());
  const MetricsReport m = evaluate(data.test.compiled, a.params, config, data.vocab);
  CHECK(m.samples == preds.size());
}

TEST_CASE("single-class data trains and unlabeled data does not") {
  std::vector<FlowRecord> flows = ticking_flows(12);
  for (auto& f : flows) f.label = 0;
  ModelConfig config = tiny_model();
  const PreparedDataset data =
      prepare_dataset(flows, LabelVocabulary({"Benign", "DoS"}), GraphBuildConfig{}, config, SplitRatios{1, 0, 0});
  TrainConfig opts;
  opts.epochs = 2;
  Rng rng(1);
  const ParameterSet p = init_parameters(config, rng);
  const TrainResult r = train(data.train.compiled, {}, p, config, opts);
  CHECK(r.log.size() == 2);
  CHECK(class_counts(data.train.compiled, 2) == std::vector<size_t>{12, 0});

  std::vector<CompiledGraph> unlabeled;
  for (const auto& g : data.train.graphs) unlabeled.push_back(compile_graph(g, config, false));
  CHECK_THROWS_AS(train(unlabeled, {}, p, config, opts), EmptyDataError);
  CHECK_THROWS_AS(evaluate(unlabeled, p, config, data.vocab), EmptyDataError);
}

TEST_CASE("ablation and few-shot tables have the expected rows") {
  ModelConfig config = tiny_model();
  const PreparedDataset data = pattern_data(config);
  TrainConfig opts;
  opts.epochs = 2;
  PretrainConfig pre;
  pre.epochs = 1;
  const auto rows = ablation_suite(data, config, opts, pre);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].variant == "spatial_only");
  CHECK(rows[1].variant == "temporal");
  CHECK(rows[2].variant == "temporal+pretrain");
  CHECK(rows[0].test_windows == rows[2].test_windows);

  FewShotPlan plan;
  plan.fractions = {0.1, 0.5};
  plan.modes = {"none", "in-context"};
  Rng rng(5);
  const std::map<std::string, ParameterSet> bases = {{"in-context", init_parameters(config, rng)}};
  const FewShotResult fs = fewshot(plan, data, bases, config, opts, opts);
  REQUIRE(fs.rows.size() == 4);
  CHECK(fs.rows[0].fraction == 0.1);
  CHECK(fs.rows[1].mode == "in-context");
  CHECK(fs.rows[2].fraction == 0.5);
  CHECK(fs.rows[0].windows <= fs.rows[2].windows);
}
