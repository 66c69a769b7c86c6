#include "pptgnn/metrics.hpp"

#include <stdexcept>

namespace pptgnn {

namespace {

void check_inputs(std::span<const int32_t> truth, std::span<const int32_t> predicted, size_t num_classes) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("truth and predictions differ in length");
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0 || static_cast<size_t>(truth[i]) >= num_classes ||
        static_cast<size_t>(predicted[i]) >= num_classes) {
      throw std::invalid_argument("label outside 0.." + std::to_string(num_classes - 1));
    }
  }
}

std::vector<uint8_t> present(std::span<const int32_t> truth, std::span<const int32_t> predicted, size_t n) {
  std::vector<uint8_t> seen(n, 0);
  for (int32_t t : truth) seen[static_cast<size_t>(t)] = 1;
  for (int32_t p : predicted) seen[static_cast<size_t>(p)] = 1;
  return seen;
}

}  // namespace

std::vector<ClassMetrics> per_class_metrics(std::span<const int32_t> truth, std::span<const int32_t> predicted,
                                            size_t num_classes) {
  check_inputs(truth, predicted, num_classes);
  std::vector<uint64_t> tp(num_classes, 0), pred_count(num_classes, 0);
  std::vector<ClassMetrics> out(num_classes);
  for (size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<size_t>(truth[i]);
    const auto p = static_cast<size_t>(predicted[i]);
    out[t].support++;
    pred_count[p]++;
    if (t == p) tp[t]++;
  }
  for (size_t c = 0; c < num_classes; ++c) {
    ClassMetrics& m = out[c];
    m.precision = pred_count[c] ? static_cast<double>(tp[c]) / static_cast<double>(pred_count[c]) : 0.0;
    m.recall = m.support ? static_cast<double>(tp[c]) / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  return out;
}

double macro_f1(std::span<const int32_t> truth, std::span<const int32_t> predicted, size_t num_classes) {
  const auto metrics = per_class_metrics(truth, predicted, num_classes);
  const auto seen = present(truth, predicted, num_classes);
  double sum = 0.0;
  size_t count = 0;
  for (size_t c = 0; c < num_classes; ++c) {
    if (!seen[c]) continue;
    sum += metrics[c].f1;
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double weighted_f1(std::span<const int32_t> truth, std::span<const int32_t> predicted, size_t num_classes) {
  const auto metrics = per_class_metrics(truth, predicted, num_classes);
  double sum = 0.0;
  for (const auto& m : metrics) sum += m.f1 * static_cast<double>(m.support);
  return truth.empty() ? 0.0 : sum / static_cast<double>(truth.size());
}

std::vector<int32_t> collapse_binary(std::span<const int32_t> labels) {
  std::vector<int32_t> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] != 0 ? 1 : 0;
  return out;
}

MetricsReport compute_metrics(std::span<const int32_t> truth, std::span<const int32_t> predicted,
                              const LabelVocabulary& vocab) {
  const size_t n = vocab.size();
  MetricsReport r;
  r.class_names = vocab.names();
  r.samples = truth.size();
  r.per_class = per_class_metrics(truth, predicted, n);
  r.multiclass_macro_f1 = macro_f1(truth, predicted, n);
  r.multiclass_weighted_f1 = weighted_f1(truth, predicted, n);
  const auto bt = collapse_binary(truth);
  const auto bp = collapse_binary(predicted);
  r.binary_macro_f1 = macro_f1(bt, bp, 2);
  r.binary_weighted_f1 = weighted_f1(bt, bp, 2);

  r.confusion.assign(n, std::vector<uint64_t>(n, 0));
  for (size_t i = 0; i < truth.size(); ++i) r.confusion[static_cast<size_t>(truth[i])][static_cast<size_t>(predicted[i])]++;
  r.confusion_normalized.assign(n, std::vector<double>(n, 0.0));
  for (size_t p = 0; p < n; ++p) {
    uint64_t column = 0;
    for (size_t t = 0; t < n; ++t) column += r.confusion[t][p];
    if (column == 0) continue;
    for (size_t t = 0; t < n; ++t) {
      r.confusion_normalized[t][p] = static_cast<double>(r.confusion[t][p]) / static_cast<double>(column);
    }
  }
  return r;
}

}  // namespace pptgnn
