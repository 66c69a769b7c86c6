#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pptgnn/flow_ingest.hpp"

namespace pptgnn {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

/// Per-class scores over labels 0..num_classes-1. A zero denominator gives 0.
std::vector<ClassMetrics> per_class_metrics(std::span<const int32_t> truth, std::span<const int32_t> predicted,
                                            size_t num_classes);

// Both averages run over the classes that occur in truth or predictions.
double macro_f1(std::span<const int32_t> truth, std::span<const int32_t> predicted, size_t num_classes);
double weighted_f1(std::span<const int32_t> truth, std::span<const int32_t> predicted, size_t num_classes);

// 1 for every class other than benign (index 0).
std::vector<int32_t> collapse_binary(std::span<const int32_t> labels);

struct MetricsReport {
  double multiclass_weighted_f1 = 0.0;
  double multiclass_macro_f1 = 0.0;
  double binary_weighted_f1 = 0.0;
  double binary_macro_f1 = 0.0;
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<uint64_t>> confusion;  // [true][predicted]
  std::vector<std::vector<double>> confusion_normalized;  // each predicted column sums to 1 (or is all 0)
  size_t samples = 0;
  double training_seconds = 0.0;
};

MetricsReport compute_metrics(std::span<const int32_t> truth, std::span<const int32_t> predicted,
                              const LabelVocabulary& vocab);

}  // namespace pptgnn
