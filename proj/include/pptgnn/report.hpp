#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pptgnn/experiments.hpp"
#include "pptgnn/metrics.hpp"
#include "pptgnn/pretrain.hpp"
#include "pptgnn/trainer.hpp"

namespace pptgnn {

// Reports are canonical CSV: fixed column order, round-trip doubles, "\n"
// line ends. Wall-clock times live in separate *_timing.csv files so that
// metric files are byte-identical across reruns.

// "{run_id}_seed{seed}_{kind}.csv"
std::string report_file_name(const std::string& run_id, uint64_t seed, const std::string& kind,
                             const std::string& extension = "csv");

std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string per_class_csv(const MetricsReport& report);
std::string confusion_csv(const MetricsReport& report, bool normalized);
std::string epoch_log_csv(const std::vector<EpochLog>& log);
std::string pretrain_log_csv(const std::vector<PretrainEpoch>& log);
std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string fewshot_csv(const FewShotResult& result);
std::string fewshot_timing_csv(const FewShotResult& result);
std::string timing_csv(const std::vector<std::pair<std::string, double>>& rows);

// Human-readable summary of one report, confusion matrix included.
std::string summary_text(const std::string& title, const MetricsReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace pptgnn
