#include "pptgnn/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pptgnn/errors.hpp"
#include "pptgnn/kv_config.hpp"

namespace pptgnn {

namespace {

std::string num(double v) { return std::isnan(v) ? "nan" : format_double(v); }

std::string fixed(double v, int digits = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, v);
  return buffer;
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + "\n";
}

}  // namespace

std::string report_file_name(const std::string& run_id, uint64_t seed, const std::string& kind,
                             const std::string& extension) {
  return run_id + "_seed" + std::to_string(seed) + "_" + kind + "." + extension;
}

std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out = "variant,samples,multiclass_weighted_f1,multiclass_macro_f1,binary_weighted_f1,binary_macro_f1\n";
  for (const auto& [name, r] : rows) {
    out += join({name, std::to_string(r.samples), num(r.multiclass_weighted_f1), num(r.multiclass_macro_f1),
                 num(r.binary_weighted_f1), num(r.binary_macro_f1)});
  }
  return out;
}

std::string per_class_csv(const MetricsReport& report) {
  std::string out = "class,support,precision,recall,f1\n";
  for (size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    out += join({report.class_names.at(c), std::to_string(m.support), num(m.precision), num(m.recall), num(m.f1)});
  }
  return out;
}

std::string confusion_csv(const MetricsReport& report, bool normalized) {
  std::vector<std::string> header = {"true\\predicted"};
  header.insert(header.end(), report.class_names.begin(), report.class_names.end());
  std::string out = join(header);
  for (size_t t = 0; t < report.confusion.size(); ++t) {
    std::vector<std::string> row = {report.class_names.at(t)};
    for (size_t p = 0; p < report.confusion[t].size(); ++p) {
      row.push_back(normalized ? num(report.confusion_normalized[t][p]) : std::to_string(report.confusion[t][p]));
    }
    out += join(row);
  }
  return out;
}

std::string epoch_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,train_loss,val_macro_f1\n";
  for (const auto& e : log) out += join({std::to_string(e.epoch), num(e.train_loss), num(e.val_macro_f1)});
  return out;
}

std::string pretrain_log_csv(const std::vector<PretrainEpoch>& log) {
  std::string out = "epoch,loss,link_accuracy,negatives,shortfall\n";
  for (const auto& e : log) {
    out += join({std::to_string(e.epoch), num(e.loss), num(e.accuracy), std::to_string(e.negatives),
                 std::to_string(e.shortfall)});
  }
  return out;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "variant,test_windows,samples,multiclass_weighted_f1,multiclass_macro_f1,binary_weighted_f1,binary_macro_f1\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += join({row.variant, std::to_string(row.test_windows.size()), std::to_string(r.samples),
                 num(r.multiclass_weighted_f1), num(r.multiclass_macro_f1), num(r.binary_weighted_f1),
                 num(r.binary_macro_f1)});
  }
  return out;
}

std::string fewshot_csv(const FewShotResult& result) {
  std::string out =
      "fraction,pretrain_mode,epochs,windows,flows,multiclass_macro_f1,reference_macro_f1,percent_loss,"
      "max_class_deviation,balance_violation\n";
  for (const auto& r : result.rows) {
    out += join({num(r.fraction), r.mode, std::to_string(r.epochs), std::to_string(r.windows), std::to_string(r.flows),
                 num(r.macro_f1), num(result.reference_score), num(r.percent_loss), num(r.max_deviation),
                 r.balance_violation ? "1" : "0"});
  }
  return out;
}

std::string fewshot_timing_csv(const FewShotResult& result) {
  std::string out = "fraction,pretrain_mode,epochs,seconds,percent_of_reference\n";
  out += join({"1", "reference", "", num(result.reference_seconds), "100"});
  for (const auto& r : result.rows) {
    const double pct = result.reference_seconds > 0 ? 100.0 * r.seconds / result.reference_seconds : NAN;
    out += join({num(r.fraction), r.mode, std::to_string(r.epochs), num(r.seconds), num(pct)});
  }
  return out;
}

std::string timing_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::string out = "phase,seconds\n";
  for (const auto& [name, seconds] : rows) out += join({name, num(seconds)});
  return out;
}

std::string summary_text(const std::string& title, const MetricsReport& r) {
  std::ostringstream out;
  out << title << "\n";
  out << "  samples                " << r.samples << "\n";
  out << "  multiclass weighted F1 " << fixed(r.multiclass_weighted_f1) << "\n";
  out << "  multiclass macro F1    " << fixed(r.multiclass_macro_f1) << "\n";
  out << "  binary weighted F1     " << fixed(r.binary_weighted_f1) << "\n";
  out << "  binary macro F1        " << fixed(r.binary_macro_f1) << "\n";
  out << "  per class (precision recall f1 support)\n";
  for (size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    out << "    " << r.class_names[c] << "  " << fixed(m.precision) << " " << fixed(m.recall) << " " << fixed(m.f1)
        << " " << m.support << "\n";
  }
  out << "  confusion, normalized per predicted class (rows true, columns predicted)\n";
  for (size_t t = 0; t < r.confusion_normalized.size(); ++t) {
    out << "    " << r.class_names[t];
    for (double v : r.confusion_normalized[t]) out << " " << fixed(v, 3);
    out << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace pptgnn
