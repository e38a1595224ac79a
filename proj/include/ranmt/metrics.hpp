#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace ranmt {

// One row per dev evaluation. wall_clock_seconds is whatever clock the run
// was configured with (see trainer); steps are strictly increasing and the
// clock never goes backwards.
struct MetricRecord {
  int64_t step = 0;
  double wall_clock_seconds = 0.0;
  double train_loss = 0.0;  // mean train loss since the previous eval
  double dev_bleu = 0.0;
  std::string dev_lang;  // evaluated language, or "avg" for multi-language seeds

  nlohmann::json to_json() const;
  static MetricRecord from_json(const nlohmann::json& j);
};

class MetricLog {
 public:
  void append(const MetricRecord& r);
  const std::vector<MetricRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  std::string to_jsonl() const;
  void save_jsonl(const std::string& path) const;
  static MetricLog load_jsonl(const std::string& path);

 private:
  std::vector<MetricRecord> records_;
};

// CSV with header "hours,dev_bleu"; one row per record.
void export_curve(const MetricLog& log, std::ostream& out);
void export_curve_file(const MetricLog& log, const std::string& path);

// First hour at which dev BLEU reaches `threshold`; nullopt if never.
std::optional<double> time_to_threshold(const MetricLog& log, double threshold);

}  // namespace ranmt
