#include "ranmt/metrics.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ranmt {

nlohmann::json MetricRecord::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["train_loss"] = train_loss;
  j["dev_bleu"] = dev_bleu;
  j["dev_lang"] = dev_lang;
  return j;
}

MetricRecord MetricRecord::from_json(const nlohmann::json& j) {
  MetricRecord r;
  r.step = j.at("step").get<int64_t>();
  r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  r.train_loss = j.at("train_loss").get<double>();
  r.dev_bleu = j.at("dev_bleu").get<double>();
  r.dev_lang = j.at("dev_lang").get<std::string>();
  return r;
}

void MetricLog::append(const MetricRecord& r) {
  if (!records_.empty()) {
    if (r.step <= records_.back().step)
      throw std::runtime_error("MetricLog: step " + std::to_string(r.step) +
                               " not after " + std::to_string(records_.back().step));
    if (r.wall_clock_seconds < records_.back().wall_clock_seconds)
      throw std::runtime_error("MetricLog: wall clock went backwards");
  }
  records_.push_back(r);
}

std::string MetricLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.to_json().dump();
    out += '\n';
  }
  return out;
}

void MetricLog::save_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("MetricLog: cannot write " + path);
  out << to_jsonl();
}

MetricLog MetricLog::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("MetricLog: cannot open " + path);
  MetricLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.append(MetricRecord::from_json(nlohmann::json::parse(line)));
  }
  return log;
}

void export_curve(const MetricLog& log, std::ostream& out) {
  out << "hours,dev_bleu\n";
  for (const auto& r : log.records())
    out << nlohmann::json(r.wall_clock_seconds / 3600.0).dump() << ","
        << nlohmann::json(r.dev_bleu).dump() << "\n";
}

void export_curve_file(const MetricLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_curve: cannot write " + path);
  export_curve(log, out);
}

std::optional<double> time_to_threshold(const MetricLog& log, double threshold) {
  for (const auto& r : log.records())
    if (r.dev_bleu >= threshold) return r.wall_clock_seconds / 3600.0;
  return std::nullopt;
}

}  // namespace ranmt
