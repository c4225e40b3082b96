#include "rwrslab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rwrslab/rng.hpp"

namespace rwrslab {

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string csv_text(const std::vector<ReportRecord>& records,
                     bool include_seconds) {
  std::set<std::string> keys;
  for (const auto& record : records)
    for (const auto& [key, value] : record.params) keys.insert(key);

  std::ostringstream out;
  out << "experiment";
  for (const auto& key : keys) out << "," << key;
  out << ",metric,value,ci_lo,ci_hi,flags,seconds\n";
  for (const auto& record : records) {
    out << record.experiment;
    for (const auto& key : keys) {
      out << ",";
      const auto it = record.params.find(key);
      if (it != record.params.end()) out << it->second;
    }
    out << "," << record.metric << "," << format_double(record.value) << ","
        << format_double(record.ci_lo) << "," << format_double(record.ci_hi)
        << "," << record.flags << ","
        << (include_seconds ? format_double(record.seconds) : "0") << "\n";
  }
  return out.str();
}

void write_csv(const std::vector<ReportRecord>& records,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << csv_text(records);
}

void write_json(const std::vector<ReportRecord>& records,
                const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& record : records) {
    nlohmann::json item;
    item["experiment"] = record.experiment;
    item["params"] = record.params;
    item["metric"] = record.metric;
    item["value"] = record.value;
    if (!std::isnan(record.ci_lo)) item["ci_lo"] = record.ci_lo;
    if (!std::isnan(record.ci_hi)) item["ci_hi"] = record.ci_hi;
    item["flags"] = record.flags;
    item["seconds"] = record.seconds;
    doc.push_back(item);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << doc.dump(2) << "\n";
}

void write_manifest(const std::string& path, const std::string& config_text,
                    std::uint64_t seed, std::size_t record_count) {
  nlohmann::json doc;
  doc["config_hash"] = fnv1a64(config_text);
  doc["seed"] = seed;
  doc["version"] = 1;
  doc["records"] = record_count;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace rwrslab
