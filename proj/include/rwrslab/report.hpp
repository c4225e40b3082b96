#ifndef RWRSLAB_REPORT_HPP
#define RWRSLAB_REPORT_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace rwrslab {

struct ReportRecord {
  std::string experiment;
  std::map<std::string, std::string> params;
  std::string metric;
  double value = 0.0;
  double ci_lo = std::numeric_limits<double>::quiet_NaN();
  double ci_hi = std::numeric_limits<double>::quiet_NaN();
  std::string flags;
  double seconds = 0.0;
};

// Fixed column order: experiment, <sorted union of param keys>, metric,
// value, ci_lo, ci_hi, flags, seconds.  Writing is deterministic for a
// fixed record list except for the informational seconds column.
void write_csv(const std::vector<ReportRecord>& records,
               const std::string& path);
void write_json(const std::vector<ReportRecord>& records,
                const std::string& path);

// Deterministic serialization of a record list with the seconds column
// zeroed; used by the determinism tests.
std::string csv_text(const std::vector<ReportRecord>& records,
                     bool include_seconds = true);

// Manifest with the FNV-64 hash of the canonical config text.
void write_manifest(const std::string& path, const std::string& config_text,
                    std::uint64_t seed, std::size_t record_count);

std::string format_double(double value);

}  // namespace rwrslab

#endif  // RWRSLAB_REPORT_HPP
