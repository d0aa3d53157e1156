#pragma once
#include <string>
#include <vector>

namespace fsi {

// Shortest decimal that round-trips to the same double (std::to_chars).
// All file output goes through this so reruns are byte identical.
std::string format_double(double v);

// Time-series CSV: fixed, versioned column set; one row per accepted step.
struct CsvWriter {
  std::string header_comment = "# fsi timeseries schema v1";
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string render() const;
};

// key = value lines, sorted stable (insertion order), used for run summaries
struct SummaryWriter {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }
  void add(const std::string& k, double v);
  void add(const std::string& k, long v);
  std::string render() const;
};

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
void ensure_dir(const std::string& path);

}  // namespace fsi
