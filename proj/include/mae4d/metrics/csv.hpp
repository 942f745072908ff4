// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mae4d::metrics {

/// Plain comma-separated table; fields never contain commas or quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Shortest round-trip representation of a double.
std::string format_number(double v);
std::string format_hash(std::uint64_t h);

/// Atomic write (temp file + rename).
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// One metric result: task, metric, value, seed, config-hash.
struct MetricRow {
  std::string task;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

CsvTable metric_table(const std::vector<MetricRow>& rows);

}  // namespace mae4d::metrics
