#pragma once

// Result files: results.json (records plus metrics), results.csv (one row
// per image), fr_curve.csv (fooling rate per query budget) and the
// universal-color report.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chromafool/harness.hpp"
#include "chromafool/universal.hpp"

namespace chromafool {

struct RunInfo {
  std::string variant;
  std::uint64_t seed = 0;
  std::string oracle;
  double quality_threshold = 0.3;

  bool operator==(const RunInfo&) const = default;
};

struct ResultsDocument {
  RunInfo info;
  std::vector<AttackRecord> records;
  MetricsReport metrics;
};

// Doubles are written with round-trip precision in every format.
std::string results_json(const ResultsDocument& doc);
ResultsDocument parse_results_json(std::string_view text);  // FormatError on bad input

std::string results_csv(const std::vector<AttackRecord>& records);
std::vector<AttackRecord> parse_results_csv(std::string_view text);

std::string curve_csv(const MetricsReport& metrics);

// Writes results.json, results.csv and fr_curve.csv into dir.
void write_results(const ResultsDocument& doc, const std::filesystem::path& dir);
ResultsDocument read_results(const std::filesystem::path& results_json_path);

struct UniversalRow {
  std::size_t color_id = 0;  // 1-based, by descending cluster size
  ColorFilter center;
  std::size_t member_count = 0;
  UniversalScore score;
};

std::string universal_json(const std::vector<UniversalRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace chromafool
