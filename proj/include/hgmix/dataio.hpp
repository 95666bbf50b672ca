#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hgmix/estimation.hpp"
#include "hgmix/glm.hpp"

namespace hgmix {

struct DatasetManifest {
  std::string path;
  size_t row_count = 0;
  std::map<std::string, int> column_map;
  std::uint64_t checksum = 0;  // FNV-1a of the raw file bytes
};

struct ParseResult {
  std::vector<RiskRecord> records;
  DatasetManifest manifest;
  std::vector<std::string> warnings;  // one per rejected row, with line numbers
};

struct ParseHints {
  // overrides the canonical column order
  // (Kilometres, Zone, Bonus, Make, Insured, Claims, Payment)
  std::map<std::string, int> column_map;
};

// Delimited text (tab or comma, auto-detected), optional header row detected
// by a non-numeric first line. Rows with invalid factor levels or
// non-positive exposure are rejected with their line numbers.
ParseResult parse_dataset(const std::string& path, const ParseHints& hints = {});

CountSample claims_sample(const std::vector<RiskRecord>& records);
std::vector<double> exposure_values(const std::vector<RiskRecord>& records);

struct HazardRow {
  long x = 0;
  long at_value = 0;  // #{X = x}
  long at_least = 0;  // #{X >= x}
  double hazard = 0.0;
};

// hazard(x) = #{X=x} / #{X>=x} for every observed x.
std::vector<HazardRow> empirical_hazard(const CountSample& counts);

struct HistogramBin {
  double lo = 0.0, hi = 0.0;
  long count = 0;
};

struct BinSpec {
  bool integer_bins = true;  // one bin per integer value
  int bin_count = 50;        // equal-width bins when integer_bins is false
};

std::vector<HistogramBin> empirical_histogram(const std::vector<double>& values,
                                              const BinSpec& spec);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace hgmix
