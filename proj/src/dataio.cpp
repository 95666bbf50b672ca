#include "hgmix/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hgmix {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

bool numeric_token(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

const char* kCanonicalColumns[7] = {"Kilometres", "Zone", "Bonus",  "Make",
                                    "Insured",    "Claims", "Payment"};

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ParseResult parse_dataset(const std::string& path, const ParseHints& hints) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("parse_dataset: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  ParseResult res;
  res.manifest.path = path;
  res.manifest.checksum = fnv1a(content);
  for (int i = 0; i < 7; ++i) res.manifest.column_map[kCanonicalColumns[i]] = i;
  for (const auto& [name, idx] : hints.column_map) {
    if (!res.manifest.column_map.count(name))
      throw std::domain_error("parse_dataset: unknown column name " + name);
    res.manifest.column_map[name] = idx;
  }

  std::istringstream lines(content);
  std::string line;
  long line_no = 0;
  bool saw_data_line = false;
  char delim = '\t';
  bool delim_chosen = false;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (!delim_chosen) {
      delim = line.find('\t') != std::string::npos ? '\t' : ',';
      delim_chosen = true;
    }
    const auto tok = split(line, delim);
    if (!saw_data_line && !numeric_token(tok[0])) continue;  // header row
    if (tok.size() != 7) {
      std::ostringstream os;
      os << "parse_dataset: line " << line_no << ": expected 7 columns, got " << tok.size();
      throw std::runtime_error(os.str());
    }
    saw_data_line = true;
    const auto& cm = res.manifest.column_map;
    RiskRecord r;
    try {
      r.kilometres = std::stoi(tok[cm.at("Kilometres")]);
      r.zone = std::stoi(tok[cm.at("Zone")]);
      r.bonus = std::stoi(tok[cm.at("Bonus")]);
      r.make = std::stoi(tok[cm.at("Make")]);
      r.exposure = std::stod(tok[cm.at("Insured")]);
      r.claims = std::stol(tok[cm.at("Claims")]);
      r.payment = std::stod(tok[cm.at("Payment")]);
      validate_record(r, line_no);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "line " << line_no << " rejected: " << e.what();
      res.warnings.push_back(os.str());
      continue;
    }
    res.records.push_back(r);
  }
  if (res.records.empty())
    throw std::runtime_error("parse_dataset: no data rows in " + path);
  res.manifest.row_count = res.records.size();
  return res;
}

CountSample claims_sample(const std::vector<RiskRecord>& records) {
  CountSample s;
  s.counts.reserve(records.size());
  for (const auto& r : records) s.counts.push_back(r.claims);
  return s;
}

std::vector<double> exposure_values(const std::vector<RiskRecord>& records) {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.exposure);
  return v;
}

std::vector<HazardRow> empirical_hazard(const CountSample& counts) {
  if (counts.counts.empty()) throw std::domain_error("empirical_hazard: empty sample");
  std::map<long, long> freq;
  for (long v : counts.counts) ++freq[v];
  long remaining = static_cast<long>(counts.counts.size());
  std::vector<HazardRow> rows;
  for (const auto& [x, cnt] : freq) {
    // remaining currently counts #{X >= previous values}; walk down to x
    HazardRow r;
    r.x = x;
    r.at_value = cnt;
    r.at_least = remaining;
    r.hazard = static_cast<double>(cnt) / static_cast<double>(remaining);
    remaining -= cnt;
    rows.push_back(r);
  }
  return rows;
}

std::vector<HistogramBin> empirical_histogram(const std::vector<double>& values,
                                              const BinSpec& spec) {
  if (values.empty()) throw std::domain_error("empirical_histogram: empty sample");
  std::vector<HistogramBin> bins;
  if (spec.integer_bins) {
    std::map<long, long> freq;
    for (double v : values) ++freq[static_cast<long>(std::llround(v))];
    for (const auto& [x, cnt] : freq) {
      bins.push_back({static_cast<double>(x), static_cast<double>(x), cnt});
    }
    return bins;
  }
  const double lo = *std::min_element(values.begin(), values.end());
  const double hi = *std::max_element(values.begin(), values.end());
  const int k = std::max(1, spec.bin_count);
  const double width = (hi - lo) / k;
  bins.resize(k);
  for (int i = 0; i < k; ++i) {
    bins[i].lo = lo + i * width;
    bins[i].hi = lo + (i + 1) * width;
    bins[i].count = 0;
  }
  for (double v : values) {
    int idx = width > 0.0 ? static_cast<int>((v - lo) / width) : 0;
    idx = std::clamp(idx, 0, k - 1);
    ++bins[idx].count;
  }
  return bins;
}

}  // namespace hgmix
