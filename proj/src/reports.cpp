#include "hgmix/reports.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hgmix {

std::string format_full(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

void write_tsv(const Table& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t i = 0; i < t.header.size(); ++i) {
    if (i) out << '\t';
    out << t.header[i];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << '\t';
      out << row[i];
    }
    out << '\n';
  }
}

void write_json(const Table& t, const std::string& path) {
  nlohmann::json j;
  j["name"] = t.name;
  j["columns"] = t.header;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : t.rows) j["rows"].push_back(row);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::string write_table(const Table& t, const std::string& out_dir, const std::string& format) {
  const std::string path = out_dir + "/" + t.name + (format == "json" ? ".json" : ".tsv");
  if (format == "json") write_json(t, path);
  else write_tsv(t, path);
  return path;
}

}  // namespace hgmix
