#pragma once

#include <string>
#include <vector>

namespace hgmix {

// A rectangular report table: header + string cells, written as TSV or JSON.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
};

std::string format_full(double v);      // full precision (round-trip)
std::string format_fixed(double v, int digits = 4);

void write_tsv(const Table& t, const std::string& path);
void write_json(const Table& t, const std::string& path);
// Writes <out_dir>/<name>.tsv or .json depending on format ("tsv"/"json").
std::string write_table(const Table& t, const std::string& out_dir, const std::string& format);

}  // namespace hgmix
