#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "hgmix/dataio.hpp"

using namespace hgmix;

namespace {
std::string write_temp(const std::string& content) {
  static int counter = 0;
  std::string path = "/tmp/hgmix_test_" + std::to_string(++counter) + ".tsv";
  std::ofstream out(path);
  out << content;
  return path;
}
}  // namespace

TEST_CASE("parse_dataset reads the canonical file") {
  const auto res = parse_dataset("data/motorins.tsv");
  CHECK(res.manifest.row_count == 2182);
  CHECK(res.warnings.empty());
  double min_e = 1e18, max_e = 0.0;
  long max_claims = 0;
  for (const auto& r : res.records) {
    min_e = std::min(min_e, r.exposure);
    max_e = std::max(max_e, r.exposure);
    max_claims = std::max(max_claims, r.claims);
  }
  CHECK(min_e == doctest::Approx(0.01));
  CHECK(max_e == doctest::Approx(127687.27));
  CHECK(max_claims == 3338);
}

TEST_CASE("round-trip: serialize and reparse compare equal") {
  const auto res = parse_dataset("data/motorins.tsv");
  const std::string path = write_temp("");
  {
    std::ofstream out(path);
    out << "Kilometres\tZone\tBonus\tMake\tInsured\tClaims\tPayment\n";
    char buf[256];
    for (const auto& r : res.records) {
      std::snprintf(buf, sizeof buf, "%d\t%d\t%d\t%d\t%.2f\t%ld\t%.0f\n", r.kilometres, r.zone,
                    r.bonus, r.make, r.exposure, r.claims, r.payment);
      out << buf;
    }
  }
  const auto back = parse_dataset(path);
  REQUIRE(back.records.size() == res.records.size());
  for (size_t i = 0; i < res.records.size(); ++i) {
    CHECK(back.records[i].kilometres == res.records[i].kilometres);
    CHECK(back.records[i].zone == res.records[i].zone);
    CHECK(back.records[i].bonus == res.records[i].bonus);
    CHECK(back.records[i].make == res.records[i].make);
    CHECK(back.records[i].exposure == doctest::Approx(res.records[i].exposure));
    CHECK(back.records[i].claims == res.records[i].claims);
    CHECK(back.records[i].payment == doctest::Approx(res.records[i].payment));
  }
  std::remove(path.c_str());
}

TEST_CASE("comma-delimited variant and rejected rows") {
  const std::string path = write_temp(
      "Kilometres,Zone,Bonus,Make,Insured,Claims,Payment\n"
      "1,1,1,1,10.00,2,500\n"
      "9,1,1,1,10.00,2,500\n"     // bad kilometres
      "1,1,1,1,0.00,2,500\n"      // bad exposure
      "2,7,7,9,3.25,0,0\n");
  const auto res = parse_dataset(path);
  CHECK(res.records.size() == 2);
  CHECK(res.warnings.size() == 2);
  std::remove(path.c_str());
}

TEST_CASE("header-only file is a format error") {
  const std::string path =
      write_temp("Kilometres\tZone\tBonus\tMake\tInsured\tClaims\tPayment\n");
  CHECK_THROWS(parse_dataset(path));
  std::remove(path.c_str());
}

TEST_CASE("wrong column count is a format error") {
  const std::string path = write_temp("1\t1\t1\t1\t10.0\t2\n");
  CHECK_THROWS(parse_dataset(path));
  std::remove(path.c_str());
}

TEST_CASE("empirical_hazard on worked examples") {
  CountSample s;
  s.counts = {0, 0, 1};
  auto rows = empirical_hazard(s);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].hazard == doctest::Approx(2.0 / 3.0));
  CHECK(rows[1].hazard == doctest::Approx(1.0));

  s.counts = {5};
  rows = empirical_hazard(s);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].x == 5);
  CHECK(rows[0].hazard == 1.0);
}

TEST_CASE("hazard telescoping invariants on the real data") {
  const auto res = parse_dataset("data/motorins.tsv");
  const auto rows = empirical_hazard(claims_sample(res.records));
  long prev_at_least = rows.front().at_least;
  long total = 0;
  CHECK(prev_at_least == 2182);
  for (const auto& r : rows) {
    CHECK(r.at_least <= prev_at_least);
    prev_at_least = r.at_least;
    total += r.at_value;
  }
  CHECK(total == 2182);
  // upper-tail hazard trends toward zero: compare top-decile mean slope
  const size_t k = rows.size();
  double first = 0.0, second = 0.0;
  size_t tenth = k / 10 + 1;
  for (size_t i = k - 2 * tenth; i < k - tenth; ++i) first += rows[i].hazard;
  for (size_t i = k - tenth; i + 1 < k; ++i) second += rows[i].hazard;  // skip last (always 1)
  CHECK(second / (tenth - 1) < first / tenth + 0.2);
}

TEST_CASE("empirical_histogram integer and equal-width bins") {
  auto bins = empirical_histogram({0, 0, 1, 2}, {true, 0});
  REQUIRE(bins.size() == 3);
  CHECK(bins[0].count == 2);
  CHECK(bins[1].count == 1);
  CHECK(bins[2].count == 1);

  const auto res = parse_dataset("data/motorins.tsv");
  long total = 0;
  for (const auto& b : empirical_histogram(exposure_values(res.records), {false, 50}))
    total += b.count;
  CHECK(total == 2182);
}
