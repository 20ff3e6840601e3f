#include <doctest.h>

#include "rideprobe/csv.hpp"
#include "rideprobe/error.hpp"

using namespace rideprobe;

TEST_CASE("quoted fields, doubled quotes and embedded separators") {
  CsvReader r("a,b,c\n\"x, y\",\"say \"\"hi\"\"\",3\n");
  REQUIRE(r.header().size() == 3);
  std::vector<std::string> row;
  REQUIRE(r.next(row));
  CHECK(row == std::vector<std::string>{"x, y", "say \"hi\"", "3"});
  CHECK_FALSE(r.next(row));
}

TEST_CASE("CRLF, byte order mark and blank lines") {
  CsvReader r("\xEF\xBB\xBFid,val\r\n1,2\r\n\r\n3,4\r\n");
  CHECK(r.header()[0] == "id");
  CHECK(r.column_index("val") == 1);
  CHECK_FALSE(r.column_index("missing"));
  std::vector<std::string> row;
  REQUIRE(r.next(row));
  CHECK(row == std::vector<std::string>{"1", "2"});
  REQUIRE(r.next(row));
  CHECK(row == std::vector<std::string>{"3", "4"});
  CHECK_FALSE(r.next(row));
}

TEST_CASE("quoted newline stays in the field") {
  CsvReader r("a,b\n\"line1\nline2\",x\n");
  std::vector<std::string> row;
  REQUIRE(r.next(row));
  CHECK(row[0] == "line1\nline2");
  CHECK(row[1] == "x");
}

TEST_CASE("missing trailing fields read as empty") {
  CsvReader r("a,b,c\n1,,\n");
  std::vector<std::string> row;
  REQUIRE(r.next(row));
  REQUIRE(row.size() == 3);
  CHECK(row[1].empty());
  CHECK(row[2].empty());
}

TEST_CASE("number parsing") {
  CHECK(parse_double("12.5") == 12.5);
  CHECK(parse_double(" 3 ") == 3.0);
  CHECK(parse_double("+4.25") == 4.25);
  CHECK(parse_double("-1e3") == -1000.0);
  CHECK_FALSE(parse_double(""));
  CHECK_FALSE(parse_double("abc"));
  CHECK_FALSE(parse_double("12abc"));
  CHECK(trim("  x y \t") == "x y");
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(CsvReader::from_file("/nonexistent/trips.csv"), IoError);
}
