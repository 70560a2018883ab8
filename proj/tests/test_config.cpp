#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "shallowcvx/config.hpp"
#include "shallowcvx/csv.hpp"

using namespace scx;

TEST_CASE("empty config yields no entries", "[config]") {
  std::istringstream in("");
  CHECK(config::parse_config(in).empty());

  std::istringstream comments("# only a comment\n\n   \n# another\n");
  CHECK(config::parse_config(comments).empty());
}

TEST_CASE("key-value lines are parsed with comments stripped", "[config]") {
  std::istringstream in("alpha = 0.9\n# comment\nwidth=3   # trailing\n  out =  run.csv\n");
  const auto entries = config::parse_config(in);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].key == "alpha");
  CHECK(entries[0].value == "0.9");
  CHECK(entries[0].line == 1);
  CHECK(entries[1].key == "width");
  CHECK(entries[1].value == "3");
  CHECK(entries[2].key == "out");
  CHECK(entries[2].value == "run.csv");
}

TEST_CASE("malformed lines report their line number", "[config]") {
  std::istringstream in("alpha 0.9\n");
  REQUIRE_THROWS_AS(config::parse_config(in), ParseError);
  try {
    std::istringstream again("alpha 0.9\n");
    config::parse_config(again);
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  std::istringstream later("alpha = 0.9\n\n= value\n");
  try {
    config::parse_config(later);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("float rendering is 17 significant digits and round-trip exact", "[config]") {
  CHECK(csv::format_double(0.25) == "0.25");
  CHECK(csv::format_double(1.0) == "1");
  for (double v : {1.0 / 3.0, 0.1, 2.5e-17, -123456.789, 5e301}) {
    const std::string s = csv::format_double(v);
    CHECK(std::stod(s) == v);
  }
}
