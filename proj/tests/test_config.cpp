#include <doctest.h>

#include "poselift/config.hpp"
#include "poselift/errors.hpp"

using namespace poselift;

TEST_CASE("config parses key=value with comments and whitespace") {
  const Config c = Config::from_string(
      "# a comment\n"
      "\n"
      "  dx = 500  \n"
      "name=viewsynth\n"
      "lr0=1e-3\n"
      "seed=18446744073709551615\n");
  CHECK(c.has("dx"));
  CHECK(c.get_double("dx", 0.0) == 500.0);
  CHECK(c.get_string("name", "") == "viewsynth");
  CHECK(c.get_double("lr0", 0.0) == 1e-3);
  CHECK(c.get_u64("seed", 0) == 18446744073709551615ULL);
  CHECK(c.get_int("missing", 7) == 7);
  CHECK(c.get_string("missing", "fallback") == "fallback");
}

TEST_CASE("config reports the offending line") {
  try {
    Config::from_string("a=1\nb=2\nnot a pair\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("config rejects non-numeric values on typed reads") {
  const Config c = Config::from_string("x=banana\n");
  CHECK_THROWS_AS(c.get_double("x", 0.0), IoError);
  CHECK_THROWS_AS(c.get_int("x", 0), IoError);
}
