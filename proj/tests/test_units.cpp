#include <catch2/catch_amalgamated.hpp>

#include "deflectlab/units.hpp"

using namespace deflectlab;

TEST_CASE("length suffixes") {
  REQUIRE(parse_length("1.075mm") == Catch::Approx(1.075e-3));
  REQUIRE(parse_length("780nm") == Catch::Approx(780e-9));
  REQUIRE(parse_length("57.7um") == Catch::Approx(57.7e-6));
  REQUIRE(parse_length("57.7µm") == Catch::Approx(57.7e-6));
  REQUIRE(parse_length("57.7μm") == Catch::Approx(57.7e-6));
  REQUIRE(parse_length("34cm") == Catch::Approx(0.34));
  REQUIRE(parse_length("2m") == Catch::Approx(2.0));
  REQUIRE(parse_length("0.001") == Catch::Approx(0.001));  // bare SI
}

TEST_CASE("angle suffixes") {
  REQUIRE(parse_angle("24nrad") == Catch::Approx(24e-9));
  REQUIRE(parse_angle("2.5urad") == Catch::Approx(2.5e-6));
  REQUIRE(parse_angle("2.5µrad") == Catch::Approx(2.5e-6));
  REQUIRE(parse_angle("0.38rad") == Catch::Approx(0.38));
  REQUIRE(parse_angle("0.38") == Catch::Approx(0.38));
}

TEST_CASE("time and power suffixes") {
  REQUIRE(parse_time("8us") == Catch::Approx(8e-6));
  REQUIRE(parse_time("10ms") == Catch::Approx(10e-3));
  REQUIRE(parse_power("400uW") == Catch::Approx(400e-6));
  REQUIRE(parse_power("1.45mW") == Catch::Approx(1.45e-3));
}

TEST_CASE("whitespace and malformed quantities") {
  REQUIRE(parse_length("  1.5 mm ") == Catch::Approx(1.5e-3));
  REQUIRE_THROWS_AS(parse_length(""), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_length("abc"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_length("1.5parsec"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_angle("1.5mm"), std::invalid_argument);
}
