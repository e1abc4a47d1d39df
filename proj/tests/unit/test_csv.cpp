#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "pullsim/csv.hpp"
#include "pullsim/error.hpp"

using namespace pullsim;

TEST_CASE("number formatting round-trips exactly") {
    oracle::ParamGen gen(21);
    for (int i = 0; i < 10000; ++i) {
        const double x = gen.log_uniform(1e-300, 1e300) * (gen.uniform(0, 1) < 0.5 ? -1.0 : 1.0);
        REQUIRE(csv::parse_double(csv::format_double(x)) == x);
    }
    CHECK(csv::format_double(1.01) == "1.01");
    CHECK(csv::format_double(0.0) == "0");
    CHECK(csv::format_double(8.0) == "8");
    CHECK(csv::format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::isnan(csv::parse_double(csv::format_double(std::nan("")))));
}

TEST_CASE("optional numbers use the empty field") {
    CHECK(csv::format_optional(std::nullopt).empty());
    CHECK_FALSE(csv::parse_optional("").has_value());
    CHECK(csv::parse_optional("0.5") == 0.5);
}

TEST_CASE("malformed numbers are rejected") {
    CHECK_THROWS_AS(csv::parse_double("abc"), ParameterError);
    CHECK_THROWS_AS(csv::parse_double("1.5x"), ParameterError);
    CHECK_THROWS_AS(csv::parse_double(""), ParameterError);
}

TEST_CASE("tables") {
    csv::Table t{{"a", "b"}, {{"1", ""}, {"2", "3.5"}}};
    const std::string text = csv::to_string(t);
    CHECK(text == "a,b\n1,\n2,3.5\n");
    const csv::Table back = csv::parse(text);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.column("b") == 1);
    CHECK_THROWS_AS(back.column("c"), ParameterError);
    CHECK(csv::parse("a,b\r\n1,2\r\n\r\n").rows.size() == 1);
    CHECK_THROWS_AS(csv::parse("a,b\n1\n"), ParameterError);
}
