#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "mlao/binary_io.hpp"
#include "mlao/config.hpp"

using namespace mlao;

TEST_CASE("key=value parsing")
{
    const auto c = KeyValueConfig::parse("# comment\n\n  alpha = 1.5 \nname=two words\nflag = yes\nlist = 1, 2.5,-3\nn = 42\n");
    CHECK(c.get_double("alpha", 0.0) == 1.5);
    CHECK(c.get_string("name", "") == "two words");
    CHECK(c.get_bool("flag", false));
    CHECK(c.get_doubles("list", {}) == std::vector<double>{1.0, 2.5, -3.0});
    CHECK(c.get_doubles("missing", {7.0}) == std::vector<double>{7.0});
    CHECK(c.unused_keys() == std::vector<std::string>{"n"});
    CHECK(c.get_int("n", 0) == 42);
    CHECK(c.unused_keys().empty());
    CHECK(c.get_double("absent", -1.0) == -1.0);
}

TEST_CASE("malformed configuration")
{
    CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign\n"), std::invalid_argument);
    CHECK_THROWS_AS(KeyValueConfig::parse(" = 3\n"), std::invalid_argument);
    const auto c = KeyValueConfig::parse("a = 1.5x\nb = 2.5\nc = maybe\nd = -1\n");
    CHECK_THROWS_WITH_AS(c.get_double("a", 0.0), doctest::Contains("'a'"), std::invalid_argument);
    CHECK_THROWS_AS(c.get_int("b", 0), std::invalid_argument);
    CHECK_THROWS_AS(c.get_bool("c", false), std::invalid_argument);
    CHECK_THROWS_AS(c.get_u64("d", 0), std::invalid_argument);
}

TEST_CASE("serialize round trip")
{
    KeyValueConfig c;
    c.set("b", "2");
    c.set("a", "x y");
    CHECK(c.serialize() == "a=x y\nb=2\n");
    CHECK(KeyValueConfig::parse(c.serialize()).entries() == c.entries());
}

TEST_CASE("shortest round-trip doubles")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(3.0) == "3");
    CHECK_THROWS(parse_double_list("1,abc"));
    CHECK(parse_double_list(" 0.8 ,1.0,, 1.4").size() == 3);
}

TEST_CASE("csv quoting")
{
    std::ostringstream out;
    CsvWriter w(out);
    w.comment("seed=3");
    w.row({"a", "b,c", "say \"hi\"", "line\nbreak"});
    w.row({"1", "", "3", "4"});
    CHECK(out.str().rfind("# seed=3\n", 0) == 0);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "say \"hi\"", "line\nbreak"});
    CHECK(rows[1] == std::vector<std::string>{"1", "", "3", "4"});
    CHECK(CsvWriter::quote("plain") == "plain");
    CHECK(CsvWriter::quote("a\"b") == "\"a\"\"b\"");
}

TEST_CASE("binary primitives are little-endian and round-trip")
{
    std::ostringstream out;
    binary::put_u32(out, 0x01020304u);
    binary::put_u64(out, 0xfedcba9876543210ull);
    binary::put_i32(out, -7);
    binary::put_f32(out, -1.25f);
    binary::put_f32(out, std::numeric_limits<float>::denorm_min());
    binary::put_string(out, "hello");
    const auto bytes = out.str();
    CHECK(bytes.size() == 4u + 8 + 4 + 4 + 4 + 4 + 5);
    CHECK(static_cast<unsigned char>(bytes[0]) == 0x04);
    CHECK(static_cast<unsigned char>(bytes[3]) == 0x01);

    std::istringstream in(bytes);
    CHECK(binary::get_u32(in, "u32") == 0x01020304u);
    CHECK(binary::get_u64(in, "u64") == 0xfedcba9876543210ull);
    CHECK(binary::get_i32(in, "i32") == -7);
    CHECK(binary::get_f32(in, "f32") == -1.25f);
    CHECK(binary::get_f32(in, "f32") == std::numeric_limits<float>::denorm_min());
    CHECK(binary::get_string(in, "s") == "hello");
    CHECK_THROWS_AS(binary::get_u32(in, "past end"), FormatError);
}

TEST_CASE("binary reader rejects implausible strings")
{
    std::ostringstream out;
    binary::put_u32(out, 1u << 30);
    std::istringstream in(out.str());
    CHECK_THROWS_AS(binary::get_string(in, "s"), FormatError);
    std::istringstream shortin(std::string("\x05\x00\x00\x00" "ab", 6));
    CHECK_THROWS_AS(binary::get_string(shortin, "s"), FormatError);
}
