#include <catch_amalgamated.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "tsmu/io.hpp"

using namespace tsmu;

namespace {

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "tsmu_test_io";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("shortest decimals") {
    REQUIRE(format_double(0.1) == "0.1");
    REQUIRE(format_double(1.0) == "1");
    REQUIRE(format_double(-2.5) == "-2.5");
    REQUIRE(format_double(0.0) == "0");
    REQUIRE(format_double(1e-300) == "1e-300");
    REQUIRE(format_double(std::nan("")) == "nan");
    REQUIRE(format_double(std::numeric_limits<double>::infinity()) == "inf");
    REQUIRE(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("decimals parse back to the same double") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
    std::uniform_int_distribution<int> exponent(-300, 300);
    for (int n = 0; n < 2000; ++n) {
        const double v = std::ldexp(mantissa(rng), exponent(rng));
        const std::string s = format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(back == v);
    }
}

TEST_CASE("csv tables") {
    CsvTable t({"a", "b", "c"});
    t.row().add(std::size_t{3}).add(0.25).add("x");
    t.row().blank().add(1e-20).add(-1.0);
    REQUIRE(t.str() == "a,b,c\n3,0.25,x\n,1e-20,-1\n");
    CsvTable empty({"only"});
    REQUIRE(empty.str() == "only\n");
}

TEST_CASE("json documents are sorted, indented and end in a newline") {
    const nlohmann::json doc = {{"zeta", 1}, {"alpha", {0.1, 2}}};
    REQUIRE(dump_json(doc) == "{\n  \"alpha\": [\n    0.1,\n    2\n  ],\n  \"zeta\": 1\n}\n");
    REQUIRE(nlohmann::json::parse(dump_json(doc)) == doc);
}

TEST_CASE("atomic writes replace the target and leave no temporary") {
    const auto dir = scratch_dir();
    const auto path = dir / "out.txt";
    write_atomic(path, "first");
    write_atomic(path, "second\n");
    REQUIRE(slurp(path) == "second\n");
    REQUIRE_FALSE(std::filesystem::exists(dir / "out.txt.tmp"));
    REQUIRE_THROWS_AS(write_atomic(dir / "missing" / "out.txt", "x"), std::runtime_error);
}

TEST_CASE("line charts") {
    const std::vector<SvgSeries> s = {{"p<1", {0.0, 1.0, 2.0}, {0.0, 0.5, 0.25}},
                                      {"q", {0.0, 2.0}, {std::nan(""), 1.0}}};
    const std::string svg = svg_line_chart("a & b", "y", "p", s);
    REQUIRE(svg.rfind("<svg", 0) == 0);
    REQUIRE(svg.find("a &amp; b") != std::string::npos);
    REQUIRE(svg.find("p&lt;1") != std::string::npos);
    REQUIRE(svg.find("nan") == std::string::npos);
    std::size_t lines = 0;
    for (std::size_t at = svg.find("<polyline"); at != std::string::npos;
         at = svg.find("<polyline", at + 1)) {
        ++lines;
    }
    REQUIRE(lines == 2);
    REQUIRE(svg == svg_line_chart("a & b", "y", "p", s));
    REQUIRE(svg.substr(svg.size() - 7) == "</svg>\n");
    REQUIRE_NOTHROW(svg_line_chart("empty", "x", "y", {}));
}
