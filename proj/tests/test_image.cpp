#include "doctest.h"

#include <cstdio>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "rms/errors.hpp"
#include "rms/image.hpp"

using namespace rms;

namespace {

std::vector<uint8_t> pgm_bytes(const std::string& header,
                               const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> b(header.begin(), header.end());
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

} // namespace

TEST_CASE("P5 parsing reads dimensions and pixels") {
    auto img = parse_pgm(pgm_bytes("P5\n4 2\n255\n", {0, 1, 2, 3, 250, 251, 252, 253}));
    CHECK(img.width == 4);
    CHECK(img.height == 2);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(0, 3) == 3.0);
    CHECK(img.at(1, 0) == 250.0);
    CHECK(img.at(1, 3) == 253.0);
}

TEST_CASE("header tokens may be separated by any whitespace run") {
    auto img = parse_pgm(pgm_bytes("P5  \t2\r\n 2 \n\n255 ", {9, 8, 7, 6}));
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.at(1, 1) == 6.0);
}

TEST_CASE("payload byte after maxval may itself look like whitespace") {
    // pixel values 10 ('\n') survive because exactly one separator is consumed
    auto img = parse_pgm(pgm_bytes("P5\n1 2\n255\n", {10, 10}));
    CHECK(img.at(0, 0) == 10.0);
    CHECK(img.at(1, 0) == 10.0);
}

TEST_CASE("non-P5 magics are recognised but rejected") {
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P2\n1 1\n255\n", {'5'})), UnsupportedFormat);
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P6\n1 1\n255\n", {0, 0, 0})), UnsupportedFormat);
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P9\n1 1\n255\n", {0})), ParseError);
    CHECK_THROWS_AS(parse_pgm({'x'}), ParseError);
    CHECK_THROWS_AS(parse_pgm({}), ParseError);
}

TEST_CASE("deep maxval and malformed headers are rejected") {
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P5\n1 1\n65535\n", {0, 0})), UnsupportedFormat);
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P5\n0 1\n255\n", {})), ParseError);
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P5\n1 -1\n255\n", {0})), ParseError);
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P5\nab 1\n255\n", {0})), ParseError);
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P5\n1 1\n255", {})), ParseError);
}

TEST_CASE("payload must be exactly width*height bytes") {
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P5\n2 2\n255\n", {1, 2, 3})), ParseError);
    CHECK_THROWS_AS(parse_pgm(pgm_bytes("P5\n2 2\n255\n", {1, 2, 3, 4, 5})), ParseError);
}

TEST_CASE("serialization clamps and rounds") {
    GrayImage img = th::const_image(4, 1, 0.0);
    img.pixels = {-3.0, 270.0, 0.4, 0.5};
    std::vector<uint8_t> bytes = serialize_pgm(img);
    std::string header = "P5\n4 1\n255\n";
    REQUIRE(bytes.size() == header.size() + 4);
    CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
    CHECK(bytes[header.size() + 0] == 0);
    CHECK(bytes[header.size() + 1] == 255);
    CHECK(bytes[header.size() + 2] == 0);
    CHECK(bytes[header.size() + 3] == 1);
}

TEST_CASE("serialize then parse round trips integral images") {
    GrayImage img = th::random_image(16, 8, 3);
    GrayImage back = parse_pgm(serialize_pgm(img));
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("file round trip and missing-file error") {
    std::string path = "test_image_tmp.pgm";
    GrayImage img = th::random_image(8, 8, 11);
    save_pgm(img, path);
    GrayImage back = load_pgm(path);
    CHECK(back.pixels == img.pixels);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_pgm("no_such_file_anywhere.pgm"), IoError);
}

TEST_CASE("crop to common size takes the top-left region") {
    GrayImage a = th::random_image(6, 4, 1);
    GrayImage b = th::random_image(4, 6, 2);
    auto [ca, cb] = crop_to_common(a, b);
    CHECK(ca.width == 4);
    CHECK(ca.height == 4);
    CHECK(cb.width == 4);
    CHECK(cb.height == 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(ca.at(i, j) == a.at(i, j));
            CHECK(cb.at(i, j) == b.at(i, j));
        }

    auto [sa, sb] = crop_to_common(a, a);
    CHECK(sa.pixels == a.pixels);
    CHECK(sb.pixels == a.pixels);

    GrayImage empty;
    CHECK_THROWS_AS(crop_to_common(empty, a), ShapeError);
}
