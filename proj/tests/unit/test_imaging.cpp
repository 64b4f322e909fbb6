#include "oracles.hpp"

#include "vqnnf/error.hpp"
#include "vqnnf/imaging.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

using namespace vqnnf;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("vqnnf_test_imaging_" + name);
}

} // namespace

TEST_CASE("minimal white PPM decodes to one white pixel") {
    auto bytes = bytes_of("P6 1 1 255\n");
    bytes.insert(bytes.end(), {255, 255, 255});
    const Raster r = decode_image(bytes);
    CHECK(r.width == 1);
    CHECK(r.height == 1);
    CHECK(r.data == std::vector<std::uint8_t>{255, 255, 255});
}

TEST_CASE("PPM header comments are skipped") {
    auto bytes = bytes_of("P6\n# made by hand\n2 1\n255\n");
    bytes.insert(bytes.end(), {1, 2, 3, 4, 5, 6});
    const Raster r = decode_image(bytes);
    CHECK(r.width == 2);
    CHECK(r.at(1, 0, 2) == 6);
}

TEST_CASE("PPM and PNG round trips are bit-identical") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Raster r = oracle::random_raster(rng, oracle::uniform_int(rng, 1, 40), oracle::uniform_int(rng, 1, 40));
        CHECK(decode_image(encode_ppm(r)) == r);
        const auto png = temp_path("roundtrip.png");
        write_png(r, png);
        CHECK(decode_image(png) == r);
        const auto ppm = temp_path("roundtrip.ppm");
        write_ppm(r, ppm);
        CHECK(decode_image(ppm) == r);
        std::filesystem::remove(png);
        std::filesystem::remove(ppm);
    }
}

TEST_CASE("corrupt streams raise FormatError") {
    auto truncated = bytes_of("P6 2 2 255\n");
    truncated.insert(truncated.end(), 11, 0);
    CHECK_THROWS_AS(decode_image(truncated), FormatError);
    CHECK_THROWS_AS(decode_image(bytes_of("GIF89a")), FormatError);
    CHECK_THROWS_AS(decode_image(bytes_of("P3 1 1 255 0 0 0")), FormatError);
    std::vector<std::uint8_t> png_magic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n', 0, 0};
    CHECK_THROWS_AS(decode_image(png_magic), FormatError);
    CHECK_THROWS_AS(decode_image(temp_path("does-not-exist.png")), FormatError);
}

TEST_CASE("resize_bilinear") {
    std::mt19937_64 rng(11);
    SUBCASE("same dimensions is the identity") {
        const Raster r = oracle::random_raster(rng, 13, 9);
        CHECK(resize_bilinear(r, 13, 9) == r);
    }
    SUBCASE("constant raster stays constant") {
        const Raster r(7, 5, 93);
        for (auto [w, h] : {std::pair{1, 1}, {3, 11}, {20, 2}, {14, 10}}) {
            const Raster out = resize_bilinear(r, w, h);
            CHECK(out.width == w);
            CHECK(out.height == h);
            CHECK(std::all_of(out.data.begin(), out.data.end(), [](std::uint8_t v) { return v == 93; }));
        }
    }
    SUBCASE("2x1 [0, 255] upsampled to 4x1") {
        // Destination centers map to source x = -0.25, 0.25, 0.75, 1.25; the
        // outer two clamp, the inner two blend 255/4 and 3*255/4.
        Raster r(2, 1);
        r.at(1, 0, 0) = r.at(1, 0, 1) = r.at(1, 0, 2) = 255;
        const Raster out = resize_bilinear(r, 4, 1);
        const std::uint8_t expected[4] = {0, 64, 191, 255};
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) CHECK(out.at(x, 0, c) == expected[x]);
    }
    CHECK_THROWS_AS(resize_bilinear(Raster(2, 2), 0, 3), InvalidInput);
}

TEST_CASE("quarter-turn rotations are exact permutations") {
    std::mt19937_64 rng(3);
    const int W = 7, H = 4;
    const Raster r = oracle::random_raster(rng, W, H);

    CHECK(rotate(r, 0.0) == r);

    const Raster r180 = rotate(r, 180.0);
    REQUIRE(r180.width == W);
    REQUIRE(r180.height == H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) CHECK(r180.at(W - 1 - x, H - 1 - y, c) == r.at(x, y, c));

    const Raster r90 = rotate(r, 90.0);
    REQUIRE(r90.width == H);
    REQUIRE(r90.height == W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) CHECK(r90.at(H - 1 - y, x, c) == r.at(x, y, c));

    CHECK(rotate(rotate(rotate(rotate(r, 90.0), 90.0), 90.0), 90.0) == r);
    CHECK(rotate(r90, -90.0) == r);
    CHECK(rotate(r, 270.0) == rotate(r, -90.0));
}

TEST_CASE("arbitrary-angle rotation expands the canvas and fills with black") {
    const Raster r(20, 10, 200);
    const Raster out = rotate(r, 45.0);
    int w = 0, h = 0;
    rotated_extent(20, 10, 45.0, w, h);
    CHECK(out.width == w);
    CHECK(out.height == h);
    CHECK(w == 22); // ceil(30 / sqrt(2))
    CHECK(out.at(0, 0, 0) == 0);
    CHECK(out.at(w / 2, h / 2, 1) == 200);
}

TEST_CASE("rotate_box follows the corners") {
    const int W = 50, H = 30;
    const Box b{4, 7, 10, 6};
    CHECK(rotate_box(b, W, H, 0.0) == b);
    CHECK(rotate_box(b, W, H, 180.0) == Box{W - b.x - b.w, H - b.y - b.h, b.w, b.h});
    CHECK(rotate_box(b, 40, 40, 90.0) == Box{40 - b.y - b.h, b.x, b.h, b.w});
    CHECK(rotate_box(b, W, H, 90.0) == Box{H - b.y - b.h, b.x, b.h, b.w});

    SUBCASE("box rotation agrees with pixel rotation at 90 degrees") {
        Raster r(W, H);
        for (int y = b.y; y < b.y + b.h; ++y)
            for (int x = b.x; x < b.x + b.w; ++x) r.at(x, y, 0) = 255;
        const Raster rr = rotate(r, 90.0);
        const Box rb = rotate_box(b, W, H, 90.0);
        for (int y = 0; y < rr.height; ++y)
            for (int x = 0; x < rr.width; ++x) {
                const bool in = x >= rb.x && x < rb.x + rb.w && y >= rb.y && y < rb.y + rb.h;
                CHECK((rr.at(x, y, 0) == 255) == in);
            }
    }
}

TEST_CASE("box algebra") {
    CHECK(intersection_area({0, 0, 2, 2}, {1, 0, 2, 2}) == 2);
    CHECK(intersection_area({0, 0, 2, 2}, {5, 5, 2, 2}) == 0);
    CHECK(intersection_area({0, 0, 2, 2}, {2, 0, 2, 2}) == 0);
    CHECK(Box{1, 1, 3, 3}.inside(4, 4));
    CHECK_FALSE(Box{2, 1, 3, 3}.inside(4, 4));

    std::mt19937_64 rng(5);
    const Raster r = oracle::random_raster(rng, 9, 8);
    const Raster c = crop(r, {2, 3, 4, 5});
    CHECK(c.width == 4);
    CHECK(c.at(3, 4, 1) == r.at(5, 7, 1));
    CHECK_THROWS_AS(crop(r, {6, 0, 4, 1}), InvalidInput);
}
