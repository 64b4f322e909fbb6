#include "oracles.hpp"

#include "vqnnf/error.hpp"
#include "vqnnf/features.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

using namespace vqnnf;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

TEST_CASE("constant image gives the color repeated nine times") {
    Raster r(5, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) {
            r.at(x, y, 0) = 51;
            r.at(x, y, 1) = 102;
            r.at(x, y, 2) = 153;
        }
    const FeatureMap f = extract_color_features(r);
    REQUIRE(f.channels == 27);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) {
            const auto v = f.pixel(x, y);
            for (int i = 0; i < 27; i += 3) {
                CHECK(v[i] == doctest::Approx(0.2));
                CHECK(v[i + 1] == doctest::Approx(0.4));
                CHECK(v[i + 2] == doctest::Approx(0.6));
            }
        }
}

TEST_CASE("1x1 image replicates its pixel") {
    Raster r(1, 1);
    r.data = {10, 20, 30};
    const FeatureMap f = extract_color_features(r);
    for (int i = 0; i < 27; i += 3) {
        CHECK(f.pixel(0, 0)[i] == 10.0f / 255.0f);
        CHECK(f.pixel(0, 0)[i + 2] == 30.0f / 255.0f);
    }
}

TEST_CASE("3x3 image center holds all nine triples in row-major order") {
    Raster r(3, 3);
    for (int i = 0; i < 27; ++i) r.data[i] = static_cast<std::uint8_t>(i * 9);
    const FeatureMap f = extract_color_features(r);
    for (int i = 0; i < 27; ++i) CHECK(f.pixel(1, 1)[i] == static_cast<float>(i * 9) / 255.0f);
}

TEST_CASE("color features equal brute-force patch gathering with replicate padding") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const int W = oracle::uniform_int(rng, 1, 17), H = oracle::uniform_int(rng, 1, 17);
        const Raster r = oracle::random_raster(rng, W, H);
        const FeatureMap f = extract_color_features(r);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                int i = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int sx = std::min(std::max(x + dx, 0), W - 1);
                        const int sy = std::min(std::max(y + dy, 0), H - 1);
                        for (int c = 0; c < 3; ++c, ++i)
                            REQUIRE(f.pixel(x, y)[i] == static_cast<float>(r.at(sx, sy, c)) / 255.0f);
                    }
            }
    }
    CHECK_THROWS_AS(extract_color_features(Raster{}), InvalidInput);
}

TEST_CASE("VQNF files") {
    std::mt19937_64 rng(4);
    const auto path = std::filesystem::temp_directory_path() / "vqnnf_test_features.vqnf";

    SUBCASE("2x2x3 header with 12 floats") {
        FeatureMap m(2, 2, 3);
        for (int i = 0; i < 12; ++i) m.data[i] = static_cast<float>(i) * 0.5f;
        const auto bytes = encode_feature_map(m);
        CHECK(bytes.size() == 20 + 12 * 4);
        CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "VQNF");
        const FeatureMap back = decode_feature_map(bytes);
        CHECK(back.height == 2);
        CHECK(back.width == 2);
        CHECK(back.channels == 3);
        CHECK(back == m);
    }
    SUBCASE("random maps round trip bit-exactly through files") {
        for (int trial = 0; trial < 10; ++trial) {
            FeatureMap m = oracle::random_features(rng, oracle::uniform_int(rng, 1, 9), oracle::uniform_int(rng, 1, 9),
                                                   oracle::uniform_int(rng, 1, 30));
            for (auto& v : m.data) v = static_cast<float>(oracle::uniform_real(rng, -1e6, 1e6));
            save_feature_map(m, path);
            CHECK(load_feature_map(path) == m);
        }
        std::filesystem::remove(path);
    }
    SUBCASE("malformed files raise FormatError") {
        FeatureMap m(2, 2, 3);
        auto bytes = encode_feature_map(m);
        auto short_one = bytes;
        short_one.resize(short_one.size() - 4);
        CHECK_THROWS_AS(decode_feature_map(short_one), FormatError);
        auto extra = bytes;
        extra.push_back(0);
        CHECK_THROWS_AS(decode_feature_map(extra), FormatError);
        auto magic = bytes;
        magic[0] = 'X';
        CHECK_THROWS_AS(decode_feature_map(magic), FormatError);
        auto version = bytes;
        version[4] = 2;
        CHECK_THROWS_AS(decode_feature_map(version), FormatError);
        auto nan = bytes;
        const float q = std::numeric_limits<float>::quiet_NaN();
        std::memcpy(nan.data() + 20 + 8, &q, 4);
        CHECK_THROWS_WITH_AS(decode_feature_map(nan), doctest::Contains("28"), FormatError);
        CHECK_THROWS_AS(load_feature_map(path.string() + ".missing"), FormatError);
    }
}

TEST_CASE("fit_pca on rank-1 data reconstructs exactly") {
    FeatureMap m(10, 10, 4);
    const double dir[4] = {1.0, -2.0, 0.5, 3.0};
    std::mt19937_64 rng(9);
    for (std::size_t p = 0; p < m.pixels(); ++p) {
        const double t = oracle::uniform_real(rng, -1, 1);
        for (int c = 0; c < 4; ++c) m.data[p * 4 + c] = static_cast<float>(0.25 + t * dir[c]);
    }
    const PcaProjection proj = fit_pca(m, 1);
    const FeatureMap z = apply_pca(proj, m);
    for (std::size_t p = 0; p < m.pixels(); ++p) {
        for (int c = 0; c < 4; ++c) {
            const double rec = proj.mean[c] + z.data[p] * proj.component(0)[c];
            CHECK(rec == doctest::Approx(m.data[p * 4 + c]).epsilon(1e-6));
        }
    }
}

TEST_CASE("fit_pca matches a Jacobi eigendecomposition of the covariance") {
    std::mt19937_64 rng(33);
    const int C = 8, D = 3;
    FeatureMap m(20, 10, C);
    // Correlated samples: random mixing of independent sources with distinct scales.
    std::vector<double> mix(C * C);
    for (auto& v : mix) v = oracle::uniform_real(rng, -1, 1);
    for (std::size_t p = 0; p < m.pixels(); ++p) {
        double src[C];
        for (int i = 0; i < C; ++i) src[i] = oracle::uniform_real(rng, -1, 1) * (C - i);
        for (int c = 0; c < C; ++c) {
            double v = 0;
            for (int i = 0; i < C; ++i) v += mix[c * C + i] * src[i];
            m.data[p * C + c] = static_cast<float>(v);
        }
    }

    std::vector<double> mean(C, 0.0), cov(C * C, 0.0);
    const double n = static_cast<double>(m.pixels());
    for (std::size_t p = 0; p < m.pixels(); ++p)
        for (int c = 0; c < C; ++c) mean[c] += m.data[p * C + c] / n;
    for (std::size_t p = 0; p < m.pixels(); ++p)
        for (int a = 0; a < C; ++a)
            for (int b = 0; b < C; ++b)
                cov[a * C + b] += (m.data[p * C + a] - mean[a]) * (m.data[p * C + b] - mean[b]) / n;
    std::vector<double> values, vectors;
    oracle::jacobi_eigen(cov, C, values, vectors);

    const PcaProjection proj = fit_pca(m, D);
    REQUIRE(proj.output_dim == D);
    for (int i = 0; i < D; ++i) {
        CHECK(proj.explained_variance[i] == doctest::Approx(values[i]).epsilon(1e-6));
        const std::span<const double> ref(vectors.data() + i * C, C);
        CHECK(std::abs(dot(proj.component(i), ref)) == doctest::Approx(1.0).epsilon(1e-6));
        for (int j = 0; j < D; ++j)
            CHECK(dot(proj.component(i), proj.component(j)) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-6));
        if (i > 0) CHECK(proj.explained_variance[i] <= proj.explained_variance[i - 1]);
    }

    // Variance of the projected data along each component equals its eigenvalue.
    const FeatureMap z = apply_pca(proj, m);
    for (int i = 0; i < D; ++i) {
        double var = 0;
        for (std::size_t p = 0; p < z.pixels(); ++p) var += static_cast<double>(z.data[p * D + i]) * z.data[p * D + i] / n;
        CHECK(var == doctest::Approx(values[i]).epsilon(1e-5));
    }
}

TEST_CASE("apply_pca") {
    std::mt19937_64 rng(12);
    const FeatureMap m = oracle::random_features(rng, 12, 12, 5);

    SUBCASE("the mean maps to zero") {
        const PcaProjection proj = fit_pca(m, 3);
        FeatureMap one(1, 1, 5);
        for (int c = 0; c < 5; ++c) one.data[c] = static_cast<float>(proj.mean[c]);
        const FeatureMap z = apply_pca(proj, one);
        for (float v : z.data) CHECK(std::abs(v) < 1e-6);
    }
    SUBCASE("D = C preserves pairwise distances") {
        const PcaProjection proj = fit_pca(m, 5);
        const FeatureMap z = apply_pca(proj, m);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t a = oracle::uniform_int(rng, 0, 143), b = oracle::uniform_int(rng, 0, 143);
            double d0 = 0, d1 = 0;
            for (int c = 0; c < 5; ++c) {
                d0 += std::pow(m.data[a * 5 + c] - m.data[b * 5 + c], 2);
                d1 += std::pow(z.data[a * 5 + c] - z.data[b * 5 + c], 2);
            }
            CHECK(std::sqrt(d1) == doctest::Approx(std::sqrt(d0)).epsilon(1e-6));
        }
    }
    SUBCASE("per-pixel result equals the explicit matrix-vector product") {
        const PcaProjection proj = fit_pca(m, 2);
        const FeatureMap z = apply_pca(proj, m);
        for (std::size_t p = 0; p < m.pixels(); ++p)
            for (int i = 0; i < 2; ++i) {
                double v = 0;
                for (int c = 0; c < 5; ++c) v += proj.component(i)[c] * (m.data[p * 5 + c] - proj.mean[c]);
                CHECK(z.data[p * 2 + i] == static_cast<float>(v));
            }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(fit_pca(m, 6), InvalidInput);
        CHECK_THROWS_AS(fit_pca(m, 0), InvalidInput);
        CHECK_THROWS_AS(fit_pca(FeatureMap(1, 2, 5), 3), InvalidInput);
        const PcaProjection proj = fit_pca(m, 2);
        CHECK_THROWS_AS(apply_pca(proj, FeatureMap(2, 2, 4)), InvalidInput);
    }
}

TEST_CASE("feature map crop and validation") {
    std::mt19937_64 rng(2);
    const FeatureMap m = oracle::random_features(rng, 6, 5, 2);
    const FeatureMap c = crop(m, {1, 2, 3, 2});
    CHECK(c.width == 3);
    CHECK(c.height == 2);
    CHECK(c.pixel(2, 1)[1] == m.pixel(3, 3)[1]);
    CHECK_THROWS_AS(crop(m, {4, 0, 3, 1}), InvalidInput);

    FeatureMap bad = m;
    bad.data[3] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(validate(bad), InvalidInput);
    bad = m;
    bad.data.pop_back();
    CHECK_THROWS_AS(validate(bad), InvalidInput);
}
