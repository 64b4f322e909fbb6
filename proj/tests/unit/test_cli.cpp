#include "commands.hpp"
#include "oracles.hpp"

#include "vqnnf/codebook.hpp"
#include "vqnnf/features.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

using namespace vqnnf;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("vqnnf_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Fixture {
    fs::path dir;
    fs::path query;
    Box gt{37, 22, 30, 27};

    Fixture() : dir(scratch_dir("fixture")), query(dir / "query.png") {
        std::mt19937_64 rng(211);
        write_png(oracle::random_raster(rng, 110, 80), query);
    }
    ~Fixture() { fs::remove_all(dir); }

    [[nodiscard]] std::string box_arg() const {
        return std::to_string(gt.x) + "," + std::to_string(gt.y) + "," + std::to_string(gt.w) + "," + std::to_string(gt.h);
    }
};

} // namespace

TEST_CASE("match: a template cut from the query is found with score 0") {
    Fixture fx;
    const Run r = run({"match", fx.query.string(), fx.query.string(), "--template-box", fx.box_arg(), "--k", "32"});
    CHECK(r.code == 0);
    CHECK(r.out.find("box 37 22 30 27\n") != std::string::npos);
    CHECK(r.out.find("score 0\n") != std::string::npos);

    SUBCASE("whole-image template") {
        const Run w = run({"match", fx.query.string(), fx.query.string(), "--k", "16"});
        CHECK(w.code == 0);
        CHECK(w.out.find("box 0 0 110 80\n") != std::string::npos);
    }
    SUBCASE("histogram baseline flags") {
        const Run h = run({"match", fx.query.string(), fx.query.string(), "--template-box", fx.box_arg(), "--k", "32",
                           "--scales", "1", "--filters", "gauss", "--uniform-gaussian"});
        CHECK(h.code == 0);
        CHECK(h.out.find("score 0\n") != std::string::npos);
    }
    SUBCASE("PCA") {
        CHECK(run({"match", fx.query.string(), fx.query.string(), "--template-box", fx.box_arg(), "--pca", "9"}).code == 0);
        const Run bad = run({"match", fx.query.string(), fx.query.string(), "--template-box", fx.box_arg(), "--pca", "30"});
        CHECK(bad.code == 2);
        CHECK(bad.err.find("usage error") != std::string::npos);
    }
    SUBCASE("outputs") {
        const fs::path json_path = fx.dir / "res.json", raw = fx.dir / "heat.f32", pgm = fx.dir / "heat.pgm";
        const Run o = run({"match", fx.query.string(), fx.query.string(), "--template-box", fx.box_arg(), "--k", "32", "-o",
                           json_path.string(), "--heatmap", raw.string(), "--heatmap-pgm", pgm.string()});
        REQUIRE(o.code == 0);
        const auto j = nlohmann::json::parse(slurp(json_path));
        CHECK(j["box"] == nlohmann::json{37, 22, 30, 27});
        CHECK(j["score"] == 0.0);
        CHECK(j["timings"].contains("heatmap_ms"));
        const SimilarityHeatmap hm = read_heatmap_raw(raw);
        CHECK(hm.cols == 110 - 30 + 1);
        CHECK(hm.rows == 80 - 27 + 1);
        CHECK(slurp(pgm).rfind("P5\n81 54\n255\n", 0) == 0);
    }
    SUBCASE("results do not depend on the thread count") {
        std::vector<std::string> outs;
        for (const char* t : {"1", "3"}) {
            const fs::path p = fx.dir / (std::string("t") + t + ".json");
            REQUIRE(run({"match", fx.query.string(), fx.query.string(), "--template-box", fx.box_arg(), "--threads", t, "-o",
                         p.string()})
                        .code == 0);
            auto j = nlohmann::json::parse(slurp(p));
            j.erase("timings");
            outs.push_back(j.dump());
        }
        CHECK(outs[0] == outs[1]);
    }
    SUBCASE("rotated query") {
        const Run rot = run({"match", fx.query.string(), fx.query.string(), "--template-box", fx.box_arg(), "--rotate", "180"});
        CHECK(rot.code == 0);
    }
}

TEST_CASE("usage errors exit with 2") {
    Fixture fx;
    CHECK(run({}).code == 2);
    CHECK(run({"match", fx.query.string()}).code == 2);
    CHECK(run({"match", fx.query.string(), fx.query.string(), "--bogus"}).code == 2);
    CHECK(run({"match", fx.query.string(), fx.query.string(), "--k", "0"}).code == 2);
    CHECK(run({"match", fx.query.string(), fx.query.string(), "--filters", "4rect"}).code == 2);
    CHECK(run({"match", fx.query.string(), fx.query.string(), "--features", "file", "--rotate", "90"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"match", (fx.dir / "missing.png").string(), fx.query.string()}).code == 1);
}

TEST_CASE("evaluate") {
    Fixture fx;
    const fs::path empty = fx.dir / "empty.jsonl";
    std::ofstream(empty) << "\n";
    CHECK(run({"evaluate", empty.string()}).code == 2);

    const fs::path manifest = fx.dir / "m.jsonl";
    {
        std::ofstream m(manifest);
        for (int i = 0; i < 2; ++i)
            m << R"({"template_image": "query.png", "template_box": [37, 22, 30, 27], "query_image": "query.png", "gt_box": [37, 22, 30, 27]})"
              << '\n';
    }
    const fs::path report = fx.dir / "report.json";
    const Run r = run({"evaluate", manifest.string(), "--k", "32", "--threads", "2", "-o", report.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("pairs 2 evaluated, 0 failed") != std::string::npos);
    CHECK(r.out.find("MIoU 1.0000") != std::string::npos);
    CHECK(r.out.find("SR 1.0000") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(report))["miou"] == 1.0);

    const Run rot = run({"evaluate", manifest.string(), "--k", "32", "--rotate", "180"});
    CHECK(rot.code == 0);

    std::ofstream(manifest, std::ios::app)
        << R"({"template_image": "nope.png", "template_box": [0, 0, 8, 8], "query_image": "query.png", "gt_box": [0, 0, 8, 8]})"
        << '\n';
    const Run partial = run({"evaluate", manifest.string(), "--k", "8"});
    CHECK(partial.code == 1);
    CHECK(partial.err.find("pair 2 failed") != std::string::npos);
}

TEST_CASE("codebook") {
    Fixture fx;
    const fs::path out = fx.dir / "cb.json";

    SUBCASE("constant template with k=1 gives its feature vector") {
        const fs::path flat = fx.dir / "flat.ppm";
        write_ppm(Raster(12, 9, 77), flat);
        REQUIRE(run({"codebook", flat.string(), "--k", "1", "-o", out.string()}).code == 0);
        const Codebook cb = codebook_from_json(slurp(out));
        REQUIRE(cb.k() == 1);
        const FeatureMap f = extract_color_features(Raster(12, 9, 77));
        for (int d = 0; d < cb.dim; ++d) CHECK(cb.center(0)[d] == doctest::Approx(f.pixel(0, 0)[d]));
        CHECK(fs::exists(fx.dir / "cb.pgm"));
    }
    SUBCASE("four-color template gives four centers and a label image") {
        Raster img(16, 16);
        const std::uint8_t colors[4][3] = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 255}};
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = colors[(y / 8) * 2 + x / 8][c];
        const fs::path t = fx.dir / "quad.png";
        write_png(img, t);
        const fs::path pgm = fx.dir / "labels.pgm";
        const Run r = run({"codebook", t.string(), "--k", "4", "--features", "color", "-o", out.string(), "--nnf-pgm", pgm.string()});
        REQUIRE(r.code == 0);
        const Codebook cb = codebook_from_json(slurp(out));
        CHECK(cb.k() == 4);
        CHECK(codebook_from_json(codebook_to_json(cb)) == cb);
        const std::string bytes = slurp(pgm);
        CHECK(bytes.rfind("P5\n16 16\n255\n", 0) == 0);
        CHECK(bytes.size() == std::string("P5\n16 16\n255\n").size() + 256);
    }
}
