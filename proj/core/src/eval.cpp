#include "vqnnf/eval.hpp"
#include "vqnnf/error.hpp"
#include "vqnnf/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vqnnf {
namespace {

using nlohmann::json;

constexpr double kSnap = 1e-9;

Box box_from_json(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("missing \"") + key + "\"");
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 4) throw FormatError(std::string("\"") + key + "\" must be [x, y, w, h]");
    for (const auto& e : v)
        if (!e.is_number_integer()) throw FormatError(std::string("\"") + key + "\" must hold integers");
    Box b{v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
    if (b.w < 1 || b.h < 1) throw FormatError(std::string("\"") + key + "\" has non-positive size");
    return b;
}

std::filesystem::path path_from_json(const json& j, const char* key, const std::filesystem::path& base) {
    if (!j.contains(key)) throw FormatError(std::string("missing \"") + key + "\"");
    if (!j.at(key).is_string()) throw FormatError(std::string("\"") + key + "\" must be a string");
    std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_absolute() || base.empty() ? p : base / p;
}

json box_to_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

Box scale_box(const Box& b, double factor, int width, int height) {
    int x = static_cast<int>(std::floor(b.x * factor + kSnap));
    int y = static_cast<int>(std::floor(b.y * factor + kSnap));
    int w = static_cast<int>(std::ceil(b.w * factor - kSnap));
    int h = static_cast<int>(std::ceil(b.h * factor - kSnap));
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    w = std::clamp(w, 1, width - x);
    h = std::clamp(h, 1, height - y);
    return {x, y, w, h};
}

std::filesystem::path feature_path_for(const std::filesystem::path& image, const std::filesystem::path& dir) {
    return dir / (image.stem().string() + ".vqnf");
}

PairRecord run_pair(const MatchPair& pair, std::size_t index, const EvalConfig& config) {
    PairRecord rec;
    rec.index = index;
    rec.tag = pair.tag;
    rec.gt = pair.gt_box;
    try {
        PairFeatures feats;
        if (config.features == FeatureSource::Color) {
            PairData data = load_pair(pair);
            if (config.scale_factor) data = make_scale_variant(data, *config.scale_factor);
            if (config.rotate_deg) data = make_rotation_variant(data, *config.rotate_deg);
            rec.gt = data.gt_box;
            feats = color_features(data);
        } else {
            if (config.scale_factor || config.rotate_deg)
                throw InvalidInput("rotation and scale variants need image features, not precomputed files");
            feats = file_features(pair, config.feature_dir);
        }
        if (config.pca_dim) reduce_features(feats, *config.pca_dim);

        MatchConfig mc = config.match;
        mc.keep_heatmap = false;
        const MatchOutput out = match(feats.template_features, feats.query_features, mc);
        rec.predicted = out.result.box;
        rec.score = out.result.score;
        rec.timings = out.timings;
        rec.iou = iou(out.result.box, rec.gt);
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.predicted.reset();
    }
    return rec;
}

} // namespace

double iou(const Box& a, const Box& b) {
    if (a.w < 1 || a.h < 1 || b.w < 1 || b.h < 1) throw InvalidInput("iou: zero-area box");
    const long long inter = intersection_area(a, b);
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<MatchPair> parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    std::vector<MatchPair> pairs;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch); })) continue;
        try {
            const json j = json::parse(line);
            if (!j.is_object()) throw FormatError("entry must be a JSON object");
            MatchPair p;
            p.template_image = path_from_json(j, "template_image", base_dir);
            p.template_box = box_from_json(j, "template_box");
            p.query_image = path_from_json(j, "query_image", base_dir);
            p.gt_box = box_from_json(j, "gt_box");
            if (j.contains("template_features")) p.template_features = path_from_json(j, "template_features", base_dir);
            if (j.contains("query_features")) p.query_features = path_from_json(j, "query_features", base_dir);
            if (j.contains("tag")) {
                if (!j.at("tag").is_string()) throw FormatError("\"tag\" must be a string");
                p.tag = j.at("tag").get<std::string>();
            }
            pairs.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return pairs;
}

std::vector<MatchPair> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

PairData load_pair(const MatchPair& pair) {
    PairData d;
    d.template_image = decode_image(pair.template_image);
    d.query_image = decode_image(pair.query_image);
    d.template_box = pair.template_box;
    d.gt_box = pair.gt_box;
    if (!d.template_box.inside(d.template_image.width, d.template_image.height))
        throw InvalidInput("template box lies outside " + pair.template_image.string());
    if (!d.gt_box.inside(d.query_image.width, d.query_image.height))
        throw InvalidInput("gt box lies outside " + pair.query_image.string());
    return d;
}

PairData make_rotation_variant(const PairData& pair, double theta_deg) {
    PairData out = pair;
    out.query_image = rotate(pair.query_image, theta_deg);
    out.gt_box = rotate_box(pair.gt_box, pair.query_image.width, pair.query_image.height, theta_deg);
    return out;
}

PairData make_scale_variant(const PairData& pair, double factor) {
    if (!(factor > 0.0) || factor > 1.0) throw InvalidInput("make_scale_variant: factor must lie in (0, 1]");
    if (factor == 1.0) return pair;
    auto scaled = [factor](int n) { return std::max(1, static_cast<int>(std::lround(n * factor))); };

    PairData out;
    out.template_image = resize_bilinear(pair.template_image, scaled(pair.template_image.width),
                                         scaled(pair.template_image.height));
    out.query_image =
        resize_bilinear(pair.query_image, scaled(pair.query_image.width), scaled(pair.query_image.height));
    out.template_box = scale_box(pair.template_box, factor, out.template_image.width, out.template_image.height);
    out.gt_box = scale_box(pair.gt_box, factor, out.query_image.width, out.query_image.height);
    if (out.template_box.w < 4 || out.template_box.h < 4)
        throw InvalidInput("make_scale_variant: template shrinks to " + std::to_string(out.template_box.w) + "x" +
                           std::to_string(out.template_box.h) + ", below 4x4");
    return out;
}

PairFeatures color_features(const PairData& pair) {
    PairFeatures f;
    f.template_features = crop(extract_color_features(pair.template_image), pair.template_box);
    f.query_features = extract_color_features(pair.query_image);
    return f;
}

PairFeatures file_features(const MatchPair& pair, const std::optional<std::filesystem::path>& feature_dir) {
    auto resolve = [&](const std::optional<std::filesystem::path>& explicit_path, const std::filesystem::path& image) {
        if (explicit_path) return *explicit_path;
        if (feature_dir) return feature_path_for(image, *feature_dir);
        throw InvalidInput("no feature file for " + image.string());
    };
    PairFeatures f;
    FeatureMap t = load_feature_map(resolve(pair.template_features, pair.template_image));
    if (t.width == pair.template_box.w && t.height == pair.template_box.h)
        f.template_features = std::move(t);
    else
        f.template_features = crop(t, pair.template_box);
    f.query_features = load_feature_map(resolve(pair.query_features, pair.query_image));
    if (!pair.gt_box.inside(f.query_features.width, f.query_features.height))
        throw InvalidInput("gt box lies outside the query feature map");
    return f;
}

void reduce_features(PairFeatures& features, int output_dim) {
    const PcaProjection proj = fit_pca(features.template_features, output_dim);
    features.template_features = apply_pca(proj, features.template_features);
    features.query_features = apply_pca(proj, features.query_features);
}

EvalReport summarize(std::vector<PairRecord> records) {
    EvalReport r;
    double iou_sum = 0.0;
    double time_sum = 0.0;
    std::size_t success = 0;
    for (const auto& rec : records) {
        if (!rec.ok()) {
            ++r.failed;
            continue;
        }
        ++r.evaluated;
        iou_sum += rec.iou;
        time_sum += rec.timings.total_ms() / 1000.0;
        if (rec.iou > 0.5) ++success;
    }
    if (r.evaluated > 0) {
        const auto n = static_cast<double>(r.evaluated);
        r.miou = iou_sum / n;
        r.sr = static_cast<double>(success) / n;
        r.mean_heatmap_seconds = time_sum / n;
    }
    r.pairs = std::move(records);
    return r;
}

EvalReport evaluate(const std::vector<MatchPair>& manifest, const EvalConfig& config) {
    std::vector<PairRecord> records(manifest.size());
    detail::parallel_chunks(manifest.size(), config.threads,
                            [&](std::size_t i) { records[i] = run_pair(manifest[i], i, config); });
    return summarize(std::move(records));
}

std::string report_to_json(const EvalReport& report) {
    json pairs = json::array();
    for (const auto& rec : report.pairs) {
        json p;
        p["index"] = rec.index;
        if (!rec.tag.empty()) p["tag"] = rec.tag;
        p["gt_box"] = box_to_json(rec.gt);
        if (rec.ok()) {
            p["box"] = box_to_json(*rec.predicted);
            p["iou"] = rec.iou;
            p["score"] = rec.score;
            p["timings"] = {{"codebook_ms", rec.timings.codebook_ms},
                            {"nnf_ms", rec.timings.nnf_ms},
                            {"heatmap_ms", rec.timings.heatmap_ms}};
        } else {
            p["error"] = rec.error;
        }
        pairs.push_back(std::move(p));
    }
    json j;
    j["pairs"] = std::move(pairs);
    j["evaluated"] = report.evaluated;
    j["failed"] = report.failed;
    j["miou"] = report.miou;
    j["sr"] = report.sr;
    j["mean_heatmap_seconds"] = report.mean_heatmap_seconds;
    return j.dump(2);
}

} // namespace vqnnf
