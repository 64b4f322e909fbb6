#include "commands.hpp"

#include "vqnnf/codebook.hpp"
#include "vqnnf/error.hpp"
#include "vqnnf/features.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace vqnnf::cli {
namespace {

using nlohmann::json;

struct FeatureMode {
    FeatureSource source = FeatureSource::Color;
    std::optional<std::filesystem::path> dir;
};

FeatureMode parse_feature_mode(const std::string& s) {
    if (s == "color") return {};
    if (s == "file") return {FeatureSource::File, std::nullopt};
    if (s.rfind("file:", 0) == 0 && s.size() > 5) return {FeatureSource::File, std::filesystem::path(s.substr(5))};
    throw UsageError("--features must be color, file or file:<dir>, got '" + s + "'");
}

Box parse_box(const std::string& s) {
    Box b;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream in(s);
    if (!(in >> b.x >> c1 >> b.y >> c2 >> b.w >> c3 >> b.h) || c1 != ',' || c2 != ',' || c3 != ',' || !in.eof())
        throw UsageError("box must be x,y,w,h, got '" + s + "'");
    if (b.w < 1 || b.h < 1 || b.x < 0 || b.y < 0) throw UsageError("box '" + s + "' must have w,h >= 1 and x,y >= 0");
    return b;
}

void check_variants(const std::optional<double>& rotate_deg, const std::optional<double>& scale_factor,
                    const FeatureMode& mode) {
    if (rotate_deg && !(*rotate_deg > -360.0 && *rotate_deg < 360.0))
        throw UsageError("--rotate must lie in (-360, 360)");
    if (scale_factor && !(*scale_factor > 0.0 && *scale_factor <= 1.0))
        throw UsageError("--scale must lie in (0, 1]");
    if ((rotate_deg || scale_factor) && mode.source == FeatureSource::File)
        throw UsageError("--rotate and --scale need --features color");
}

void check_pca(const RunConfig& rc, int channels) {
    if (rc.pca_dim && *rc.pca_dim > channels)
        throw UsageError("--pca " + std::to_string(*rc.pca_dim) + " exceeds the feature dimension " +
                         std::to_string(channels));
}

std::filesystem::path feature_file(const std::filesystem::path& arg, const FeatureMode& mode) {
    if (mode.dir) return *mode.dir / (arg.stem().string() + ".vqnf");
    return arg;
}

FeatureMap load_template_map(const std::filesystem::path& arg, const std::optional<Box>& box, const FeatureMode& mode) {
    if (mode.source == FeatureSource::Color) {
        const Raster img = decode_image(arg);
        const Box b = box.value_or(Box{0, 0, img.width, img.height});
        if (!b.inside(img.width, img.height)) throw InvalidInput("template box lies outside " + arg.string());
        return crop(extract_color_features(img), b);
    }
    FeatureMap map = load_feature_map(feature_file(arg, mode));
    if (box && !(box->w == map.width && box->h == map.height)) map = crop(map, *box);
    return map;
}

json box_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace

MatchConfig to_match_config(const RunConfig& rc) {
    if (rc.k < 1) throw UsageError("--k must be >= 1");
    if (rc.scales < 1) throw UsageError("--scales must be >= 1");
    if (!(rc.sigma > 0.0) || !std::isfinite(rc.sigma)) throw UsageError("--sigma must be > 0");
    if (!(rc.haar_weight > 0.0) || !std::isfinite(rc.haar_weight)) throw UsageError("--haar-weight must be > 0");
    if (rc.threads < 1) throw UsageError("--threads must be >= 1");
    if (rc.max_iters < 1) throw UsageError("--max-iters must be >= 1");
    if (rc.pca_dim && *rc.pca_dim < 1) throw UsageError("--pca must be >= 1");
    MatchConfig mc;
    mc.k = rc.k;
    mc.scales = rc.scales;
    try {
        mc.filter_set = parse_filter_set(rc.filter_set);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    mc.sigma = rc.sigma;
    mc.uniform_gaussian = rc.uniform_gaussian;
    mc.haar_weight = rc.haar_weight;
    mc.max_iters = rc.max_iters;
    mc.seed = rc.seed;
    mc.threads = rc.threads;
    return mc;
}

int cmd_match(const MatchArgs& args, const RunConfig& rc, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        MatchConfig mc = to_match_config(rc);
        const FeatureMode mode = parse_feature_mode(rc.features);
        check_variants(args.rotate_deg, args.scale_factor, mode);
        if (mode.source == FeatureSource::Color) check_pca(rc, kColorFeatureChannels);

        PairFeatures feats;
        if (mode.source == FeatureSource::Color && (args.rotate_deg || args.scale_factor)) {
            PairData data;
            data.template_image = decode_image(args.template_path);
            data.query_image = decode_image(args.query_path);
            data.template_box = args.template_box.value_or(Box{0, 0, data.template_image.width, data.template_image.height});
            data.gt_box = {0, 0, data.query_image.width, data.query_image.height};
            if (!data.template_box.inside(data.template_image.width, data.template_image.height))
                throw InvalidInput("template box lies outside " + args.template_path.string());
            if (args.scale_factor) data = make_scale_variant(data, *args.scale_factor);
            if (args.rotate_deg) data = make_rotation_variant(data, *args.rotate_deg);
            feats = color_features(data);
        } else {
            feats.template_features = load_template_map(args.template_path, args.template_box, mode);
            feats.query_features = mode.source == FeatureSource::Color
                                       ? extract_color_features(decode_image(args.query_path))
                                       : load_feature_map(feature_file(args.query_path, mode));
        }
        check_pca(rc, feats.template_features.channels);
        if (rc.pca_dim) reduce_features(feats, *rc.pca_dim);

        mc.keep_heatmap = args.heatmap.has_value() || args.heatmap_pgm.has_value();
        const MatchOutput res = match(feats.template_features, feats.query_features, mc);
        const Box& b = res.result.box;

        if (args.heatmap) write_heatmap_raw(*res.result.heatmap, *args.heatmap);
        if (args.heatmap_pgm) write_heatmap_pgm(*res.result.heatmap, *args.heatmap_pgm);
        if (args.output) {
            json j;
            j["box"] = box_json(b);
            j["score"] = res.result.score;
            j["timings"] = {{"codebook_ms", res.timings.codebook_ms},
                            {"nnf_ms", res.timings.nnf_ms},
                            {"heatmap_ms", res.timings.heatmap_ms}};
            write_text(*args.output, j.dump(2));
        }
        out << "box " << b.x << ' ' << b.y << ' ' << b.w << ' ' << b.h << '\n';
        out << "score " << std::setprecision(17) << res.result.score << '\n';
        return kExitOk;
    });
}

int cmd_evaluate(const EvaluateArgs& args, const RunConfig& rc, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        EvalConfig ec;
        ec.match = to_match_config(rc);
        ec.match.threads = 1;
        ec.threads = rc.threads;
        const FeatureMode mode = parse_feature_mode(rc.features);
        ec.features = mode.source;
        ec.feature_dir = mode.dir;
        check_variants(args.rotate_deg, args.scale_factor, mode);
        if (mode.source == FeatureSource::Color) check_pca(rc, kColorFeatureChannels);
        ec.pca_dim = rc.pca_dim;
        ec.rotate_deg = args.rotate_deg;
        ec.scale_factor = args.scale_factor;

        std::vector<MatchPair> manifest;
        try {
            manifest = read_manifest(args.manifest);
        } catch (const FormatError& e) {
            throw UsageError(e.what());
        }
        if (manifest.empty()) throw UsageError("manifest " + args.manifest.string() + " has no pairs");

        const EvalReport report = evaluate(manifest, ec);
        if (args.output) write_text(*args.output, report_to_json(report));
        for (const auto& rec : report.pairs)
            if (!rec.ok()) err << "pair " << rec.index << " failed: " << rec.error << '\n';
        out << std::fixed << std::setprecision(4);
        out << "pairs " << report.evaluated << " evaluated, " << report.failed << " failed\n";
        out << "MIoU " << report.miou << '\n';
        out << "SR " << report.sr << '\n';
        out << "mean time " << report.mean_heatmap_seconds << " s\n";
        return report.failed > 0 ? kExitFailure : kExitOk;
    });
}

int cmd_codebook(const CodebookArgs& args, const RunConfig& rc, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const MatchConfig mc = to_match_config(rc);
        const FeatureMode mode = parse_feature_mode(rc.features);
        FeatureMap feats = load_template_map(args.template_path, args.template_box, mode);
        check_pca(rc, feats.channels);
        if (rc.pca_dim) feats = apply_pca(fit_pca(feats, *rc.pca_dim), feats);

        const Codebook cb = fit_codebook(feats, mc.k, mc.max_iters, mc.seed);
        const NnfLabelMap nnf = assign_nnf(feats, cb, mc.threads);
        write_text(args.output, codebook_to_json(cb));

        const int k = cb.k();
        std::vector<std::uint8_t> gray(nnf.labels.size());
        for (std::size_t i = 0; i < gray.size(); ++i)
            gray[i] = k > 1 ? static_cast<std::uint8_t>((nnf.labels[i] * 255 + (k - 1) / 2) / (k - 1)) : 0;
        std::filesystem::path pgm = args.nnf_pgm.value_or(std::filesystem::path(args.output).replace_extension(".pgm"));
        write_pgm(gray, nnf.width, nnf.height, pgm);

        out << "codebook k=" << k << " dim=" << cb.dim << " -> " << args.output.string() << '\n';
        out << "labels -> " << pgm.string() << '\n';
        return kExitOk;
    });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"VQ-NNF template matching", "vqnnf"};
    app.require_subcommand(1);

    RunConfig rc;
    std::optional<int> pca;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--k", rc.k, "codebook size")->capture_default_str();
        sub->add_option("--scales", rc.scales, "number of sub-scales S")->capture_default_str();
        sub->add_option("--filters", rc.filter_set, "gauss | 2rect | 3rect | 23rect")->capture_default_str();
        sub->add_option("--sigma", rc.sigma, "Gaussian sigma")->capture_default_str();
        sub->add_flag("--uniform-gaussian", rc.uniform_gaussian, "use the flat 1/9 Gaussian");
        sub->add_option("--haar-weight", rc.haar_weight, "w_f of the Haar filters")->capture_default_str();
        sub->add_option("--pca", pca, "reduce features to this dimension");
        sub->add_option("--seed", rc.seed, "random seed")->capture_default_str();
        sub->add_option("--threads", rc.threads, "worker threads")->capture_default_str();
        sub->add_option("--max-iters", rc.max_iters, "k-means iterations")->capture_default_str();
        sub->add_option("--features", rc.features, "color | file | file:<dir>")->capture_default_str();
    };

    MatchArgs margs;
    std::string mbox;
    std::string mout, mheat, mpgm;
    double mrot = 0.0, mscale = 1.0;
    auto* match_cmd = app.add_subcommand("match", "locate a template in a query image");
    match_cmd->add_option("template", margs.template_path, "template image (or VQNF file)")->required();
    match_cmd->add_option("query", margs.query_path, "query image (or VQNF file)")->required();
    auto* match_box = match_cmd->add_option("--template-box", mbox, "crop x,y,w,h from the template");
    auto* match_out = match_cmd->add_option("-o,--output", mout, "result JSON");
    auto* match_heat = match_cmd->add_option("--heatmap", mheat, "raw float32 heatmap");
    auto* match_pgm = match_cmd->add_option("--heatmap-pgm", mpgm, "8-bit heatmap preview");
    auto* match_rot = match_cmd->add_option("--rotate", mrot, "rotate the query (degrees)");
    auto* match_scale = match_cmd->add_option("--scale", mscale, "downsample both images");
    add_config(match_cmd);

    EvaluateArgs eargs;
    std::string eout;
    double erot = 0.0, escale = 1.0;
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a JSON Lines manifest");
    eval_cmd->add_option("manifest", eargs.manifest, "manifest path")->required();
    auto* eval_out = eval_cmd->add_option("-o,--output", eout, "report JSON");
    auto* eval_rot = eval_cmd->add_option("--rotate", erot, "rotate every query (degrees)");
    auto* eval_scale = eval_cmd->add_option("--scale", escale, "downsample every pair");
    add_config(eval_cmd);

    CodebookArgs cargs;
    std::string cbox, cpgm;
    auto* cb_cmd = app.add_subcommand("codebook", "fit and export a template codebook");
    cb_cmd->add_option("template", cargs.template_path, "template image (or VQNF file)")->required();
    auto* cb_box = cb_cmd->add_option("--template-box", cbox, "crop x,y,w,h from the template");
    cb_cmd->add_option("-o,--output", cargs.output, "codebook JSON")->required();
    auto* cb_pgm = cb_cmd->add_option("--nnf-pgm", cpgm, "label visualization");
    add_config(cb_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }
    rc.pca_dim = pca;

    try {
        if (*match_cmd) {
            if (*match_box) margs.template_box = parse_box(mbox);
            if (*match_out) margs.output = mout;
            if (*match_heat) margs.heatmap = mheat;
            if (*match_pgm) margs.heatmap_pgm = mpgm;
            if (*match_rot) margs.rotate_deg = mrot;
            if (*match_scale) margs.scale_factor = mscale;
            return cmd_match(margs, rc, out, err);
        }
        if (*eval_cmd) {
            if (*eval_out) eargs.output = eout;
            if (*eval_rot) eargs.rotate_deg = erot;
            if (*eval_scale) eargs.scale_factor = escale;
            return cmd_evaluate(eargs, rc, out, err);
        }
        if (*cb_box) cargs.template_box = parse_box(cbox);
        if (*cb_pgm) cargs.nnf_pgm = cpgm;
        return cmd_codebook(cargs, rc, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace vqnnf::cli
