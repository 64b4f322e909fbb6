/**
 * @file eval.hpp
 * @brief Manifest-driven evaluation (IoU, MIoU, SR, timing) and the
 *        rotation / scale variant generators.
 */
#pragma once

#include "vqnnf/features.hpp"
#include "vqnnf/imaging.hpp"
#include "vqnnf/matching.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vqnnf {

/// One manifest entry. Paths are resolved against the manifest directory.
struct MatchPair {
    std::filesystem::path template_image;
    Box template_box;
    std::filesystem::path query_image;
    Box gt_box;
    std::optional<std::filesystem::path> template_features;
    std::optional<std::filesystem::path> query_features;
    std::string tag;
};

/// A pair with its images decoded; variants operate on this.
struct PairData {
    Raster template_image;
    Box template_box;
    Raster query_image;
    Box gt_box;
};

/// area(a ∩ b) / area(a ∪ b). Throws InvalidInput for a zero-area box.
double iou(const Box& a, const Box& b);

/// JSON Lines; blank lines are skipped. Errors name the 1-based line.
std::vector<MatchPair> parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
std::vector<MatchPair> read_manifest(const std::filesystem::path& path);

/// Decodes both images and checks that the boxes lie inside them.
PairData load_pair(const MatchPair& pair);

/// Query rotated by theta degrees (expanded canvas); gt replaced by the
/// axis-aligned bounding box of its rotated corners.
PairData make_rotation_variant(const PairData& pair, double theta_deg);

/// Both images downsampled by `factor` in (0, 1]; boxes scaled with floored
/// origins and ceiled extents, clamped inside. Throws InvalidInput when the
/// template box shrinks below 4x4.
PairData make_scale_variant(const PairData& pair, double factor);

enum class FeatureSource { Color, File };

struct EvalConfig {
    MatchConfig match;
    FeatureSource features = FeatureSource::Color;
    /// File mode without explicit per-pair paths: <dir>/<image stem>.vqnf
    std::optional<std::filesystem::path> feature_dir;
    std::optional<int> pca_dim;
    std::optional<double> rotate_deg;
    std::optional<double> scale_factor;
    int threads = 1; ///< pairs evaluated concurrently
};

/// Template (cropped to its box) and query features for one pair.
struct PairFeatures {
    FeatureMap template_features;
    FeatureMap query_features;
};

/// Color features of both images; the template map is cropped after
/// extraction so border pixels see their true neighbours.
PairFeatures color_features(const PairData& pair);

/// Loads VQNF features for a pair. A template map larger than the template
/// box is cropped to it.
PairFeatures file_features(const MatchPair& pair, const std::optional<std::filesystem::path>& feature_dir);

/// PCA fitted on the template features, applied to both maps.
void reduce_features(PairFeatures& features, int output_dim);

struct PairRecord {
    std::size_t index = 0;
    std::string tag;
    Box gt;
    std::optional<Box> predicted;
    double iou = 0.0;
    double score = 0.0;
    MatchTimings timings;
    std::string error; ///< non-empty when the pair failed

    [[nodiscard]] bool ok() const { return error.empty(); }
};

struct EvalReport {
    std::vector<PairRecord> pairs; ///< manifest order
    std::size_t evaluated = 0;
    std::size_t failed = 0;
    double miou = 0.0;
    double sr = 0.0; ///< fraction of evaluated pairs with IoU > 0.5
    double mean_heatmap_seconds = 0.0;
};

/// Aggregates over the successful records.
EvalReport summarize(std::vector<PairRecord> records);

EvalReport evaluate(const std::vector<MatchPair>& manifest, const EvalConfig& config);

/// {"pairs": [...], "evaluated", "failed", "miou", "sr", "mean_heatmap_seconds"}
std::string report_to_json(const EvalReport& report);

} // namespace vqnnf
