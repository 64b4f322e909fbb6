/**
 * @file matching.hpp
 * @brief Template representation vectors, per-window query responses, the
 *        similarity heatmap and target localization.
 *
 * The score of a query window q against template t is
 *
 *     sim(q, t) = - sum_s sum_f w_{s,f} * || R_{s,f}(t) - R_{s,f}(q) ||_1
 *
 * where R_{s,f} is the k-vector of normalized responses of filter f at
 * scale s (one entry per codebook label). Only windows lying fully inside the
 * query are scored.
 */
#pragma once

#include "vqnnf/codebook.hpp"
#include "vqnnf/features.hpp"
#include "vqnnf/filters.hpp"
#include "vqnnf/imaging.hpp"
#include "vqnnf/integral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace vqnnf {

/// R_{s,f} for every (scale, filter) pair, k entries each.
struct ResponseSet {
    int scales = 0;
    int filters = 0;
    int k = 0;
    std::vector<double> values; ///< [scale][filter][label]

    [[nodiscard]] const double* vector(int s, int f) const {
        return values.data() + (static_cast<std::size_t>(s) * filters + f) * k;
    }
};

/// Per-placement responses for every (scale, filter) pair. Memory grows as
/// placements * scales * filters * k, so this is meant for small inputs;
/// `compute_heatmap` streams the same quantities without storing them.
struct QueryResponseMaps {
    int rows = 0; ///< placements vertically: H - h + 1
    int cols = 0; ///< placements horizontally: W - w + 1
    int scales = 0;
    int filters = 0;
    int k = 0;
    std::vector<double> values; ///< [scale][filter][placement][label]

    [[nodiscard]] const double* vector(int s, int f, int x, int y) const {
        const std::size_t placement = static_cast<std::size_t>(y) * cols + x;
        return values.data() + ((static_cast<std::size_t>(s) * filters + f) * rows * cols + placement) * k;
    }
};

struct SimilarityHeatmap {
    int rows = 0;
    int cols = 0;
    std::vector<double> scores; ///< row-major, one per top-left placement

    [[nodiscard]] double at(int x, int y) const { return scores[static_cast<std::size_t>(y) * cols + x]; }
    [[nodiscard]] bool empty() const { return scores.empty(); }
};

struct MatchResult {
    Box box;
    double score = 0.0;
    std::optional<SimilarityHeatmap> heatmap;
};

/// Wall-clock time of each stage after feature extraction, milliseconds.
struct MatchTimings {
    double codebook_ms = 0.0;
    double nnf_ms = 0.0;
    double heatmap_ms = 0.0; ///< integral histograms, filtering, scoring, localization

    [[nodiscard]] double total_ms() const { return codebook_ms + nnf_ms + heatmap_ms; }
};

struct MatchConfig {
    int k = kDefaultCodebookSize;
    int scales = kDefaultScales;
    FilterSet filter_set = FilterSet::Rect23;
    double sigma = kDefaultSigma;
    bool uniform_gaussian = false;
    double haar_weight = kHaarBaseWeight;
    int max_iters = kDefaultKMeansIterations;
    std::uint64_t seed = 0;
    int threads = 1;
    bool keep_heatmap = false;
};

/// Responses of the template's full window, fields centered per the plan.
ResponseSet template_responses(const IntegralHistogram& template_ii, const FilterPlan& plan);

QueryResponseMaps query_response_maps(const IntegralHistogram& query_ii, const FilterPlan& plan, int template_width,
                                      int template_height);

SimilarityHeatmap similarity_map(const ResponseSet& tr, const QueryResponseMaps& qr, const FilterPlan& plan);

/**
 * Streams the heatmap directly from the query label map: per band of
 * placement rows and per label, a band-local integral plane is built and
 * every (scale, filter) response is folded into the score. Scores are
 * bit-identical for any thread count.
 */
SimilarityHeatmap compute_heatmap(const ResponseSet& tr, const NnfLabelMap& query, const FilterPlan& plan,
                                  int threads = 1);

/// Placement with the highest score; ties go to the smallest y, then x.
MatchResult locate(const SimilarityHeatmap& heatmap, int template_width, int template_height);

struct MatchOutput {
    MatchResult result;
    MatchTimings timings;
    Codebook codebook;
};

/// Codebook -> NNFs -> integral histograms -> plan -> responses -> heatmap -> locate.
MatchOutput match(const FeatureMap& template_features, const FeatureMap& query_features, const MatchConfig& config);

/// Builds the plan `match` uses for a template of the given size.
FilterPlan make_plan(const MatchConfig& config, int template_width, int template_height);

/// Raw heatmap: u32 rows, u32 cols (little-endian), then rows*cols float32.
void write_heatmap_raw(const SimilarityHeatmap& heatmap, const std::filesystem::path& path);
SimilarityHeatmap read_heatmap_raw(const std::filesystem::path& path);
/// 8-bit PGM, min-max normalized (constant maps render mid-gray).
void write_heatmap_pgm(const SimilarityHeatmap& heatmap, const std::filesystem::path& path);

} // namespace vqnnf
