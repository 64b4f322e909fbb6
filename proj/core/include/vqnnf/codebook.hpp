/**
 * @file codebook.hpp
 * @brief Vector-quantized template codebook (k-means) and nearest-code
 *        label maps.
 */
#pragma once

#include "vqnnf/features.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vqnnf {

inline constexpr int kDefaultCodebookSize = 128;
inline constexpr int kDefaultKMeansIterations = 100;

struct Codebook {
    int dim = 0;
    std::uint64_t seed = 0;
    std::vector<double> centers; ///< k x dim, row-major

    [[nodiscard]] int k() const { return dim > 0 ? static_cast<int>(centers.size() / dim) : 0; }
    [[nodiscard]] std::span<const double> center(int i) const {
        return {centers.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
    friend bool operator==(const Codebook&, const Codebook&) = default;
};

/// Per-pixel nearest-code index, row-major.
struct NnfLabelMap {
    int height = 0;
    int width = 0;
    std::vector<std::int32_t> labels;

    [[nodiscard]] std::int32_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    friend bool operator==(const NnfLabelMap&, const NnfLabelMap&) = default;
};

/// Diagnostics from a k-means run.
struct KMeansTrace {
    std::vector<double> inertia; ///< sum of squared distances after each assignment step
    int iterations = 0;
    bool converged = false;
};

/**
 * Lloyd's k-means with k-means++ seeding drawn from `seed`.
 *
 * Stops after `max_iters` update/assign rounds or when assignments no longer
 * change. Clusters that end up empty are dropped, and seeding stops early
 * when every remaining point coincides with a chosen center, so the
 * effective k never exceeds the number of distinct feature vectors.
 */
Codebook fit_codebook(const FeatureMap& template_features, int k, int max_iters, std::uint64_t seed,
                      KMeansTrace* trace = nullptr);

/// Nearest center by squared L2 distance in double precision; ties go to the
/// lowest center index.
NnfLabelMap assign_nnf(const FeatureMap& features, const Codebook& codebook, int threads = 1);

/// {"k": .., "dim": .., "seed": .., "centers": [[..], ..]}
std::string codebook_to_json(const Codebook& codebook);
Codebook codebook_from_json(std::string_view json);

} // namespace vqnnf
