/**
 * @file features.hpp
 * @brief Per-pixel feature maps: native color features, VQNF file
 *        ingestion and PCA reduction.
 */
#pragma once

#include "vqnnf/imaging.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vqnnf {

/// H x W grid of C-dimensional feature vectors, row-major, channel-fastest.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(int h, int w, int c);

    [[nodiscard]] std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
    [[nodiscard]] std::span<const float> pixel(int x, int y) const {
        return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels, static_cast<std::size_t>(channels)};
    }
    [[nodiscard]] std::span<float> pixel(int x, int y) {
        return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels, static_cast<std::size_t>(channels)};
    }
    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

/// Throws InvalidInput unless dims are positive, the buffer length matches and
/// every value is finite.
void validate(const FeatureMap& map);

/// Number of channels produced by extract_color_features.
inline constexpr int kColorFeatureChannels = 27;

/// Concatenated RGB triples of each pixel's 3x3 neighbourhood (row-major,
/// replicate padding), with 8-bit values scaled to [0, 1].
FeatureMap extract_color_features(const Raster& image);

/// Sub-map covering `box`.
FeatureMap crop(const FeatureMap& map, const Box& box);

/// VQNF binary file: "VQNF", u32 version (1), u32 H, u32 W, u32 C, then
/// H*W*C little-endian float32 values.
FeatureMap load_feature_map(const std::filesystem::path& path);
FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes);
void save_feature_map(const FeatureMap& map, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_feature_map(const FeatureMap& map);

struct PcaProjection {
    int input_dim = 0;
    int output_dim = 0;
    std::vector<double> mean;               ///< input_dim
    std::vector<double> components;         ///< output_dim x input_dim, row-major, orthonormal rows
    std::vector<double> explained_variance; ///< output_dim, non-increasing

    [[nodiscard]] std::span<const double> component(int i) const {
        return {components.data() + static_cast<std::size_t>(i) * input_dim, static_cast<std::size_t>(input_dim)};
    }
};

/**
 * Top-`output_dim` principal directions of the samples' covariance (divisor
 * N). Each component's largest-magnitude entry is made positive so the
 * result is deterministic.
 */
PcaProjection fit_pca(const FeatureMap& samples, int output_dim);

/// Projects every pixel: v -> components * (v - mean).
FeatureMap apply_pca(const PcaProjection& proj, const FeatureMap& map);

} // namespace vqnnf
