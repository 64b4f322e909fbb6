/**
 * @file filters.hpp
 * @brief Coarse filter bank (Gaussian, Haar-like), conversion of coarse
 *        filters to dilated integral-image kernels, and sub-scale planning.
 *
 * A coarse filter is an r_h x r_w grid of weights, each applied to a whole
 * d_y x d_x bin of pixels. Its dilated kernel holds (r_h+1) x (r_w+1) corner
 * weights; applied at dilation (d_x, d_y) to an integral histogram it
 * reproduces the binned response with (r_h+1)(r_w+1) lookups per label.
 */
#pragma once

#include "vqnnf/imaging.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vqnnf {

inline constexpr double kDefaultSigma = 2.0;
inline constexpr double kGaussianBaseWeight = 1.0;
inline constexpr double kHaarBaseWeight = 0.25;
inline constexpr int kDefaultScales = 3;

struct CoarseFilter {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::vector<double> weights; ///< rows x cols, row-major
    double base_weight = 1.0;    ///< w_f in the score weighting

    [[nodiscard]] double at(int i, int j) const { return weights[static_cast<std::size_t>(i) * cols + j]; }
};

enum class HaarVariant { X2, Y2, X3, Y3 };
HaarVariant parse_haar_variant(std::string_view name); ///< "2x" | "2y" | "3x" | "3y"

enum class FilterSet { Gauss, Rect2, Rect3, Rect23 };
FilterSet parse_filter_set(std::string_view name); ///< "gauss" | "2rect" | "3rect" | "23rect"
std::string_view to_string(FilterSet set);

/// 3x3 kernel exp(-(x^2+y^2) / (2 sigma^2)) normalized to sum 1, or the flat
/// 1/9 kernel when `uniform` is set.
CoarseFilter make_gaussian_filter(double sigma, bool uniform);

/**
 * 3x3 Haar-like pattern multiplied elementwise by `gaussian`:
 *   2x: columns (+1, 0, -1)    2y: rows (+1, 0, -1)
 *   3x: columns (+1, -2, +1)   3y: rows (+1, -2, +1)
 */
CoarseFilter make_haar_filter(HaarVariant variant, const CoarseFilter& gaussian,
                              double base_weight = kHaarBaseWeight);

/// Gaussian first, then haar-2x, 2y, 3x, 3y as selected by the set.
std::vector<CoarseFilter> make_filter_bank(FilterSet set, double sigma, bool uniform_gaussian,
                                           double haar_weight = kHaarBaseWeight);

struct DilatedKernel {
    std::string source;
    int rows = 0; ///< kernel rows + 1
    int cols = 0; ///< kernel cols + 1
    std::vector<double> weights;

    [[nodiscard]] double at(int a, int b) const { return weights[static_cast<std::size_t>(a) * cols + b]; }
};

/// Adds kernel(i, j) * [[1, -1], [-1, 1]] into the 2x2 corner block at (i, j)
/// of a zero-initialized (rows+1) x (cols+1) grid, for every bin.
DilatedKernel to_dilated_kernel(const CoarseFilter& filter);

/// Geometry and weights of one aggregation scale.
struct ScalePlan {
    int scale = 1;
    int dilation_x = 1; ///< bin width in pixels
    int dilation_y = 1; ///< bin height in pixels
    int field_width = 0;  ///< kernel cols * dilation_x
    int field_height = 0; ///< kernel rows * dilation_y
    int offset_x = 0; ///< field origin relative to the window's top-left corner
    int offset_y = 0;
    double normalization = 1.0;  ///< 1 / (r_w d_x r_h d_y)
    std::vector<double> weights; ///< w_{s,f} = (1/s) w_f, one per filter
};

struct FilterPlan {
    int template_width = 0;
    int template_height = 0;
    int kernel_rows = 0;
    int kernel_cols = 0;
    std::vector<CoarseFilter> filters;
    std::vector<DilatedKernel> kernels;
    std::vector<ScalePlan> scales;

    [[nodiscard]] int filter_count() const { return static_cast<int>(filters.size()); }
    [[nodiscard]] int scale_count() const { return static_cast<int>(scales.size()); }
};

/**
 * Plans scales s = 1..S for a w x h template. At scale s the bins are
 * floor(floor(w/s) / r_w) x floor(floor(h/s) / r_h) pixels, so the field
 * covers about (w/s, h/s) and is centered on the window center
 * (top-left + floor((size-1)/2)). Throws InvalidInput naming the first scale
 * whose bins would be empty.
 */
FilterPlan plan_scales(int template_width, int template_height, int num_scales, std::vector<CoarseFilter> bank);

/// Scratch buffers reused across calls to dilated_responses_row.
struct ResponseScratch {
    std::vector<double> counts;
    std::vector<double> sums;
};

/**
 * Responses of every kernel at one scale for `n` field origins
 * (x0 + i, y0), i in [0, n), on a single integral plane. out[f * n + i]
 * receives normalization * sum_{a,b >= 1} kernel_f(a, b) * C(a, b) where
 * C(a, b) counts the label in the a*d_y x b*d_x rectangle anchored at the
 * origin. Row a = 0 and column b = 0 of each corner grid multiply empty
 * rectangles; every row and column of a dilated kernel sums to zero, so
 * anchoring at the field origin does not change the response and keeps it
 * independent of where the integral plane starts.
 */
void dilated_responses_row(const std::uint32_t* plane, std::size_t stride, int x0, int y0, int n,
                           const ScalePlan& scale, std::span<const DilatedKernel> kernels, ResponseScratch& scratch,
                           double* out);

/// Single-origin convenience wrapper around dilated_responses_row.
double dilated_response(const std::uint32_t* plane, std::size_t stride, int x0, int y0, const ScalePlan& scale,
                        const DilatedKernel& kernel);

} // namespace vqnnf
