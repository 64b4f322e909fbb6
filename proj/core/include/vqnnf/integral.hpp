/**
 * @file integral.hpp
 * @brief Integral histograms over NNF label maps.
 *
 * Entry (y, x, c) counts label c in columns [0, x) and rows [0, y), so the
 * first row and column are zero and any rectangle's per-label counts come
 * from four lookups. The one-hot tensor is never materialized.
 */
#pragma once

#include "vqnnf/codebook.hpp"
#include "vqnnf/imaging.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace vqnnf {

struct IntegralHistogram {
    int height = 0; ///< label-map rows; the table has height + 1 rows
    int width = 0;  ///< label-map columns; the table has width + 1 columns
    int k = 0;
    std::vector<std::uint32_t> data; ///< k planes of (height+1) x (width+1)

    [[nodiscard]] std::size_t stride() const { return static_cast<std::size_t>(width) + 1; }
    [[nodiscard]] std::size_t plane_size() const { return (static_cast<std::size_t>(height) + 1) * stride(); }
    [[nodiscard]] const std::uint32_t* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * plane_size(); }
    [[nodiscard]] std::uint32_t at(int y, int x, int c) const { return plane(c)[static_cast<std::size_t>(y) * stride() + x]; }
};

IntegralHistogram integral_histogram(const NnfLabelMap& nnf, int k);

/// Per-label counts inside `rect` via the four-corner identity.
std::vector<std::uint32_t> window_histogram(const IntegralHistogram& ii, const Box& rect);

/// Count of label c in the rectangle, four lookups, no bounds checks.
inline std::uint32_t rect_count(const std::uint32_t* plane, std::size_t stride, int x1, int y1, int x2, int y2) {
    return plane[static_cast<std::size_t>(y2) * stride + x2] + plane[static_cast<std::size_t>(y1) * stride + x1] -
           plane[static_cast<std::size_t>(y1) * stride + x2] - plane[static_cast<std::size_t>(y2) * stride + x1];
}

/**
 * Integral plane of a single label over image rows [row_begin, row_end) and
 * columns [col_begin, col_end): (rows + 1) x (cols + 1) entries written to
 * `out`. Counts start at the region's corner, which leaves every rectangle
 * sum inside it unchanged.
 */
void integral_plane(const NnfLabelMap& nnf, std::int32_t label, int row_begin, int row_end, int col_begin,
                    int col_end, std::span<std::uint32_t> out);

/// Full-width variant: (row_end - row_begin + 1) x (width + 1) entries.
inline void integral_plane(const NnfLabelMap& nnf, std::int32_t label, int row_begin, int row_end,
                           std::span<std::uint32_t> out) {
    integral_plane(nnf, label, row_begin, row_end, 0, nnf.width, out);
}

} // namespace vqnnf
