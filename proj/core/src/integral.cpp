#include "vqnnf/integral.hpp"
#include "vqnnf/error.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <string>

namespace vqnnf {

void integral_plane(const NnfLabelMap& nnf, std::int32_t label, int row_begin, int row_end, int col_begin,
                    int col_end, std::span<std::uint32_t> out) {
    const int cols = col_end - col_begin;
    const std::size_t stride = static_cast<std::size_t>(cols) + 1;
    const int rows = row_end - row_begin;
    assert(out.size() >= (static_cast<std::size_t>(rows) + 1) * stride);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(stride), 0u);
    for (int r = 0; r < rows; ++r) {
        const std::int32_t* src = nnf.labels.data() + static_cast<std::size_t>(row_begin + r) * nnf.width + col_begin;
        const std::uint32_t* above = out.data() + static_cast<std::size_t>(r) * stride;
        std::uint32_t* row = out.data() + static_cast<std::size_t>(r + 1) * stride;
        std::uint32_t running = 0;
        row[0] = 0;
        for (int x = 0; x < cols; ++x) {
            running += src[x] == label ? 1u : 0u;
            row[x + 1] = above[x + 1] + running;
        }
    }
}

IntegralHistogram integral_histogram(const NnfLabelMap& nnf, int k) {
    if (k < 1) throw InvalidInput("integral_histogram: k must be >= 1");
    if (nnf.height < 1 || nnf.width < 1 || nnf.labels.size() != static_cast<std::size_t>(nnf.height) * nnf.width)
        throw InvalidInput("integral_histogram: malformed label map");
    assert(static_cast<unsigned long long>(nnf.height) * nnf.width <= std::numeric_limits<std::uint32_t>::max());
    for (std::size_t i = 0; i < nnf.labels.size(); ++i) {
        if (nnf.labels[i] < 0 || nnf.labels[i] >= k)
            throw InvalidInput("integral_histogram: label " + std::to_string(nnf.labels[i]) + " at pixel " +
                               std::to_string(i) + " outside [0, " + std::to_string(k) + ")");
    }

    IntegralHistogram ii;
    ii.height = nnf.height;
    ii.width = nnf.width;
    ii.k = k;
    ii.data.resize(static_cast<std::size_t>(k) * ii.plane_size());
    for (int c = 0; c < k; ++c) {
        integral_plane(nnf, c, 0, nnf.height,
                       std::span<std::uint32_t>(ii.data.data() + static_cast<std::size_t>(c) * ii.plane_size(), ii.plane_size()));
    }
    return ii;
}

std::vector<std::uint32_t> window_histogram(const IntegralHistogram& ii, const Box& rect) {
    if (!rect.inside(ii.width, ii.height))
        throw InvalidInput("window_histogram: rectangle (" + std::to_string(rect.x) + "," + std::to_string(rect.y) +
                           "," + std::to_string(rect.w) + "," + std::to_string(rect.h) + ") outside " +
                           std::to_string(ii.width) + "x" + std::to_string(ii.height));
    std::vector<std::uint32_t> out(ii.k);
    const int x2 = rect.x + rect.w;
    const int y2 = rect.y + rect.h;
    for (int c = 0; c < ii.k; ++c) out[c] = rect_count(ii.plane(c), ii.stride(), rect.x, rect.y, x2, y2);
    return out;
}

} // namespace vqnnf
