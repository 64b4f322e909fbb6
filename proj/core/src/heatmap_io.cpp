#include "vqnnf/error.hpp"
#include "vqnnf/matching.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace vqnnf {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& bytes, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
    return v;
}

} // namespace

void write_heatmap_raw(const SimilarityHeatmap& heatmap, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 + heatmap.scores.size() * 4);
    put_u32(bytes, static_cast<std::uint32_t>(heatmap.rows));
    put_u32(bytes, static_cast<std::uint32_t>(heatmap.cols));
    for (double s : heatmap.scores) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

SimilarityHeatmap read_heatmap_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 8) throw FormatError("heatmap: truncated header at offset " + std::to_string(bytes.size()));
    SimilarityHeatmap h;
    h.rows = static_cast<int>(get_u32(bytes, 0));
    h.cols = static_cast<int>(get_u32(bytes, 4));
    const std::size_t n = static_cast<std::size_t>(h.rows) * h.cols;
    if (bytes.size() != 8 + n * 4)
        throw FormatError("heatmap: payload size mismatch at offset " + std::to_string(bytes.size()));
    h.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) h.scores[i] = std::bit_cast<float>(get_u32(bytes, 8 + i * 4));
    return h;
}

void write_heatmap_pgm(const SimilarityHeatmap& heatmap, const std::filesystem::path& path) {
    if (heatmap.empty()) throw InvalidInput("write_heatmap_pgm: empty heatmap");
    const auto [lo, hi] = std::minmax_element(heatmap.scores.begin(), heatmap.scores.end());
    const double range = *hi - *lo;
    std::vector<std::uint8_t> gray(heatmap.scores.size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double v = range > 0 ? (heatmap.scores[i] - *lo) / range * 255.0 : 127.0;
        gray[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    write_pgm(gray, heatmap.cols, heatmap.rows, path);
}

} // namespace vqnnf
