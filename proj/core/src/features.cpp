#include "vqnnf/features.hpp"
#include "vqnnf/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace vqnnf {

FeatureMap::FeatureMap(int h, int w, int c)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(std::max(h, 0)) * std::max(w, 0) * std::max(c, 0), 0.0f) {}

void validate(const FeatureMap& map) {
    if (map.height < 1 || map.width < 1 || map.channels < 1) throw InvalidInput("feature map dimensions must be >= 1");
    if (map.data.size() != map.pixels() * map.channels)
        throw InvalidInput("feature map data length does not match height*width*channels");
    for (std::size_t i = 0; i < map.data.size(); ++i) {
        if (!std::isfinite(map.data[i]))
            throw InvalidInput("feature map contains a non-finite value at element " + std::to_string(i));
    }
}

FeatureMap extract_color_features(const Raster& image) {
    if (image.empty() || image.data.size() != static_cast<std::size_t>(image.width) * image.height * 3)
        throw InvalidInput("extract_color_features: empty or malformed image");

    const int W = image.width;
    const int H = image.height;
    FeatureMap out(H, W, kColorFeatureChannels);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            float* dst = out.pixel(x, y).data();
            for (int dy = -1; dy <= 1; ++dy) {
                const int sy = std::clamp(y + dy, 0, H - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const int sx = std::clamp(x + dx, 0, W - 1);
                    for (int c = 0; c < 3; ++c) *dst++ = static_cast<float>(image.at(sx, sy, c)) / 255.0f;
                }
            }
        }
    }
    return out;
}

FeatureMap crop(const FeatureMap& map, const Box& box) {
    if (!box.inside(map.width, map.height)) throw InvalidInput("crop: box lies outside the feature map");
    FeatureMap out(box.h, box.w, map.channels);
    const std::size_t row = static_cast<std::size_t>(box.w) * map.channels;
    for (int y = 0; y < box.h; ++y) {
        const float* src = map.pixel(box.x, box.y + y).data();
        std::copy(src, src + row, out.data.data() + static_cast<std::size_t>(y) * row);
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'V', 'Q', 'N', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
    return v;
}

} // namespace

std::vector<std::uint8_t> encode_feature_map(const FeatureMap& map) {
    if (map.data.size() != map.pixels() * map.channels)
        throw InvalidInput("encode_feature_map: data length does not match dimensions");
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + map.data.size() * 4);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(map.height));
    put_u32(out, static_cast<std::uint32_t>(map.width));
    put_u32(out, static_cast<std::uint32_t>(map.channels));
    for (float f : map.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes)
        throw FormatError("VQNF: truncated header (" + std::to_string(bytes.size()) + " bytes, need 20) at offset " +
                          std::to_string(bytes.size()));
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
        throw FormatError("VQNF: bad magic at offset 0");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kVersion) throw FormatError("VQNF: unsupported version " + std::to_string(version) + " at offset 4");
    const std::uint32_t h = get_u32(bytes, 8);
    const std::uint32_t w = get_u32(bytes, 12);
    const std::uint32_t c = get_u32(bytes, 16);
    if (h == 0 || w == 0 || c == 0 || h > (1u << 20) || w > (1u << 20) || c > (1u << 16))
        throw FormatError("VQNF: invalid dimensions in header at offset 8");

    const std::uint64_t count = static_cast<std::uint64_t>(h) * w * c;
    const std::uint64_t need = kHeaderBytes + count * 4;
    if (bytes.size() < need)
        throw FormatError("VQNF: truncated payload at offset " + std::to_string(bytes.size()) + ", expected " +
                          std::to_string(need) + " bytes");
    if (bytes.size() > need)
        throw FormatError("VQNF: trailing bytes after payload at offset " + std::to_string(need));

    FeatureMap map(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t off = kHeaderBytes + static_cast<std::size_t>(i) * 4;
        const float f = std::bit_cast<float>(get_u32(bytes, off));
        if (!std::isfinite(f)) throw FormatError("VQNF: non-finite value at offset " + std::to_string(off));
        map.data[i] = f;
    }
    return map;
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return decode_feature_map(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_feature_map(const FeatureMap& map, const std::filesystem::path& path) {
    const auto bytes = encode_feature_map(map);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace vqnnf
