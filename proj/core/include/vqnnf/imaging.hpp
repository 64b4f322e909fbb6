/**
 * @file imaging.hpp
 * @brief Minimal raster I/O and geometry shared by feature extraction and
 *        the evaluation harness.
 *
 * Rasters are 8-bit RGB, row-major, channel-fastest. Only PNG and binary
 * PPM (P6) are decoded.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace vqnnf {

/// Axis-aligned pixel box: columns [x, x+w), rows [y, y+h).
struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    [[nodiscard]] long long area() const { return static_cast<long long>(w) * h; }
    [[nodiscard]] bool inside(int width, int height) const {
        return w >= 1 && h >= 1 && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
    }
    friend bool operator==(const Box&, const Box&) = default;
};

/// Area of the intersection of two boxes (0 when disjoint).
long long intersection_area(const Box& a, const Box& b);

struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // width * height * 3

    Raster() = default;
    Raster(int w, int h, std::uint8_t fill = 0);

    [[nodiscard]] bool empty() const { return width <= 0 || height <= 0; }
    [[nodiscard]] std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    [[nodiscard]] std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    friend bool operator==(const Raster&, const Raster&) = default;
};

/// Decodes a PNG or binary PPM file, sniffing the format from its magic bytes.
Raster decode_image(const std::filesystem::path& path);
/// Decodes from an in-memory buffer (same formats as decode_image).
Raster decode_image(const std::vector<std::uint8_t>& bytes);

void write_ppm(const Raster& r, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const Raster& r);
void write_png(const Raster& r, const std::filesystem::path& path);
/// 8-bit binary PGM (P5); `gray` holds width*height values.
void write_pgm(const std::vector<std::uint8_t>& gray, int width, int height,
               const std::filesystem::path& path);

Raster crop(const Raster& r, const Box& box);

/// Bilinear resampling with half-pixel-center alignment; edges clamp.
Raster resize_bilinear(const Raster& r, int new_width, int new_height);

/// Canvas size of a raster of the given size rotated by theta degrees
/// (expanded to fit). Exact for multiples of 90 degrees.
void rotated_extent(int width, int height, double theta_deg, int& out_width, int& out_height);

/**
 * Rotates about the image center onto an expanded canvas. Positive angles
 * turn clockwise as displayed (x right, y down), so 90 degrees maps pixel
 * (x, y) to (H-1-y, x). Multiples of 90 degrees are exact permutations;
 * other angles use bilinear sampling with black outside the source.
 */
Raster rotate(const Raster& r, double theta_deg);

/// Axis-aligned bounding box of `box` after the same rotation `rotate`
/// applies to an image of the given size, clamped to the rotated canvas.
Box rotate_box(const Box& box, int width, int height, double theta_deg);

} // namespace vqnnf
