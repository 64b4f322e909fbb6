#include "vqnnf/imaging.hpp"
#include "vqnnf/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <string>

namespace vqnnf {

long long intersection_area(const Box& a, const Box& b) {
    const long long x0 = std::max(a.x, b.x);
    const long long y0 = std::max(a.y, b.y);
    const long long x1 = std::min(static_cast<long long>(a.x) + a.w, static_cast<long long>(b.x) + b.w);
    const long long y1 = std::min(static_cast<long long>(a.y) + a.h, static_cast<long long>(b.y) + b.h);
    if (x1 <= x0 || y1 <= y0) return 0;
    return (x1 - x0) * (y1 - y0);
}

Raster::Raster(int w, int h, std::uint8_t fill)
    : width(w), height(h), data(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0) * 3, fill) {}

namespace {

// ---------------------------------------------------------------------------
// PPM
// ---------------------------------------------------------------------------

class PpmHeaderReader {
public:
    explicit PpmHeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
            throw FormatError("PPM: malformed header at byte offset " + std::to_string(pos_));
        long long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000) throw FormatError("PPM: header value too large");
            ++pos_;
        }
        return static_cast<int>(v);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t payload_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw FormatError("PPM: missing separator before payload at byte offset " + std::to_string(pos_));
        return pos_ + 1;
    }

    std::size_t pos_ = 2;

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
};

Raster decode_ppm(const std::vector<std::uint8_t>& bytes) {
    PpmHeaderReader reader(bytes);
    const int w = reader.next_int();
    const int h = reader.next_int();
    const int maxval = reader.next_int();
    if (w < 1 || h < 1) throw FormatError("PPM: image dimensions must be positive");
    if (maxval < 1 || maxval > 255) throw FormatError("PPM: only 8-bit maxval (1..255) is supported");
    const std::size_t off = reader.payload_offset();
    const std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (bytes.size() < off + need)
        throw FormatError("PPM: truncated payload, expected " + std::to_string(need) + " bytes at offset " +
                          std::to_string(off) + ", found " + std::to_string(bytes.size() - std::min(bytes.size(), off)));
    Raster r(w, h);
    std::memcpy(r.data.data(), bytes.data() + off, need);
    if (maxval != 255) {
        for (auto& v : r.data) {
            if (v > maxval) throw FormatError("PPM: sample exceeds maxval");
            v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// PNG (libpng)
// ---------------------------------------------------------------------------

struct PngMemorySource {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
    auto* src = static_cast<PngMemorySource*>(png_get_io_ptr(png));
    if (src->pos + n > src->size) png_error(png, "truncated PNG stream");
    std::memcpy(out, src->data + src->pos, n);
    src->pos += n;
}

void png_error_to_longjmp(png_structp png, png_const_charp msg) {
    auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
    if (buf) *buf = msg;
    png_longjmp(png, 1);
}

void png_warning_silent(png_structp, png_const_charp) {}

Raster decode_png(const std::vector<std::uint8_t>& bytes) {
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_to_longjmp,
                                             png_warning_silent);
    if (!png) throw FormatError("PNG: failed to create read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("PNG: failed to create info struct");
    }

    PngMemorySource src{bytes.data(), bytes.size(), 0};
    Raster r;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("PNG: " + (message.empty() ? std::string("corrupt stream") : message));
    }

    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 3) png_error(png, "unexpected row layout");

    r = Raster(static_cast<int>(w), static_cast<int>(h));
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = r.data.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return r;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

bool is_quarter_turn(double theta_deg, int& quarter) {
    double t = std::fmod(theta_deg, 360.0);
    if (t < 0) t += 360.0;
    const double q = std::round(t / 90.0);
    if (std::abs(t - q * 90.0) > 1e-9) return false;
    quarter = static_cast<int>(q) % 4;
    return true;
}

void rotation_cos_sin(double theta_deg, double& c, double& s) {
    int quarter = 0;
    if (is_quarter_turn(theta_deg, quarter)) {
        static constexpr std::array<double, 4> kCos{1, 0, -1, 0};
        static constexpr std::array<double, 4> kSin{0, 1, 0, -1};
        c = kCos[quarter];
        s = kSin[quarter];
        return;
    }
    const double rad = theta_deg * std::numbers::pi / 180.0;
    c = std::cos(rad);
    s = std::sin(rad);
}

double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

} // namespace

Raster decode_image(const std::vector<std::uint8_t>& bytes) {
    static constexpr std::array<std::uint8_t, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= kPngMagic.size() && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin()))
        return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
    throw FormatError("unsupported image format (expected PNG or binary PPM)");
}

Raster decode_image(const std::filesystem::path& path) {
    try {
        return decode_image(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_ppm(const Raster& r) {
    const std::string header = "P6\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), r.data.begin(), r.data.end());
    return out;
}

void write_ppm(const Raster& r, const std::filesystem::path& path) { write_file(path, encode_ppm(r)); }

void write_pgm(const std::vector<std::uint8_t>& gray, int width, int height, const std::filesystem::path& path) {
    if (gray.size() != static_cast<std::size_t>(width) * height)
        throw InvalidInput("write_pgm: buffer size does not match dimensions");
    const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), gray.begin(), gray.end());
    write_file(path, out);
}

void write_png(const Raster& r, const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw std::runtime_error("cannot write " + path.string());

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_to_longjmp,
                                              png_warning_silent);
    if (!png) throw std::runtime_error("PNG: failed to create write struct");
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows(r.height);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG write failed: " + message);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, r.width, r.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < r.height; ++y)
        rows[y] = const_cast<png_bytep>(r.data.data() + static_cast<std::size_t>(y) * r.width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Raster crop(const Raster& r, const Box& box) {
    if (!box.inside(r.width, r.height)) throw InvalidInput("crop: box lies outside the raster");
    Raster out(box.w, box.h);
    for (int y = 0; y < box.h; ++y) {
        const auto* src = &r.data[(static_cast<std::size_t>(box.y + y) * r.width + box.x) * 3];
        std::copy(src, src + static_cast<std::size_t>(box.w) * 3, &out.data[static_cast<std::size_t>(y) * box.w * 3]);
    }
    return out;
}

Raster resize_bilinear(const Raster& r, int new_width, int new_height) {
    if (r.empty()) throw InvalidInput("resize_bilinear: empty raster");
    if (new_width < 1 || new_height < 1) throw InvalidInput("resize_bilinear: target dimensions must be >= 1");
    if (new_width == r.width && new_height == r.height) return r;

    struct Tap {
        int i0, i1;
        double f;
    };
    auto taps = [](int src_size, int dst_size) {
        std::vector<Tap> t(dst_size);
        const double scale = static_cast<double>(src_size) / dst_size;
        for (int d = 0; d < dst_size; ++d) {
            double s = (d + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
            const int i0 = static_cast<int>(std::floor(s));
            t[d] = {i0, std::min(i0 + 1, src_size - 1), s - i0};
        }
        return t;
    };
    const auto tx = taps(r.width, new_width);
    const auto ty = taps(r.height, new_height);

    Raster out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        const Tap& vy = ty[y];
        for (int x = 0; x < new_width; ++x) {
            const Tap& vx = tx[x];
            for (int c = 0; c < 3; ++c) {
                const double top = r.at(vx.i0, vy.i0, c) * (1.0 - vx.f) + r.at(vx.i1, vy.i0, c) * vx.f;
                const double bot = r.at(vx.i0, vy.i1, c) * (1.0 - vx.f) + r.at(vx.i1, vy.i1, c) * vx.f;
                const double v = top * (1.0 - vy.f) + bot * vy.f;
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

void rotated_extent(int width, int height, double theta_deg, int& out_width, int& out_height) {
    double c = 0, s = 0;
    rotation_cos_sin(theta_deg, c, s);
    out_width = std::max(1, static_cast<int>(std::ceil(snap(std::abs(width * c) + std::abs(height * s)))));
    out_height = std::max(1, static_cast<int>(std::ceil(snap(std::abs(width * s) + std::abs(height * c)))));
}

Raster rotate(const Raster& r, double theta_deg) {
    if (r.empty()) throw InvalidInput("rotate: empty raster");
    const int W = r.width;
    const int H = r.height;

    int quarter = 0;
    if (is_quarter_turn(theta_deg, quarter)) {
        if (quarter == 0) return r;
        Raster out = quarter == 2 ? Raster(W, H) : Raster(H, W);
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                int sx = 0, sy = 0;
                switch (quarter) {
                case 1: sx = y; sy = H - 1 - x; break;
                case 2: sx = W - 1 - x; sy = H - 1 - y; break;
                default: sx = W - 1 - y; sy = x; break;
                }
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = r.at(sx, sy, c);
            }
        }
        return out;
    }

    int W2 = 0, H2 = 0;
    rotated_extent(W, H, theta_deg, W2, H2);
    double c = 0, s = 0;
    rotation_cos_sin(theta_deg, c, s);

    auto sample = [&](int x, int y, int ch) -> double {
        if (x < 0 || y < 0 || x >= W || y >= H) return 0.0;
        return r.at(x, y, ch);
    };

    Raster out(W2, H2);
    for (int y = 0; y < H2; ++y) {
        for (int x = 0; x < W2; ++x) {
            const double u = x + 0.5 - W2 / 2.0;
            const double v = y + 0.5 - H2 / 2.0;
            // inverse rotation back into the source, pixel-center coordinates
            const double sx = c * u + s * v + W / 2.0 - 0.5;
            const double sy = -s * u + c * v + H / 2.0 - 0.5;
            if (sx <= -1.0 || sy <= -1.0 || sx >= W || sy >= H) continue;
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0;
            const double fy = sy - y0;
            for (int ch = 0; ch < 3; ++ch) {
                const double top = sample(x0, y0, ch) * (1 - fx) + sample(x0 + 1, y0, ch) * fx;
                const double bot = sample(x0, y0 + 1, ch) * (1 - fx) + sample(x0 + 1, y0 + 1, ch) * fx;
                const double val = top * (1 - fy) + bot * fy;
                out.at(x, y, ch) = static_cast<std::uint8_t>(std::clamp(std::floor(val + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

Box rotate_box(const Box& box, int width, int height, double theta_deg) {
    int W2 = 0, H2 = 0;
    rotated_extent(width, height, theta_deg, W2, H2);
    double c = 0, s = 0;
    rotation_cos_sin(theta_deg, c, s);

    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    const std::array<double, 2> xs{static_cast<double>(box.x), static_cast<double>(box.x) + box.w};
    const std::array<double, 2> ys{static_cast<double>(box.y), static_cast<double>(box.y) + box.h};
    for (double px : xs) {
        for (double py : ys) {
            const double u = px - width / 2.0;
            const double v = py - height / 2.0;
            const double qx = snap(c * u - s * v + W2 / 2.0);
            const double qy = snap(s * u + c * v + H2 / 2.0);
            min_x = std::min(min_x, qx);
            max_x = std::max(max_x, qx);
            min_y = std::min(min_y, qy);
            max_y = std::max(max_y, qy);
        }
    }
    const int x0 = std::clamp(static_cast<int>(std::floor(min_x)), 0, W2 - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(min_y)), 0, H2 - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(max_x)), x0 + 1, W2);
    const int y1 = std::clamp(static_cast<int>(std::ceil(max_y)), y0 + 1, H2);
    return {x0, y0, x1 - x0, y1 - y0};
}

} // namespace vqnnf
