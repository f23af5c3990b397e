#include "bocr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>

#include "bocr/error.hpp"

namespace bocr {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
    if (width == 0 || height == 0) throw InvalidInput("image dimensions must be >= 1");
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width == 0 || height == 0) throw InvalidInput("image dimensions must be >= 1");
    if (pixels_.size() != width * height) throw InvalidInput("pixel count does not match size");
}

GrayImage GrayImage::crop(std::size_t left, std::size_t top, std::size_t right,
                          std::size_t bottom) const {
    if (left >= right || top >= bottom || right > width_ || bottom > height_) {
        throw InvalidInput("crop rectangle outside image");
    }
    GrayImage out(right - left, bottom - top);
    for (std::size_t y = top; y < bottom; ++y) {
        for (std::size_t x = left; x < right; ++x) out.at(x - left, y - top) = at(x, y);
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage &image, std::size_t width, std::size_t height) {
    if (image.empty()) throw InvalidInput("resize: empty image");
    const double sx = static_cast<double>(image.width()) / static_cast<double>(width);
    const double sy = static_cast<double>(image.height()) / static_cast<double>(height);
    auto sample_axis = [](double pos, std::size_t n, std::size_t &i0, std::size_t &i1, double &frac) {
        pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
        i0 = static_cast<std::size_t>(std::floor(pos));
        i1 = std::min(i0 + 1, n - 1);
        frac = pos - static_cast<double>(i0);
    };
    GrayImage out(width, height);
    for (std::size_t y = 0; y < height; ++y) {
        std::size_t y0, y1;
        double fy;
        sample_axis((static_cast<double>(y) + 0.5) * sy - 0.5, image.height(), y0, y1, fy);
        for (std::size_t x = 0; x < width; ++x) {
            std::size_t x0, x1;
            double fx;
            sample_axis((static_cast<double>(x) + 0.5) * sx - 0.5, image.width(), x0, x1, fx);
            const double top = (1 - fx) * image.at(x0, y0) + fx * image.at(x1, y0);
            const double bottom = (1 - fx) * image.at(x0, y1) + fx * image.at(x1, y1);
            const double v = (1 - fy) * top + fy * bottom;
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return out;
}

namespace {

std::vector<std::uint8_t> slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&]() -> std::size_t {
        skip_space_and_comments();
        std::size_t v = 0;
        const std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos]) && pos - start < 9) {
            v = v * 10 + (bytes[pos++] - '0');
        }
        if (pos == start) throw InvalidInput("PGM: malformed header");
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P') throw InvalidInput("not a PGM file");
    if (bytes[1] == '6' || bytes[1] == '3') {
        throw InvalidInput("colour PPM input; convert to 8-bit grayscale first");
    }
    if (bytes[1] != '5') throw InvalidInput("only binary PGM (P5) is supported");
    pos = 2;
    const std::size_t w = read_uint(), h = read_uint(), maxval = read_uint();
    if (maxval == 0 || maxval > 255) throw InvalidInput("PGM: only 8-bit maxval is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw InvalidInput("PGM: malformed header");
    ++pos;
    if (w == 0 || h == 0) throw InvalidInput("PGM: empty image");
    if (bytes.size() - pos < w * h) throw InvalidInput("PGM: truncated pixel data");
    std::vector<std::uint8_t> px(bytes.begin() + pos, bytes.begin() + pos + w * h);
    if (maxval != 255) {
        for (auto &p : px) p = static_cast<std::uint8_t>((p * 255 + maxval / 2) / maxval);
    }
    return GrayImage(w, h, std::move(px));
}

GrayImage read_pgm(const std::string &path) { return decode_pgm(slurp(path)); }

std::vector<std::uint8_t> encode_pgm(const GrayImage &image) {
    const std::string header =
        "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.pixels().begin(), image.pixels().end());
    return out;
}

void write_pgm(const GrayImage &image, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    const auto bytes = encode_pgm(image);
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

GrayImage read_png(const std::string &path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE *)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!fp) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp *png;
        png_infop *info;
        ~Guard() { png_destroy_read_struct(png, info, nullptr); }
    } guard{&png, &info};
    if (!info) throw IoError("libpng initialisation failed");

    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    if (setjmp(png_jmpbuf(png))) throw InvalidInput("PNG: corrupt file " + path);
    png_init_io(png, fp.get());
    png_read_info(png, info);
    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        throw InvalidInput("PNG " + path + " is not 8-bit grayscale; convert it first (e.g. "
                           "`convert in.png -colorspace Gray -depth 8 out.png`)");
    }
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    png_read_update_info(png, info);
    pixels.resize(static_cast<std::size_t>(w) * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return GrayImage(w, h, std::move(pixels));
}

GrayImage read_image(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char *>(sig), sizeof sig);
    if (in.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
    return read_pgm(path);
}

} // namespace bocr
