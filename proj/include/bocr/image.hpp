#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bocr {

// 8-bit grayscale, row-major, 0 = black ink, 255 = white paper.
class GrayImage {
  public:
    GrayImage() = default;
    // Throws InvalidInput for zero dimensions.
    GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 255);
    GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    bool empty() const { return pixels_.empty(); }

    std::uint8_t &at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }

    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    // Copy of [left, right) × [top, bottom).
    GrayImage crop(std::size_t left, std::size_t top, std::size_t right, std::size_t bottom) const;

    bool operator==(const GrayImage &) const = default;

  private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// Bilinear resample with pixel-centre alignment.
GrayImage resize_bilinear(const GrayImage &image, std::size_t width, std::size_t height);

// Binary PGM (P5, maxval <= 255).
GrayImage read_pgm(const std::string &path);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
void write_pgm(const GrayImage &image, const std::string &path);
std::vector<std::uint8_t> encode_pgm(const GrayImage &image);

// 8-bit grayscale PNG; colour inputs are rejected.
GrayImage read_png(const std::string &path);

// Dispatches on the file signature.
GrayImage read_image(const std::string &path);

} // namespace bocr
