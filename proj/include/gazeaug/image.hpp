#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gazeaug {

/// 8-bit interleaved image, row-major, 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0);

  bool empty() const { return pixels.empty(); }
  std::uint8_t& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
};

using EyePatchImage = Image;

enum class ChannelMode { gray, rgb };

/// How samples outside the image are resolved.
enum class BorderMode { clamp, constant };

/// Bilinear lookup at continuous coordinates where pixel (i, j) has its
/// center at (i + 0.5, j + 0.5). Writes one value per channel into `out`.
/// With BorderMode::constant, any tap outside the image reads `background`.
void sample_bilinear(const Image& image, double x, double y, std::span<double> out,
                     BorderMode border = BorderMode::clamp, double background = 0.0);

/// ITU-R BT.601 luma.
Image to_gray(const Image& image);

/// Reads any format OpenCV understands. Throws std::runtime_error if the
/// file cannot be decoded.
Image load_image(const std::filesystem::path& path, ChannelMode mode);

/// Writes an 8-bit PNG. Throws std::runtime_error on failure.
void save_png(const std::filesystem::path& path, const Image& image);

}  // namespace gazeaug
