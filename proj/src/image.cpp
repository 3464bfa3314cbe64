#include "gazeaug/image.hpp"

#include <algorithm>
#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <stdexcept>

namespace gazeaug {

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {
  if (w < 0 || h < 0 || (c != 1 && c != 3)) throw std::invalid_argument("invalid image dimensions");
}

void sample_bilinear(const Image& image, double x, double y, std::span<double> out, BorderMode border,
                     double background) {
  const double fx = x - 0.5;
  const double fy = y - 0.5;
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double ax = fx - x0f;
  const double ay = fy - y0f;
  const int x0 = static_cast<int>(x0f);
  const int y0 = static_cast<int>(y0f);

  auto tap = [&](int xi, int yi, int c) -> double {
    if (border == BorderMode::constant) {
      if (xi < 0 || yi < 0 || xi >= image.width || yi >= image.height) return background;
    } else {
      xi = std::clamp(xi, 0, image.width - 1);
      yi = std::clamp(yi, 0, image.height - 1);
    }
    return image.at(xi, yi, c);
  };

  for (int c = 0; c < image.channels; ++c) {
    const double top = (1.0 - ax) * tap(x0, y0, c) + ax * tap(x0 + 1, y0, c);
    const double bottom = (1.0 - ax) * tap(x0, y0 + 1, c) + ax * tap(x0 + 1, y0 + 1, c);
    out[static_cast<std::size_t>(c)] = (1.0 - ay) * top + ay * bottom;
  }
}

Image to_gray(const Image& image) {
  if (image.channels == 1) return image;
  Image out(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double v = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

Image load_image(const std::filesystem::path& path, ChannelMode mode) {
  const int flag = mode == ChannelMode::gray ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR;
  const cv::Mat mat = cv::imread(path.string(), flag);
  if (mat.empty()) throw std::runtime_error("cannot read image " + path.string());
  Image out(mat.cols, mat.rows, mat.channels());
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      if (out.channels == 1) {
        out.at(x, y) = row[x];
      } else {
        // BGR -> RGB
        out.at(x, y, 0) = row[3 * x + 2];
        out.at(x, y, 1) = row[3 * x + 1];
        out.at(x, y, 2) = row[3 * x + 0];
      }
    }
  }
  return out;
}

void save_png(const std::filesystem::path& path, const Image& image) {
  cv::Mat mat(image.height, image.width, image.channels == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      if (image.channels == 1) {
        row[x] = image.at(x, y);
      } else {
        row[3 * x + 2] = image.at(x, y, 0);
        row[3 * x + 1] = image.at(x, y, 1);
        row[3 * x + 0] = image.at(x, y, 2);
      }
    }
  }
  if (!cv::imwrite(path.string(), mat)) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace gazeaug
