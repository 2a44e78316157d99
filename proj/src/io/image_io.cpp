#include "holo/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "holo/errors.hpp"

namespace holo::io {

DecodedImage read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  DecodedImage out;
  out.linear = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  image.format = out.linear ? PNG_FORMAT_LINEAR_RGB : PNG_FORMAT_RGB;
  const std::size_t count = static_cast<std::size_t>(image.width) * image.height * 3;
  const Eigen::Index h = image.height, w = image.width;
  for (auto& plane : out.rgb) plane.resize(h, w);

  auto fill = [&](const auto& buffer, double full_scale) {
    for (Eigen::Index r = 0; r < h; ++r) {
      for (Eigen::Index c = 0; c < w; ++c) {
        const std::size_t base = static_cast<std::size_t>((r * w + c) * 3);
        for (int ch = 0; ch < 3; ++ch) out.rgb[ch](r, c) = buffer[base + ch] / full_scale;
      }
    }
  };
  if (out.linear) {
    std::vector<png_uint_16> buffer(count);
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
      throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    fill(buffer, 65535.0);
  } else {
    std::vector<png_byte> buffer(count);
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
      throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    fill(buffer, 255.0);
  }
  return out;
}

void write_png16(const std::filesystem::path& path, const RealGrid& unit_values) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(unit_values.cols());
  image.height = static_cast<png_uint_32>(unit_values.rows());
  image.format = PNG_FORMAT_LINEAR_Y;
  std::vector<png_uint_16> buffer(static_cast<std::size_t>(unit_values.size()));
  for (Eigen::Index i = 0; i < unit_values.size(); ++i) {
    const double v = std::clamp(unit_values.data()[i], 0.0, 1.0);
    buffer[static_cast<std::size_t>(i)] = static_cast<png_uint_16>(std::lround(v * 65535.0));
  }
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

void write_pfm(const std::filesystem::path& path, const RealGrid& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "Pf\n" << values.cols() << " " << values.rows() << "\n-1.0\n";
  std::vector<char> row(static_cast<std::size_t>(values.cols()) * 4);
  for (Eigen::Index r = values.rows() - 1; r >= 0; --r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values(r, c)));
      for (int b = 0; b < 4; ++b) row[static_cast<std::size_t>(c * 4 + b)] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw IoError("failed writing " + path.string());
}

RealGrid read_pfm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string magic;
  Eigen::Index w = 0, h = 0;
  double scale = 0;
  is >> magic >> w >> h >> scale;
  is.get();
  if (magic != "Pf" || w <= 0 || h <= 0 || scale == 0) throw IoError(path.string() + " is not a grayscale PFM");
  const bool little = scale < 0;
  RealGrid out(h, w);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 4);
  for (Eigen::Index r = h - 1; r >= 0; --r) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!is) throw IoError(path.string() + " is truncated");
    for (Eigen::Index c = 0; c < w; ++c) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const int shift = little ? 8 * b : 8 * (3 - b);
        bits |= static_cast<std::uint32_t>(row[static_cast<std::size_t>(c * 4 + b)]) << shift;
      }
      out(r, c) = std::bit_cast<float>(bits);
    }
  }
  return out;
}

}  // namespace holo::io
