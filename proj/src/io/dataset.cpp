#include "holo/io/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "holo/errors.hpp"
#include "holo/io/image_io.hpp"

namespace holo::io {

double srgb_to_linear(double encoded) {
  return encoded <= 0.04045 ? encoded / 12.92 : std::pow((encoded + 0.055) / 1.055, 2.4);
}

RealGrid center_crop(const RealGrid& img) {
  const Eigen::Index s = std::min(img.rows(), img.cols());
  return img.block((img.rows() - s) / 2, (img.cols() - s) / 2, s, s);
}

namespace {

// weights(i, j): fraction of output cell i covered by input cell j.
Eigen::MatrixXd area_weights(Eigen::Index in, Eigen::Index out) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(out, in);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (Eigen::Index i = 0; i < out; ++i) {
    const double lo = i * ratio, hi = (i + 1) * ratio;
    for (auto j = static_cast<Eigen::Index>(std::floor(lo)); j < std::min<Eigen::Index>(in, std::ceil(hi)); ++j) {
      const double overlap = std::min<double>(hi, j + 1) - std::max<double>(lo, j);
      if (overlap > 0) w(i, j) = overlap / ratio;
    }
  }
  return w;
}

struct Planes {
  std::array<RealGrid, 3> linear;
};

Planes decode_linear(const std::filesystem::path& file) {
  DecodedImage img = read_png(file);
  Planes p;
  for (int c = 0; c < 3; ++c) {
    p.linear[c] = img.linear ? img.rgb[c] : RealGrid(img.rgb[c].unaryExpr(&srgb_to_linear));
  }
  return p;
}

RealGrid prepare(const RealGrid& plane, Eigen::Index side) {
  const RealGrid square = center_crop(plane);
  if (square.rows() < side) {
    throw IoError("image is " + std::to_string(square.rows()) + " px after cropping, smaller than " +
                  std::to_string(side));
  }
  return area_downsample(square, side);
}

void append(Dataset& out, const std::filesystem::path& file, Eigen::Index side, int channels) {
  const Planes p = decode_linear(file);
  const std::string id = file.stem().string();
  if (channels == 1) {
    const RealGrid luma = 0.2126 * p.linear[0] + 0.7152 * p.linear[1] + 0.0722 * p.linear[2];
    RealGrid img = prepare(luma, side);
    const double peak = img.maxCoeff();
    if (peak > 0) img /= peak;
    out.mono.push_back({id, std::move(img)});
  } else {
    NamedColorImage img{id, {}};
    double peak = 0;
    for (int c = 0; c < 3; ++c) {
      img.targets.channels[c] = prepare(p.linear[c], side);
      peak = std::max(peak, img.targets.channels[c].maxCoeff());
    }
    if (peak > 0) {
      for (auto& ch : img.targets.channels) ch /= peak;
    }
    out.color.push_back(std::move(img));
  }
}

void check_args(Eigen::Index side, int channels) {
  if (!is_power_of_two(side)) throw ValidationError("side", "image side must be a power of two");
  if (channels != 1 && channels != 3) throw ValidationError("data.channels", "channels must be 1 or 3");
}

}  // namespace

RealGrid area_downsample(const RealGrid& square, Eigen::Index side) {
  if (square.rows() != square.cols()) throw DimensionError("area_downsample expects a square grid");
  if (square.rows() == side) return square;
  const Eigen::MatrixXd w = area_weights(square.rows(), side);
  const Eigen::MatrixXd out = w * square.matrix() * w.transpose();
  return out.array();
}

Dataset load_dataset(const std::filesystem::path& dir, Eigen::Index side, int channels, std::size_t limit) {
  check_args(side, channels);
  if (!std::filesystem::is_directory(dir)) throw IoError("dataset directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

  Dataset out;
  for (const auto& file : files) {
    if (limit > 0 && out.size() >= limit) break;
    try {
      append(out, file, side, channels);
    } catch (const IoError& e) {
      out.warnings.push_back(file.filename().string() + ": " + e.what());
    }
  }
  if (out.size() == 0) throw IoError("no usable images in " + dir.string());
  return out;
}

Dataset load_image(const std::filesystem::path& file, Eigen::Index side, int channels) {
  check_args(side, channels);
  Dataset out;
  append(out, file, side, channels);
  return out;
}

}  // namespace holo::io
