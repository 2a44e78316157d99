#include "holo/io/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "holo/errors.hpp"
#include "holo/io/image_io.hpp"

#ifndef HOLO_VERSION
#define HOLO_VERSION "unknown"
#endif

namespace holo::io {

namespace {

constexpr double kLogGain = 1000.0;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

}  // namespace

void preflight_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::filesystem::path probe = dir / ".write_probe";
  {
    std::ofstream os(probe);
    if (!os || !(os << "ok")) throw IoError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "id,mode,m,filtered_psnr_db,raw_psnr_db,final_loss\n";
  os << std::setprecision(17);
  for (const MetricsRow& r : rows) {
    os << csv_field(r.id) << ',' << r.mode << ',' << r.m << ',' << r.filtered_psnr_db << ',' << r.raw_psnr_db << ','
       << r.final_loss << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> c = split_csv(line);
    if (c.size() != 6) throw IoError("malformed metrics row in " + path.string());
    rows.push_back({c[0], c[1], std::stoi(c[2]), std::stod(c[3]), std::stod(c[4]), std::stod(c[5])});
  }
  return rows;
}

EmittedImage emit_grid(const std::filesystem::path& dir, const std::string& stem, const RealGrid& grid, Tone tone) {
  EmittedImage out{stem, grid.size() ? grid.maxCoeff() : 0.0, tone};
  write_pfm(dir / (stem + ".pfm"), grid);
  RealGrid unit = out.scale > 0 ? RealGrid(grid / out.scale) : RealGrid(RealGrid::Zero(grid.rows(), grid.cols()));
  if (tone == Tone::Log) {
    unit = unit.max(0.0).unaryExpr([](double v) { return std::log1p(kLogGain * v) / std::log1p(kLogGain); });
  }
  write_png16(dir / (stem + ".png"), unit);
  return out;
}

nlohmann::json to_json(const EmittedImage& img) {
  return {{"stem", img.stem},
          {"png", img.stem + ".png"},
          {"pfm", img.stem + ".pfm"},
          {"scale", img.scale},
          {"tone", img.tone == Tone::Linear ? "linear" : "log1p_1000"}};
}

std::string version() { return HOLO_VERSION; }

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << std::setw(2) << doc << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace holo::io
