#include "holo/io/artifact.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "holo/errors.hpp"

namespace holo::io {

namespace {

constexpr char kMagic[8] = {'N', 'E', 'E', 'X', 'P', 'A', 'N', 'D'};
constexpr std::size_t kHeaderBytes = 8 + 4 * 4 + 8 * 3 + 8;

struct Writer {
  std::vector<unsigned char> bytes;

  template <typename U>
  void put(U v) {
    for (std::size_t b = 0; b < sizeof(U); ++b) bytes.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xff));
  }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
};

struct Reader {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;

  template <typename U>
  U get() {
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(static_cast<U>(bytes[pos + b]) << (8 * b));
    pos += sizeof(U);
    return v;
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
};

std::uint32_t crc(const unsigned char* data, std::size_t size) {
  return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), data, static_cast<uInt>(size)));
}

std::uint32_t mode_code(Mode mode) {
  switch (mode) {
    case Mode::Amplitude:
      return 0;
    case Mode::Phase:
      return 1;
    case Mode::Complex:
      return 2;
  }
  return 0;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<unsigned char> encode_expander(const ExpanderArtifact& a) {
  a.params.validate();
  Writer w;
  w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
  w.put(kArtifactVersion);
  w.put(mode_code(a.params.mode));
  w.put(static_cast<std::uint32_t>(a.params.rows()));
  w.put(static_cast<std::uint32_t>(a.params.cols()));
  w.put_f64(a.slm_pitch);
  w.put_f64(a.expander_pitch);
  w.put_f64(a.wavelength);
  w.put(a.config_digest);
  for (Eigen::Index i = 0; i < a.params.grid_a.size(); ++i) w.put_f64(a.params.grid_a.data()[i]);
  for (Eigen::Index i = 0; i < a.params.grid_b.size(); ++i) w.put_f64(a.params.grid_b.data()[i]);
  w.put(crc(w.bytes.data(), w.bytes.size()));
  return w.bytes;
}

ExpanderArtifact decode_expander(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kHeaderBytes + 4) throw IntegrityError("expander file truncated: header incomplete");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw IntegrityError("not an expander file");
  Reader r{bytes, sizeof kMagic};
  const auto version = r.get<std::uint32_t>();
  if (version != kArtifactVersion) {
    throw UnsupportedVersionError("unsupported expander file version " + std::to_string(version) + " (expected " +
                                  std::to_string(kArtifactVersion) + ")");
  }
  const auto code = r.get<std::uint32_t>();
  if (code > 2) throw IntegrityError("invalid modulation mode code " + std::to_string(code));
  const Mode mode = code == 0 ? Mode::Amplitude : code == 1 ? Mode::Phase : Mode::Complex;
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  const std::size_t grids = mode == Mode::Complex ? 2 : 1;
  const std::size_t expected = kHeaderBytes + grids * std::size_t{rows} * cols * 8 + 4;
  if (bytes.size() != expected) {
    throw IntegrityError("expander file size " + std::to_string(bytes.size()) + " does not match header (" +
                         std::to_string(expected) + " bytes)");
  }
  Reader tail{bytes, bytes.size() - 4};
  if (tail.get<std::uint32_t>() != crc(bytes.data(), bytes.size() - 4)) {
    throw IntegrityError("expander file checksum mismatch");
  }

  ExpanderArtifact a;
  a.slm_pitch = r.get_f64();
  a.expander_pitch = r.get_f64();
  a.wavelength = r.get_f64();
  a.config_digest = r.get<std::uint64_t>();
  a.params.mode = mode;
  a.params.grid_a.resize(rows, cols);
  for (Eigen::Index i = 0; i < a.params.grid_a.size(); ++i) a.params.grid_a.data()[i] = r.get_f64();
  if (mode == Mode::Complex) {
    a.params.grid_b.resize(rows, cols);
    for (Eigen::Index i = 0; i < a.params.grid_b.size(); ++i) a.params.grid_b.data()[i] = r.get_f64();
  }
  return a;
}

void save_expander(const std::filesystem::path& path, const ExpanderArtifact& artifact) {
  const std::vector<unsigned char> bytes = encode_expander(artifact);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

ExpanderArtifact load_expander(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_expander(bytes);
}

}  // namespace holo::io
