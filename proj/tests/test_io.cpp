#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "holo/errors.hpp"
#include "holo/io/artifact.hpp"
#include "holo/io/config.hpp"
#include "holo/io/dataset.hpp"
#include "holo/io/image_io.hpp"
#include "holo/io/report.hpp"
#include "oracles.hpp"

using namespace holo;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(HOLO_FIXTURE_DIR);

// Fresh empty directory under the system temp dir.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("holo_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream os(p, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string field_of(const std::string& toml) {
  try {
    io::parse_config(toml, "/tmp");
  } catch (const ValidationError& e) {
    return e.field;
  }
  return {};
}

}  // namespace

TEST_CASE("sRGB decoding") {
  // mpmath: ((128/255 + 0.055) / 1.055)^2.4
  CHECK(io::srgb_to_linear(128.0 / 255.0) == doctest::Approx(0.215860500113899163761817647393).epsilon(1e-14));
  CHECK(io::srgb_to_linear(0.0) == 0.0);
  CHECK(io::srgb_to_linear(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(io::srgb_to_linear(0.04) == doctest::Approx(0.04 / 12.92).epsilon(1e-15));

  const io::DecodedImage gray = io::read_png(kFixtures / "gray128.png");
  CHECK(!gray.linear);
  CHECK(((gray.rgb[0] - 128.0 / 255.0).abs() < 1e-15).all());
}

TEST_CASE("area_downsample and center_crop") {
  RealGrid ramp(3, 3);
  for (int y = 0; y < 3; ++y) ramp.row(y).setConstant(y);
  const RealGrid d = io::area_downsample(ramp, 2);
  CHECK(d(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(d(1, 1) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

  const RealGrid r = oracle::random_grid(48, 48, 3);
  const RealGrid s = io::area_downsample(r, 16);
  CHECK(s.mean() == doctest::Approx(r.mean()).epsilon(1e-13));
  CHECK(s(0, 0) == doctest::Approx(r.block(0, 0, 3, 3).mean()).epsilon(1e-13));
  CHECK(((io::area_downsample(RealGrid::Constant(40, 40, 0.3), 32) - 0.3).abs() < 1e-15).all());

  const RealGrid wide = oracle::random_grid(6, 10, 4);
  const RealGrid c = io::center_crop(wide);
  CHECK(c.rows() == 6);
  CHECK(c.cols() == 6);
  CHECK((c == wide.block(0, 2, 6, 6)).all());
}

TEST_CASE("load_dataset") {
  const fs::path dir = scratch("dataset");
  fs::copy_file(kFixtures / "white.png", dir / "b_white.png");
  fs::copy_file(kFixtures / "gray128.png", dir / "a_gray.png");
  fs::copy_file(kFixtures / "corrupt.png", dir / "c_corrupt.png");
  spit(dir / "notes.txt", {'h', 'i'});

  const io::Dataset d = io::load_dataset(dir, 16, 1);
  REQUIRE(d.mono.size() == 2);
  CHECK(d.mono[0].id == "a_gray");
  CHECK(d.mono[1].id == "b_white");
  CHECK((d.mono[1].pixels == 1.0).all());
  REQUIRE(d.warnings.size() == 1);
  CHECK(d.warnings[0].find("c_corrupt.png") == 0);

  const io::Dataset again = io::load_dataset(dir, 16, 1);
  CHECK((again.mono[0].pixels == d.mono[0].pixels).all());

  const io::Dataset color = io::load_dataset(dir, 8, 3, 1);
  REQUIRE(color.color.size() == 1);
  for (const auto& ch : color.color[0].targets.channels) CHECK((ch == 1.0).all());

  // Every file is smaller than 32 px after cropping.
  CHECK_THROWS_AS(io::load_dataset(dir, 32, 1), IoError);

  CHECK_THROWS_AS(io::load_dataset(scratch("empty"), 16, 1), IoError);
  CHECK_THROWS_AS(io::load_dataset(dir / "missing", 16, 1), IoError);
  CHECK_THROWS_AS(io::load_dataset(dir, 12, 1), ValidationError);
}

TEST_CASE("PNG16 and PFM round trips") {
  const fs::path dir = scratch("images");
  const RealGrid g = oracle::random_grid(9, 7, 5, -2.0, 3.0);
  io::write_pfm(dir / "g.pfm", g);
  const RealGrid back = io::read_pfm(dir / "g.pfm");
  REQUIRE(back.rows() == 9);
  REQUIRE(back.cols() == 7);
  CHECK((back == g.cast<float>().cast<double>()).all());

  const RealGrid unit = oracle::random_grid(5, 6, 6);
  io::write_png16(dir / "u.png", unit);
  const io::DecodedImage png = io::read_png(dir / "u.png");
  CHECK(png.linear);
  CHECK(((png.rgb[0] - unit).abs() <= 0.5 / 65535.0 + 1e-12).all());

  const RealGrid constant = io::read_png(kFixtures / "white.png").rgb[1];
  CHECK((constant == 1.0).all());
  CHECK_THROWS_AS(io::read_png(kFixtures / "corrupt.png"), IoError);
  CHECK_THROWS_AS(io::read_pfm(kFixtures / "white.png"), IoError);
}

TEST_CASE("emit_grid records the normalization scale") {
  const fs::path dir = scratch("emit");
  const RealGrid g = oracle::random_grid(8, 8, 7, 0.0, 40.0);
  const io::EmittedImage img = io::emit_grid(dir, "h", g);
  CHECK(img.scale == g.maxCoeff());
  const RealGrid pfm = io::read_pfm(dir / "h.pfm");
  const RealGrid png = io::read_png(dir / "h.png").rgb[0];
  CHECK(((png * img.scale - pfm).abs() <= img.scale * (0.5 / 65535.0) + 1e-5 * img.scale).all());

  const io::EmittedImage logged = io::emit_grid(dir, "l", g, io::Tone::Log);
  CHECK(io::to_json(logged)["tone"] == "log1p_1000");
  const RealGrid lp = io::read_png(dir / "l.png").rgb[0];
  const RealGrid expected = (1000.0 * g / g.maxCoeff()).log1p() / std::log1p(1000.0);
  CHECK(((lp - expected).abs() <= 0.5 / 65535.0 + 1e-12).all());
}

TEST_CASE("metrics CSV") {
  const fs::path dir = scratch("csv");
  io::write_metrics_csv(dir / "m.csv", {{"a,1", "complex", 2, 30.5, 10.25, 1e-3}, {"b", "phase", 4, 28.0, 9.0, 2.0}});
  std::ifstream is(dir / "m.csv");
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 3);
  const auto rows = io::read_metrics_csv(dir / "m.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].id == "a,1");
  CHECK(rows[0].m == 2);
  CHECK(rows[0].final_loss == 1e-3);
  CHECK(rows[1].filtered_psnr_db == 28.0);
}

TEST_CASE("preflight output directory") {
  const fs::path dir = scratch("preflight");
  CHECK_NOTHROW(io::preflight_output_dir(dir / "nested" / "out"));
  CHECK(fs::is_directory(dir / "nested" / "out"));
  spit(dir / "file", {'x'});
  CHECK_THROWS_AS(io::preflight_output_dir(dir / "file" / "out"), IoError);
}

TEST_CASE("expander artifact") {
  const fs::path dir = scratch("artifact");
  for (Mode mode : {Mode::Amplitude, Mode::Phase, Mode::Complex}) {
    CAPTURE(to_string(mode));
    const io::ExpanderArtifact a{ExpanderParams::initial(mode, 16, 3), 16e-6, 8e-6, 660e-9, 0x0123456789abcdefULL};
    io::save_expander(dir / "e.bin", a);
    const io::ExpanderArtifact b = io::load_expander(dir / "e.bin");
    CHECK(b.params.mode == mode);
    CHECK(std::memcmp(a.params.grid_a.data(), b.params.grid_a.data(), sizeof(double) * 256) == 0);
    CHECK(b.params.grid_b.size() == a.params.grid_b.size());
    if (mode == Mode::Complex) {
      CHECK(std::memcmp(a.params.grid_b.data(), b.params.grid_b.data(), sizeof(double) * 256) == 0);
    }
    CHECK(b.slm_pitch == a.slm_pitch);
    CHECK(b.expander_pitch == a.expander_pitch);
    CHECK(b.wavelength == a.wavelength);
    CHECK(b.config_digest == a.config_digest);
    CHECK(io::encode_expander(b) == slurp(dir / "e.bin"));
  }

  const std::vector<unsigned char> good = slurp(dir / "e.bin");
  std::vector<unsigned char> bytes = good;
  bytes.resize(bytes.size() - 9);
  CHECK_THROWS_AS(io::decode_expander(bytes), IntegrityError);

  bytes = good;
  bytes[100] ^= 0x01;
  CHECK_THROWS_WITH_AS(io::decode_expander(bytes), doctest::Contains("checksum"), IntegrityError);

  bytes = good;
  bytes[8] = 2;  // version field
  CHECK_THROWS_AS(io::decode_expander(bytes), UnsupportedVersionError);

  bytes = good;
  bytes[0] = 'X';
  CHECK_THROWS_AS(io::decode_expander(bytes), IntegrityError);
  CHECK_THROWS_AS(io::decode_expander({}), IntegrityError);

  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("config parsing") {
  const std::string text = R"(
seed = 9
mode = "phase"
[geometry]
slm_pitch_um = 16
expander_pitch_um = 4
slm_pixels = 16
wavelength_nm = 520
[train]
outer_epochs = 3
lr_slm = 0.2
cutoff = 5.5
exposure = "none"
slm_init = "random"
[data]
train_dir = "imgs/train"
channels = 1
[output]
dir = "runs/a"
)";
  const io::ExperimentConfig c = io::parse_config(text, "/base");
  CHECK(c.seed == 9);
  CHECK(c.train.seed == 9);
  CHECK(c.mode == Mode::Phase);
  CHECK(c.geometry.upsampling_factor() == 4);
  CHECK(c.geometry.wavelength == doctest::Approx(520e-9).epsilon(1e-15));
  CHECK(c.train.outer_epochs == 3);
  CHECK(c.train.lr_slm == 0.2);
  CHECK(c.train.cutoff.value() == 5.5);
  CHECK(c.train.exposure == Exposure::None);
  CHECK(c.train.slm_init == SlmInit::Random);
  CHECK(c.data.train_dir == fs::path("/base/imgs/train"));
  CHECK(c.output_dir == fs::path("/base/runs/a"));
  CHECK(c.train.inner_slm_steps == TrainConfig{}.inner_slm_steps);

  const std::string echo = io::to_toml(c);
  const io::ExperimentConfig again = io::parse_config(echo, "/elsewhere");
  CHECK(io::to_toml(again) == echo);
  CHECK(io::config_digest(again) == io::config_digest(c));
  CHECK(again.geometry.slm_pitch == c.geometry.slm_pitch);
  CHECK(again.train.cutoff == c.train.cutoff);
}

TEST_CASE("config validation names the field") {
  CHECK(field_of("colour = 1") == "colour");
  CHECK(field_of("[train]\nlearning_rate = 1") == "train.learning_rate");
  CHECK(field_of("[geometry]\nexpander_pitch_um = 5") == "geometry.expander_pitch_um");
  CHECK(field_of("[geometry]\nexpander_pitch_um = 32") == "geometry.expander_pitch_um");
  CHECK(field_of("[geometry]\nslm_pixels = 24") == "geometry.slm_pixels");
  CHECK(field_of("[train]\nouter_epochs = 1.5") == "train.outer_epochs");
  CHECK(field_of("[train]\nexposure = \"auto\"") == "train.exposure");
  CHECK(field_of("mode = \"hologram\"") == "mode");
  CHECK(field_of("seed = -1") == "seed");
  CHECK(field_of("[data]\nchannels = 2") == "data.channels");
  CHECK(field_of("[data]\nchannels = 3") == "mode");
  CHECK(field_of("mode = \"phase\"\n[data]\nchannels = 3\n[color]\nwavelengths_nm = [660, 532, 450]") ==
        "color.wavelengths_nm");
  CHECK(field_of("[color]\ndispersion = [[660, 1.4]]\nreference_nm = 450") == "color.reference_nm");
  CHECK(field_of("geometry = 3") == "geometry");
  CHECK(field_of("seed = ") == "config");
  CHECK(field_of("").empty());
}

TEST_CASE("config from a run manifest") {
  const fs::path dir = scratch("manifest");
  io::ExperimentConfig c;
  c.seed = 77;
  c.output_dir = dir / "out";
  io::write_json(dir / "manifest.json", {{"config_toml", io::to_toml(c)}, {"seed", 77}});
  const io::ExperimentConfig back = io::load_config(dir / "manifest.json");
  CHECK(back.seed == 77);
  CHECK(io::to_toml(back) == io::to_toml(c));

  io::write_json(dir / "bad.json", {{"seed", 1}});
  CHECK_THROWS_AS(io::load_config(dir / "bad.json"), ValidationError);
  CHECK_THROWS_AS(io::load_config(dir / "absent.toml"), IoError);
}
