#include "holo/io/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>
#include "toml.hpp"

#include "holo/errors.hpp"
#include "holo/io/artifact.hpp"

namespace holo::io {

namespace {

void reject_unknown(const toml::table& table, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : table) {
    const std::string k(key.str());
    if (!allowed.count(k)) throw ValidationError(prefix + k, "unknown config key '" + prefix + k + "'");
  }
}

const toml::table* subtable(const toml::table& root, const std::string& name) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) throw ValidationError(name, "'" + name + "' must be a table");
  return node->as_table();
}

double get_number(const toml::node& node, const std::string& field) {
  if (auto v = node.value_exact<double>()) return *v;
  if (auto v = node.value_exact<std::int64_t>()) return static_cast<double>(*v);
  throw ValidationError(field, "'" + field + "' must be a number");
}

std::int64_t get_integer(const toml::node& node, const std::string& field) {
  if (auto v = node.value_exact<std::int64_t>()) return *v;
  throw ValidationError(field, "'" + field + "' must be an integer");
}

std::string get_string(const toml::node& node, const std::string& field) {
  if (auto v = node.value_exact<std::string>()) return *v;
  throw ValidationError(field, "'" + field + "' must be a string");
}

template <typename Fn>
void with(const toml::table* table, const std::string& prefix, const char* key, Fn&& fn) {
  if (!table) return;
  if (const toml::node* node = table->get(key)) fn(*node, prefix + key);
}

int as_int(std::int64_t v, const std::string& field) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ValidationError(field, "'" + field + "' is out of range");
  }
  return static_cast<int>(v);
}

std::size_t as_count(std::int64_t v, const std::string& field) {
  if (v < 0) throw ValidationError(field, "'" + field + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

template <typename Parse>
auto parse_enum(const toml::node& node, const std::string& field, Parse&& parse) {
  const std::string name = get_string(node, field);
  try {
    return parse(name);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(field, e.what());
  }
}

SlmInit parse_slm_init(const std::string& name) {
  if (name == "zero") return SlmInit::Zero;
  if (name == "random") return SlmInit::Random;
  throw ParameterError("unknown slm_init '" + name + "' (expected zero or random)");
}

// Shortest decimal text that parses back to the same double.
std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

// Values converted from SI units; twelve digits removes the conversion noise.
std::string unit(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return num(std::stod(os.str()));
}

std::string quoted(const std::string& s) {
  // JSON string escaping is a valid TOML basic string.
  return nlohmann::json(s).dump();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(geometry.slm_pitch > 0)) throw ValidationError("geometry.slm_pitch_um", "slm_pitch_um must be positive");
  if (!(geometry.expander_pitch > 0)) {
    throw ValidationError("geometry.expander_pitch_um", "expander_pitch_um must be positive");
  }
  if (!(geometry.wavelength > 0)) throw ValidationError("geometry.wavelength_nm", "wavelength_nm must be positive");
  if (geometry.slm_pixels < 1 || !is_power_of_two(geometry.slm_pixels)) {
    throw ValidationError("geometry.slm_pixels", "slm_pixels must be a positive power of two");
  }
  geometry.validate();
  train.validate();
  if (data.channels != 1 && data.channels != 3) throw ValidationError("data.channels", "channels must be 1 or 3");
  if (data.channels == 3 && mode != Mode::Phase) {
    throw ValidationError("mode", "trichromatic runs need mode = \"phase\" (the height map is shared)");
  }
  color.validate();
  if (finetune_epochs < 0) throw ValidationError("color.finetune_epochs", "finetune_epochs must be >= 0");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config syntax error at line " << e.source().begin.line << ": " << e.description();
    throw ValidationError("config", os.str());
  }
  reject_unknown(root, "", {"seed", "mode", "geometry", "train", "data", "output", "color"});

  ExperimentConfig cfg;
  const toml::table* top = &root;
  with(top, "", "seed", [&](const toml::node& n, const std::string& f) {
    const std::int64_t s = get_integer(n, f);
    if (s < 0) throw ValidationError(f, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  });
  with(top, "", "mode", [&](const toml::node& n, const std::string& f) {
    cfg.mode = parse_enum(n, f, [](const std::string& s) { return parse_mode(s); });
  });

  if (const toml::table* g = subtable(root, "geometry")) {
    reject_unknown(*g, "geometry.", {"slm_pitch_um", "expander_pitch_um", "slm_pixels", "wavelength_nm"});
    with(g, "geometry.", "slm_pitch_um",
         [&](const toml::node& n, const std::string& f) { cfg.geometry.slm_pitch = get_number(n, f) * 1e-6; });
    with(g, "geometry.", "expander_pitch_um",
         [&](const toml::node& n, const std::string& f) { cfg.geometry.expander_pitch = get_number(n, f) * 1e-6; });
    with(g, "geometry.", "slm_pixels",
         [&](const toml::node& n, const std::string& f) { cfg.geometry.slm_pixels = as_int(get_integer(n, f), f); });
    with(g, "geometry.", "wavelength_nm",
         [&](const toml::node& n, const std::string& f) { cfg.geometry.wavelength = get_number(n, f) * 1e-9; });
  }

  if (const toml::table* t = subtable(root, "train")) {
    reject_unknown(*t, "train.",
                   {"outer_epochs", "inner_slm_steps", "lr_slm", "lr_expander", "solve_steps", "cutoff", "tolerance",
                    "exposure", "slm_init", "checkpoint_every", "beta1", "beta2", "epsilon"});
    TrainConfig& tc = cfg.train;
    auto integer = [&](const char* key, int& dst) {
      with(t, "train.", key, [&](const toml::node& n, const std::string& f) { dst = as_int(get_integer(n, f), f); });
    };
    auto number = [&](const char* key, double& dst) {
      with(t, "train.", key, [&](const toml::node& n, const std::string& f) { dst = get_number(n, f); });
    };
    integer("outer_epochs", tc.outer_epochs);
    integer("inner_slm_steps", tc.inner_slm_steps);
    integer("solve_steps", tc.solve_steps);
    integer("checkpoint_every", tc.checkpoint_every);
    number("lr_slm", tc.lr_slm);
    number("lr_expander", tc.lr_expander);
    number("tolerance", tc.tolerance);
    number("beta1", tc.beta1);
    number("beta2", tc.beta2);
    number("epsilon", tc.epsilon);
    with(t, "train.", "cutoff",
         [&](const toml::node& n, const std::string& f) { tc.cutoff = get_number(n, f); });
    with(t, "train.", "exposure", [&](const toml::node& n, const std::string& f) {
      tc.exposure = parse_enum(n, f, [](const std::string& s) { return parse_exposure(s); });
    });
    with(t, "train.", "slm_init", [&](const toml::node& n, const std::string& f) {
      tc.slm_init = parse_enum(n, f, parse_slm_init);
    });
  }
  cfg.train.seed = cfg.seed;

  if (const toml::table* d = subtable(root, "data")) {
    reject_unknown(*d, "data.", {"train_dir", "test_dir", "channels", "max_train", "max_test"});
    with(d, "data.", "train_dir",
         [&](const toml::node& n, const std::string& f) { cfg.data.train_dir = resolve(get_string(n, f), base_dir); });
    with(d, "data.", "test_dir",
         [&](const toml::node& n, const std::string& f) { cfg.data.test_dir = resolve(get_string(n, f), base_dir); });
    with(d, "data.", "channels",
         [&](const toml::node& n, const std::string& f) { cfg.data.channels = as_int(get_integer(n, f), f); });
    with(d, "data.", "max_train",
         [&](const toml::node& n, const std::string& f) { cfg.data.max_train = as_count(get_integer(n, f), f); });
    with(d, "data.", "max_test",
         [&](const toml::node& n, const std::string& f) { cfg.data.max_test = as_count(get_integer(n, f), f); });
  }

  cfg.output_dir = resolve("out", base_dir);
  if (const toml::table* o = subtable(root, "output")) {
    reject_unknown(*o, "output.", {"dir"});
    with(o, "output.", "dir",
         [&](const toml::node& n, const std::string& f) { cfg.output_dir = resolve(get_string(n, f), base_dir); });
  }

  if (const toml::table* c = subtable(root, "color")) {
    reject_unknown(*c, "color.", {"wavelengths_nm", "reference_nm", "dispersion", "finetune_epochs"});
    with(c, "color.", "wavelengths_nm", [&](const toml::node& n, const std::string& f) {
      const toml::array* arr = n.as_array();
      if (!arr || arr->size() != 3) throw ValidationError(f, "'" + f + "' must be an array of three numbers");
      for (std::size_t i = 0; i < 3; ++i) cfg.color.wavelengths[i] = get_number(*arr->get(i), f) * 1e-9;
    });
    with(c, "color.", "reference_nm", [&](const toml::node& n, const std::string& f) {
      cfg.color.dispersion.reference = get_number(n, f) * 1e-9;
    });
    with(c, "color.", "dispersion", [&](const toml::node& n, const std::string& f) {
      const toml::array* arr = n.as_array();
      if (!arr || arr->empty()) throw ValidationError(f, "'" + f + "' must be a non-empty array of [nm, index] pairs");
      cfg.color.dispersion.index.clear();
      for (const toml::node& entry : *arr) {
        const toml::array* pair = entry.as_array();
        if (!pair || pair->size() != 2) throw ValidationError(f, "each dispersion entry must be [wavelength_nm, index]");
        cfg.color.dispersion.index[get_number(*pair->get(0), f) * 1e-9] = get_number(*pair->get(1), f);
      }
    });
    with(c, "color.", "finetune_epochs",
         [&](const toml::node& n, const std::string& f) { cfg.finetune_epochs = as_int(get_integer(n, f), f); });
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  if (path.extension() == ".json") {
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("manifest", std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!manifest.contains("config_toml") || !manifest["config_toml"].is_string()) {
      throw ValidationError("manifest.config_toml", "manifest has no config echo");
    }
    return parse_config(manifest["config_toml"].get<std::string>(), base);
  }
  return parse_config(buffer.str(), base);
}

std::string to_toml(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  std::ostringstream os;
  os << "seed = " << cfg.seed << "\n";
  os << "mode = " << quoted(std::string(to_string(cfg.mode))) << "\n\n";
  os << "[geometry]\n";
  os << "slm_pitch_um = " << unit(cfg.geometry.slm_pitch * 1e6) << "\n";
  os << "expander_pitch_um = " << unit(cfg.geometry.expander_pitch * 1e6) << "\n";
  os << "slm_pixels = " << cfg.geometry.slm_pixels << "\n";
  os << "wavelength_nm = " << unit(cfg.geometry.wavelength * 1e9) << "\n\n";
  os << "[train]\n";
  os << "outer_epochs = " << t.outer_epochs << "\n";
  os << "inner_slm_steps = " << t.inner_slm_steps << "\n";
  os << "lr_slm = " << num(t.lr_slm) << "\n";
  os << "lr_expander = " << num(t.lr_expander) << "\n";
  os << "solve_steps = " << t.solve_steps << "\n";
  if (t.cutoff) os << "cutoff = " << num(*t.cutoff) << "\n";
  os << "tolerance = " << num(t.tolerance) << "\n";
  os << "exposure = " << quoted(std::string(to_string(t.exposure))) << "\n";
  os << "slm_init = " << quoted(t.slm_init == SlmInit::Zero ? "zero" : "random") << "\n";
  os << "checkpoint_every = " << t.checkpoint_every << "\n";
  os << "beta1 = " << num(t.beta1) << "\n";
  os << "beta2 = " << num(t.beta2) << "\n";
  os << "epsilon = " << num(t.epsilon) << "\n\n";
  os << "[data]\n";
  if (!cfg.data.train_dir.empty()) os << "train_dir = " << quoted(cfg.data.train_dir.string()) << "\n";
  if (!cfg.data.test_dir.empty()) os << "test_dir = " << quoted(cfg.data.test_dir.string()) << "\n";
  os << "channels = " << cfg.data.channels << "\n";
  os << "max_train = " << cfg.data.max_train << "\n";
  os << "max_test = " << cfg.data.max_test << "\n\n";
  os << "[output]\n";
  os << "dir = " << quoted(cfg.output_dir.string()) << "\n\n";
  os << "[color]\n";
  os << "wavelengths_nm = [" << unit(cfg.color.wavelengths[0] * 1e9) << ", " << unit(cfg.color.wavelengths[1] * 1e9)
     << ", " << unit(cfg.color.wavelengths[2] * 1e9) << "]\n";
  os << "reference_nm = " << unit(cfg.color.dispersion.reference * 1e9) << "\n";
  os << "dispersion = [";
  bool first = true;
  for (const auto& [lambda, n] : cfg.color.dispersion.index) {
    os << (first ? "" : ", ") << "[" << unit(lambda * 1e9) << ", " << num(n) << "]";
    first = false;
  }
  os << "]\n";
  os << "finetune_epochs = " << cfg.finetune_epochs << "\n";
  return os.str();
}

// The output location does not affect results, so it is left out of the digest.
std::uint64_t config_digest(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.output_dir.clear();
  return fnv1a64(to_toml(c));
}

}  // namespace holo::io
