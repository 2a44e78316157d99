// holoexpand: train, synthesize, evaluate and inspect etendue expanders.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "holo/analysis.hpp"
#include "holo/color.hpp"
#include "holo/errors.hpp"
#include "holo/geometry.hpp"
#include "holo/io/artifact.hpp"
#include "holo/io/config.hpp"
#include "holo/io/dataset.hpp"
#include "holo/io/image_io.hpp"
#include "holo/io/report.hpp"
#include "holo/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace holo;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct Run {
  io::ExperimentConfig cfg;
  fs::path out;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  json manifest;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

io::ExperimentConfig base_config(const Common& c) {
  io::ExperimentConfig cfg;
  if (!c.config.empty()) {
    cfg = io::load_config(c.config);
  } else {
    cfg.output_dir = fs::absolute("out");
  }
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.train.seed = *c.seed;
  }
  if (!c.out.empty()) cfg.output_dir = fs::absolute(c.out);
  return cfg;
}

Run start_run(const std::string& command, io::ExperimentConfig cfg) {
  cfg.validate();
  Run run{std::move(cfg), {}, std::chrono::steady_clock::now(), json::object()};
  run.out = run.cfg.output_dir;
  io::preflight_output_dir(run.out);
  run.manifest["tool"] = "holoexpand";
  run.manifest["command"] = command;
  run.manifest["version"] = io::version();
  run.manifest["started_utc"] = utc_now();
  run.manifest["seed"] = run.cfg.seed;
  run.manifest["config_toml"] = io::to_toml(run.cfg);
  run.manifest["config_digest"] = hex(io::config_digest(run.cfg));
  run.manifest["images"] = json::array();
  return run;
}

void finish_run(Run& run) {
  run.manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  io::write_json(run.out / "manifest.json", run.manifest);
}

// Geometry implied by an artifact, with the SLM pixel count derived from its grid.
DisplayGeometry geometry_of(const io::ExpanderArtifact& a) {
  DisplayGeometry g;
  g.slm_pitch = a.slm_pitch;
  g.expander_pitch = a.expander_pitch;
  g.wavelength = a.wavelength;
  g.slm_pixels = 1;
  const int m = g.upsampling_factor();
  if (a.params.rows() != a.params.cols() || a.params.rows() % m != 0) {
    throw DimensionError("expander grid " + std::to_string(a.params.rows()) + "x" + std::to_string(a.params.cols()) +
                         " does not fit upsampling factor " + std::to_string(m));
  }
  g.slm_pixels = static_cast<int>(a.params.rows() / m);
  g.validate();
  return g;
}

json summary_json(const EvalTable& t) {
  return {{"mean_filtered_psnr_db", t.mean_filtered_psnr},
          {"min_filtered_psnr_db", t.min_filtered_psnr},
          {"mean_raw_psnr_db", t.mean_raw_psnr},
          {"images", t.rows.size()}};
}

void append_rows(std::vector<io::MetricsRow>& rows, const EvalTable& t, const std::string& mode, int m,
                 const std::string& suffix = "") {
  for (const EvalRow& r : t.rows) rows.push_back({r.id + suffix, mode, m, r.filtered_psnr, r.raw_psnr, r.final_loss});
}

void record(Run& run, const io::EmittedImage& img) { run.manifest["images"].push_back(io::to_json(img)); }

// Raw and retinal-filtered holograms of one solve, plus the SLM phase.
void emit_solve(Run& run, const std::string& stem, const SolveResult& s, const RetinalFilter& filter) {
  record(run, io::emit_grid(run.out, stem + "_raw", s.image));
  record(run, io::emit_grid(run.out, stem + "_filtered", apply_filter<double>(s.image, filter).max(0.0)));
  io::write_pfm(run.out / (stem + "_slm_phase.pfm"), s.slm.phase);
}

void emit_expander_diagnostics(Run& run, const std::string& stem, const ComplexField& field) {
  const VirtualModulation v = virtual_frequency_modulation(field);
  record(run, io::emit_grid(run.out, stem + "_virtual_modulation", RealGrid(centered(v.magnitude)), io::Tone::Log));
  record(run, io::emit_grid(run.out, stem + "_zero_phase_image", RealGrid(centered(fft2<double>(field).abs2()))));
}

void print_table(const std::string& title, const EvalTable& t) {
  std::cout << title << ": mean filtered PSNR " << std::fixed << std::setprecision(3) << t.mean_filtered_psnr
            << " dB, min " << t.min_filtered_psnr << " dB, mean raw " << t.mean_raw_psnr << " dB over "
            << t.rows.size() << " images\n"
            << std::defaultfloat;
}

io::Dataset load_split(const fs::path& dir, const io::ExperimentConfig& cfg, std::size_t limit, const char* key) {
  if (dir.empty()) throw ValidationError(key, std::string("'") + key + "' is required for this command");
  return io::load_dataset(dir, cfg.geometry.expander_pixels(), cfg.data.channels, limit);
}

json dataset_json(const fs::path& dir, const io::Dataset& d) {
  json files = json::array();
  for (const NamedImage& i : d.mono) files.push_back(i.id);
  for (const NamedColorImage& i : d.color) files.push_back(i.id);
  return {{"dir", dir.string()}, {"files", files}, {"warnings", d.warnings}};
}

void warn_skipped(const io::Dataset& d) {
  for (const std::string& w : d.warnings) std::cerr << "warning: " << w << '\n';
}

io::ExpanderArtifact make_artifact(const ExpanderParams& p, const io::ExperimentConfig& cfg) {
  return {p, cfg.geometry.slm_pitch, cfg.geometry.expander_pitch, cfg.geometry.wavelength, io::config_digest(cfg)};
}

json history_json(const std::vector<EpochMetrics>& h) {
  json out = json::array();
  for (const EpochMetrics& e : h) out.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss},
                                                 {"mean_filtered_psnr_db", e.mean_filtered_psnr}});
  return out;
}

EpochCallback progress(const io::ExperimentConfig& cfg, const fs::path& out, const std::string& tag) {
  return [&cfg, out, tag](const EpochMetrics& e, const ExpanderParams& p) {
    std::cout << tag << " epoch " << e.epoch + 1 << " loss " << e.mean_loss << " filtered PSNR "
              << e.mean_filtered_psnr << " dB\n"
              << std::flush;
    const int every = cfg.train.checkpoint_every;
    if (every > 0 && (e.epoch + 1) % every == 0) {
      io::save_expander(out / (tag + "_epoch_" + std::to_string(e.epoch + 1) + ".bin"), make_artifact(p, cfg));
    }
  };
}

int cmd_train(const Common& c, const std::string& init_path) {
  Run run = start_run("train", base_config(c));
  const io::ExperimentConfig& cfg = run.cfg;
  const int m = cfg.geometry.upsampling_factor();
  const io::Dataset train = load_split(cfg.data.train_dir, cfg, cfg.data.max_train, "data.train_dir");
  warn_skipped(train);
  run.manifest["train_set"] = dataset_json(cfg.data.train_dir, train);
  std::optional<io::Dataset> test;
  if (!cfg.data.test_dir.empty()) {
    test = load_split(cfg.data.test_dir, cfg, cfg.data.max_test, "data.test_dir");
    warn_skipped(*test);
    run.manifest["test_set"] = dataset_json(cfg.data.test_dir, *test);
  }

  std::optional<ExpanderParams> init;
  if (!init_path.empty()) {
    io::ExpanderArtifact a = io::load_expander(init_path);
    if (a.params.mode != cfg.mode) {
      throw ValidationError("mode", "initial expander is " + std::string(to_string(a.params.mode)) +
                                        " but the config asks for " + std::string(to_string(cfg.mode)));
    }
    init = std::move(a.params);
    run.manifest["init_expander"] = fs::absolute(init_path).string();
  }

  std::vector<io::MetricsRow> rows;
  const RetinalFilter filter = retinal_filter_for(cfg.geometry, cfg.train);
  ExpanderParams expander;

  if (cfg.data.channels == 1) {
    std::vector<IntensityImage> targets;
    for (const NamedImage& i : train.mono) targets.push_back(i.pixels);
    TrainResult r = init ? train_expander(targets, cfg.train, cfg.geometry, *init, progress(cfg, run.out, "mono"))
                         : train_expander(targets, cfg.train, cfg.geometry, cfg.mode, progress(cfg, run.out, "mono"));
    run.manifest["history"] = history_json(r.history);
    expander = std::move(r.expander);
    const ComplexField field = realize(expander);
    if (test) {
      std::vector<SolveResult> solves;
      const EvalTable t = evaluate(field, test->mono, cfg.train, cfg.geometry, &solves);
      print_table("held-out", t);
      append_rows(rows, t, std::string(to_string(cfg.mode)), m);
      run.manifest["summary"] = summary_json(t);
      for (std::size_t k = 0; k < solves.size(); ++k) emit_solve(run, "test_" + t.rows[k].id, solves[k], filter);
    }
    emit_expander_diagnostics(run, "expander", field);
  } else {
    std::vector<ColorTargets> targets;
    std::vector<IntensityImage> red;
    for (const NamedColorImage& i : train.color) {
      targets.push_back(i.targets);
      red.push_back(i.targets.channels[0]);
    }
    if (!init) {
      // Red-only pretraining at the reference wavelength.
      TrainResult r = train_expander(red, cfg.train, cfg.geometry, cfg.mode, progress(cfg, run.out, "red"));
      run.manifest["history"] = history_json(r.history);
      init = std::move(r.expander);
    }
    ColorTrainResult r;
    if (cfg.finetune_epochs > 0) {
      TrainConfig tune = cfg.train;
      tune.outer_epochs = cfg.finetune_epochs;
      r = train_trichromatic(*init, targets, tune, cfg.geometry, cfg.color, progress(cfg, run.out, "color"));
      run.manifest["finetune_history"] = history_json(r.history);
      expander = std::move(r.expander);
    } else {
      expander = std::move(*init);
    }
    if (test) {
      const ColorEvalTable t = evaluate_color(expander, test->color, cfg.train, cfg.geometry, cfg.color);
      json channels = json::array();
      for (int ch = 0; ch < 3; ++ch) {
        const std::string nm = std::to_string(static_cast<int>(std::lround(cfg.color.wavelengths[ch] * 1e9)));
        print_table("held-out " + nm + " nm", t.channels[ch]);
        append_rows(rows, t.channels[ch], std::string(to_string(cfg.mode)), m, "@" + nm + "nm");
        channels.push_back(summary_json(t.channels[ch]));
      }
      run.manifest["summary"] = {{"channels", channels},
                                 {"mean_combined_psnr_db", t.mean_combined_psnr},
                                 {"min_channel_mean_psnr_db", t.min_channel_mean_psnr}};
    }
    const std::array<ComplexField, 3> fields = channel_expanders(expander, cfg.color);
    emit_expander_diagnostics(run, "expander_red", fields[0]);
  }

  io::save_expander(run.out / "expander.bin", make_artifact(expander, cfg));
  run.manifest["expander"] = "expander.bin";
  io::write_metrics_csv(run.out / "metrics.csv", rows);
  finish_run(run);
  std::cout << "wrote " << (run.out / "expander.bin").string() << '\n';
  return 0;
}

// Config for commands driven by an artifact: the artifact fixes the geometry.
io::ExperimentConfig artifact_config(const Common& c, const io::ExpanderArtifact& a) {
  io::ExperimentConfig cfg = base_config(c);
  cfg.geometry = geometry_of(a);
  cfg.mode = a.params.mode;
  cfg.data.channels = 1;
  return cfg;
}

int cmd_synth(const Common& c, const std::string& expander_path, const std::string& image_path) {
  const io::ExpanderArtifact a = io::load_expander(expander_path);
  Run run = start_run("synth", artifact_config(c, a));
  const io::ExperimentConfig& cfg = run.cfg;
  run.manifest["expander"] = fs::absolute(expander_path).string();
  run.manifest["image"] = fs::absolute(image_path).string();
  const io::Dataset img = io::load_image(image_path, cfg.geometry.expander_pixels(), 1);
  const RetinalFilter filter = retinal_filter_for(cfg.geometry, cfg.train);
  const SolveResult s = solve_slm(realize(a.params), img.mono[0].pixels, cfg.train, cfg.geometry, filter);
  emit_solve(run, "hologram", s, filter);
  io::write_metrics_csv(run.out / "metrics.csv",
                        {{img.mono[0].id, std::string(to_string(cfg.mode)), cfg.geometry.upsampling_factor(),
                          s.filtered_psnr, s.raw_psnr, s.best_loss}});
  run.manifest["summary"] = {{"filtered_psnr_db", s.filtered_psnr}, {"raw_psnr_db", s.raw_psnr},
                             {"best_loss", s.best_loss}, {"initial_loss", s.initial_loss}};
  finish_run(run);
  std::cout << "filtered PSNR " << s.filtered_psnr << " dB, raw PSNR " << s.raw_psnr << " dB\n";
  return 0;
}

int eval_fixed(Run& run, const ComplexField& field, const fs::path& testset, const std::string& label) {
  const io::ExperimentConfig& cfg = run.cfg;
  const io::Dataset test = load_split(testset, cfg, cfg.data.max_test, "testset");
  warn_skipped(test);
  run.manifest["test_set"] = dataset_json(testset, test);
  const EvalTable t = evaluate(field, test.mono, cfg.train, cfg.geometry);
  print_table(label, t);
  std::vector<io::MetricsRow> rows;
  append_rows(rows, t, label, cfg.geometry.upsampling_factor());
  io::write_metrics_csv(run.out / "metrics.csv", rows);
  run.manifest["summary"] = summary_json(t);
  finish_run(run);
  return 0;
}

int cmd_eval(const Common& c, const std::string& expander_path, const std::string& testset) {
  const io::ExpanderArtifact a = io::load_expander(expander_path);
  Run run = start_run("eval", artifact_config(c, a));
  run.manifest["expander"] = fs::absolute(expander_path).string();
  return eval_fixed(run, realize(a.params), testset, std::string(to_string(a.params.mode)));
}

int cmd_baseline(const Common& c, const std::string& kind_name, const std::string& testset_flag) {
  const BaselineKind kind = [&] {
    try {
      return parse_baseline_kind(kind_name);
    } catch (const ParameterError& e) {
      throw ValidationError("kind", e.what());
    }
  }();
  io::ExperimentConfig cfg = base_config(c);
  cfg.data.channels = 1;
  Run run = start_run("baseline", cfg);
  const Eigen::Index side = run.cfg.geometry.expander_pixels();
  const ComplexField field = make_baseline({kind, run.cfg.seed, side, side});
  run.manifest["baseline"] = to_string(kind);
  emit_expander_diagnostics(run, "baseline", field);
  const fs::path testset = testset_flag.empty() ? run.cfg.data.test_dir : fs::absolute(testset_flag);
  return eval_fixed(run, field, testset, std::string(to_string(kind)));
}

int cmd_analyze(const Common& c, const std::string& expander_path, const std::string& image_path) {
  const io::ExpanderArtifact a = io::load_expander(expander_path);
  Run run = start_run("analyze", artifact_config(c, a));
  const io::ExperimentConfig& cfg = run.cfg;
  run.manifest["expander"] = fs::absolute(expander_path).string();
  const ComplexField field = realize(a.params);
  emit_expander_diagnostics(run, "expander", field);
  if (!image_path.empty()) {
    const io::Dataset img = io::load_image(image_path, cfg.geometry.expander_pixels(), 1);
    const RetinalFilter filter = retinal_filter_for(cfg.geometry, cfg.train);
    const BoundReport b = zero_phase_bound_check(field, img.mono[0].pixels, filter, cfg.train, cfg.geometry);
    run.manifest["image"] = fs::absolute(image_path).string();
    run.manifest["bound"] = {{"lhs", b.lhs},
                             {"rhs_spatial", b.rhs_spatial},
                             {"rhs_parseval", b.rhs_parseval},
                             {"forms_agree", b.forms_agree},
                             {"bounded", b.bounded}};
    std::cout << std::setprecision(17) << b.describe() << '\n';
  }
  finish_run(run);
  return 0;
}

int cmd_etendue(const Common& c, std::optional<double> slm_um, std::optional<double> exp_um,
                std::optional<double> nm, std::optional<int> pixels) {
  io::ExperimentConfig cfg = c.config.empty() ? io::ExperimentConfig{} : io::load_config(c.config);
  DisplayGeometry& g = cfg.geometry;
  if (slm_um) g.slm_pitch = *slm_um * 1e-6;
  if (exp_um) g.expander_pitch = *exp_um * 1e-6;
  if (nm) g.wavelength = *nm * 1e-9;
  if (pixels) g.slm_pixels = *pixels;
  g.validate();
  const json report = {{"slm_pitch_m", g.slm_pitch},
                       {"expander_pitch_m", g.expander_pitch},
                       {"wavelength_m", g.wavelength},
                       {"slm_pixels", g.slm_pixels},
                       {"area_m2", g.area()},
                       {"upsampling_factor", g.upsampling_factor()},
                       {"slm_half_angle_rad", diffraction_angle(g.wavelength, g.slm_pitch)},
                       {"expander_half_angle_rad", diffraction_angle(g.wavelength, g.expander_pitch)},
                       {"slm_etendue_m2sr", etendue(g, g.slm_pitch)},
                       {"expander_etendue_m2sr", etendue(g, g.expander_pitch)},
                       {"expansion_ratio", expansion_ratio(g)}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

void error_line(const char* kind, const std::string& message, const std::string& field = "") {
  json e = {{"error", kind}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Etendue expander training and hologram synthesis"};
  app.set_version_flag("--version", io::version());
  app.require_subcommand(1);

  Common common;
  std::string expander, image, testset, init, kind = "random_phase";
  std::optional<double> slm_um, exp_um, nm;
  std::optional<int> pixels;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config, "TOML config or run manifest (.json)");
    if (config_required) opt->required();
    opt->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory (overrides output.dir)");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { common.seed = s; }, "seed override");
  };

  auto* train = app.add_subcommand("train", "train an expander (trichromatic when data.channels = 3)");
  add_common(train, true);
  train->add_option("--init", init, "start from this expander artifact")->check(CLI::ExistingFile);

  auto* synth = app.add_subcommand("synth", "optimize an SLM frame for one image");
  add_common(synth, false);
  synth->add_option("--expander", expander)->required()->check(CLI::ExistingFile);
  synth->add_option("--image", image)->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "evaluate an expander on a directory of images");
  add_common(eval, false);
  eval->add_option("--expander", expander)->required()->check(CLI::ExistingFile);
  eval->add_option("--testset", testset)->required()->check(CLI::ExistingDirectory);

  auto* baseline = app.add_subcommand("baseline", "evaluate a random or all-ones expander");
  add_common(baseline, false);
  baseline->add_option("--kind", kind, "random_amplitude, random_phase, random_complex or all_ones");
  baseline->add_option("--testset", testset)->check(CLI::ExistingDirectory);

  auto* analyze = app.add_subcommand("analyze", "virtual frequency modulation and zero-phase bound");
  add_common(analyze, false);
  analyze->add_option("--expander", expander)->required()->check(CLI::ExistingFile);
  analyze->add_option("--image", image)->check(CLI::ExistingFile);

  auto* et = app.add_subcommand("etendue", "etendue and diffraction angles of a geometry");
  et->add_option("--config", common.config)->check(CLI::ExistingFile);
  et->add_option("--slm-pitch-um", slm_um);
  et->add_option("--expander-pitch-um", exp_um);
  et->add_option("--wavelength-nm", nm);
  et->add_option("--slm-pixels", pixels);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    error_line("usage", e.what());
    return kExitValidation;
  }

  try {
    if (*train) return cmd_train(common, init);
    if (*synth) return cmd_synth(common, expander, image);
    if (*eval) return cmd_eval(common, expander, testset);
    if (*baseline) return cmd_baseline(common, kind, testset);
    if (*analyze) return cmd_analyze(common, expander, image);
    if (*et) return cmd_etendue(common, slm_um, exp_um, nm, pixels);
  } catch (const ValidationError& e) {
    error_line("validation", e.what(), e.field);
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    error_line("validation", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    error_line("validation", e.what());
    return kExitValidation;
  } catch (const NumericError& e) {
    error_line("numeric", e.what());
    return kExitRuntime;
  } catch (const IntegrityError& e) {
    error_line("integrity", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    error_line("runtime", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
