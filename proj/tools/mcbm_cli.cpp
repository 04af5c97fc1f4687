// mcbm: joint alignment and background estimation for moving-camera frame sequences.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "mcbm/config.hpp"
#include "mcbm/error.hpp"
#include "mcbm/io.hpp"
#include "mcbm/pipeline.hpp"
#include "mcbm/synth.hpp"

namespace fs = std::filesystem;
using namespace mcbm;

namespace {

// Config file first, then `--set key=value` overrides, then the dedicated flags.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  bool serial = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override a configuration key (key=value), repeatable");
    for (const char* key : {"kind", "lambda", "beta", "alpha", "pad", "batch_size", "epochs_affine",
                            "epochs_homography", "step_size", "homography_step_size", "n_thresholds", "seed", "threads"}) {
      app->add_option_function<std::string>(
          std::string("--") + key, [this, key](const std::string& v) { flags[key] = v; }, "");
    }
    app->add_flag("--serial", serial, "single-threaded, bit-reproducible execution");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_file.empty()) load_config_file(config_file, cfg);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + s + "'");
      apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : flags) apply_setting(cfg, k, v);
    if (serial) cfg.threads = 1;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-camera background model: joint alignment, robust moments, backgrounds, ROC"};
  app.require_subcommand(1);

  ConfigFlags align_cfg, moments_cfg, background_cfg, eval_cfg, run_cfg;
  std::string frames_dir, out_dir, transforms_path, moments_path, backgrounds_dir, annotations_dir;

  auto* align = app.add_subcommand("align", "fit per-frame transforms");
  align->add_option("--frames", frames_dir, "frame directory")->required();
  align->add_option("--out", out_dir, "output directory")->required();
  align_cfg.attach(align);

  auto* moments = app.add_subcommand("moments", "robust panoramic moments from fitted transforms");
  moments->add_option("--frames", frames_dir, "frame directory")->required();
  moments->add_option("--transforms", transforms_path, "transforms CSV")->required()->check(CLI::ExistingFile);
  moments->add_option("--out", out_dir, "output directory")->required();
  moments_cfg.attach(moments);

  auto* background = app.add_subcommand("background", "per-frame backgrounds by unwarping the robust mean");
  background->add_option("--frames", frames_dir, "frame directory")->required();
  background->add_option("--transforms", transforms_path, "transforms CSV")->required()->check(CLI::ExistingFile);
  background->add_option("--moments", moments_path, "moments file")->required()->check(CLI::ExistingFile);
  background->add_option("--out", out_dir, "output directory")->required();
  background_cfg.attach(background);

  auto* eval = app.add_subcommand("eval", "ROC/AUC of background error against foreground annotations");
  eval->add_option("--frames", frames_dir, "frame directory")->required();
  eval->add_option("--backgrounds", backgrounds_dir, "background directory")->required();
  eval->add_option("--annotations", annotations_dir, "annotation mask directory")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval_cfg.attach(eval);

  SynthSpec spec;
  int pano_size = 256, channels = 3;
  std::uint64_t pano_seed = 7;
  auto* synth = app.add_subcommand("synth", "synthetic moving-camera sequence with ground truth");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--frames-count", spec.n_frames, "number of frames");
  synth->add_option("--frame-size", spec.frame_height, "frame height and width");
  synth->add_option("--panorama-size", pano_size, "panorama side length");
  synth->add_option("--channels", channels, "1 or 3");
  synth->add_option("--max-translation", spec.max_translation, "pixels");
  synth->add_option("--max-rotation", spec.max_rotation_deg, "degrees");
  synth->add_option("--max-log-scale", spec.max_log_scale, "|log scale|");
  synth->add_option("--fg-size", spec.fg_size, "foreground square side, 0 disables");
  synth->add_option("--fg-travel", spec.fg_travel, "path length of the square in frame widths");
  synth->add_flag("--integer-translation", spec.integer_translation, "round translations to whole pixels");
  synth->add_option("--seed", spec.seed, "motion seed");
  synth->add_option("--panorama-seed", pano_seed, "texture seed");

  auto* run = app.add_subcommand("run", "align, moments, background and optional eval");
  run->add_option("--frames", frames_dir, "frame directory")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--annotations", annotations_dir, "annotation mask directory (enables eval)");
  run_cfg.attach(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*align) {
      const PipelineConfig cfg = align_cfg.resolve();
      const auto frames = io::read_frames(frames_dir);
      const AlignmentState state = align_stage(frames, cfg, out_dir);
      std::cout << "aligned " << frames.size() << " frames; final loss " << state.history.back().loss << "\n";
    } else if (*moments) {
      const PipelineConfig cfg = moments_cfg.resolve();
      const auto frames = io::read_frames(frames_dir);
      moments_stage(frames, io::read_transforms(transforms_path), cfg, out_dir);
    } else if (*background) {
      const PipelineConfig cfg = background_cfg.resolve();
      const auto frames = io::read_frames(frames_dir);
      background_stage(frames, io::read_transforms(transforms_path), io::read_moments(moments_path), cfg, out_dir);
    } else if (*eval) {
      const PipelineConfig cfg = eval_cfg.resolve();
      const auto frames = io::read_frames(frames_dir);
      const auto backgrounds = io::read_frames(backgrounds_dir);
      const auto annotations = io::read_annotations(annotations_dir);
      const EvalOutcome e = eval_stage(frames, backgrounds, annotations, cfg, out_dir);
      std::cout << "auc_raw, auc_normalized\n"
                << io::format_double(e.curve.auc_raw) << ", " << io::format_double(e.curve.auc_normalized) << "\n";
      if (e.degenerate) {
        std::cerr << "warning: degenerate ROC (" << e.reason << ")\n";
        if (e.reason == "constant error field") return 2;
      }
    } else if (*synth) {
      spec.frame_width = spec.frame_height;
      if (channels != 1 && channels != 3) throw ArgumentError("--channels must be 1 or 3");
      spec.foreground = spec.fg_size > 0;
      const SynthData data = synthesize(make_panorama(pano_size, channels, pano_seed), spec);
      write_synth(out_dir, data);
    } else if (*run) {
      const PipelineConfig cfg = run_cfg.resolve();
      RunOptions opt{frames_dir, out_dir, std::nullopt};
      if (!annotations_dir.empty()) opt.annotations_dir = fs::path(annotations_dir);
      run_pipeline(opt, cfg);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
