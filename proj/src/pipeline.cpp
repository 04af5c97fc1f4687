#include "mcbm/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "mcbm/error.hpp"
#include "mcbm/io.hpp"
#include "mcbm/parallel.hpp"

namespace mcbm {

namespace {

Image target_snapshot(const Accumulators& acc) {
  Image mu(acc.channels, acc.height, acc.width);
  const std::size_t plane = acc.m.size();
  for (std::size_t i = 0; i < plane; ++i) {
    if (!(acc.m[i] > 0.0)) continue;
    for (int c = 0; c < acc.channels; ++c) mu.data[c * plane + i] = acc.g[c * plane + i] / acc.m[i];
  }
  return mu;
}

SceneDomain scene_for(const std::vector<Frame>& frames, const PipelineConfig& cfg) {
  check_sequence(frames);
  return scene_bounds(frames.front().height, frames.front().width, cfg.pad);
}

void check_params(const std::vector<Frame>& frames, const std::vector<TransformParams>& params) {
  if (frames.size() != params.size()) {
    throw ArgumentError("have " + std::to_string(frames.size()) + " frames but " + std::to_string(params.size()) +
                        " transforms");
  }
}

// Re-raises module errors with the stage name prefixed; the error category is kept.
template <class Fn>
auto labelled(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ArgumentError& e) {
    throw ArgumentError(std::string(stage) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(stage) + ": " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

AlignmentState align_stage(const std::vector<Frame>& frames, const PipelineConfig& cfg, const fs::path& out_dir) {
  JaConfig ja = to_ja_config(cfg);
  if (cfg.snapshot_every > 0) {
    ja.on_epoch = [&](const EpochRecord& rec, const AlignmentState& state) {
      if ((rec.epoch + 1) % cfg.snapshot_every != 0) return;
      char name[64];
      std::snprintf(name, sizeof name, "target_%05d.png", rec.epoch + 1);
      const Image mu = target_snapshot(state.acc);
      if (mu.channels == 1 || mu.channels == 3) io::write_png(out_dir / "snapshots" / name, mu);
    };
  }
  AlignmentState state = fit(frames, ja);
  // Frame 0 becomes the reference; state.acc stays in the fitted gauge.
  state.params = normalize_gauge(state.params);
  io::write_transforms(out_dir / "transforms.csv", state.params);
  io::write_epoch_log(out_dir / "epochs.csv", state.history);
  return state;
}

PanoramicMoments moments_stage(const std::vector<Frame>& frames, const std::vector<TransformParams>& params,
                               const PipelineConfig& cfg, const fs::path& out_dir) {
  check_params(frames, params);
  const SceneDomain scene = scene_for(frames, cfg);
  std::vector<WarpedFrame> warps(frames.size());
  parallel_for(static_cast<int>(frames.size()), resolve_threads(cfg.threads), [&](int i) {
    warps[static_cast<std::size_t>(i)] = warp_frame(frames[static_cast<std::size_t>(i)],
                                                    realize(params[static_cast<std::size_t>(i)]), scene);
  });
  PanoramicMoments m = compute_moments(warps, to_moment_options(cfg));
  io::write_moments(out_dir / "moments.bin", m);
  if (m.channels() == 1 || m.channels() == 3) io::write_png(out_dir / "mu_r.png", m.mean);
  return m;
}

std::vector<Frame> background_stage(const std::vector<Frame>& frames, const std::vector<TransformParams>& params,
                                    const PanoramicMoments& moments, const PipelineConfig& cfg,
                                    const fs::path& out_dir) {
  check_params(frames, params);
  const SceneDomain scene = scene_for(frames, cfg);
  if (moments.height() != scene.height || moments.width() != scene.width ||
      moments.channels() != frames.front().channels) {
    throw ArgumentError("moments (" + std::to_string(moments.height()) + "x" + std::to_string(moments.width()) +
                        ") do not match the scene domain for pad " + io::format_double(cfg.pad));
  }
  std::vector<BackgroundEstimate> estimates(frames.size());
  parallel_for(static_cast<int>(frames.size()), resolve_threads(cfg.threads), [&](int i) {
    const auto u = static_cast<std::size_t>(i);
    estimates[u] = estimate_background(frames[u], params[u], moments, scene);
  });

  fs::create_directories(out_dir / "backgrounds");
  std::ofstream csv(out_dir / "residuals.csv");
  if (!csv) throw ArgumentError("cannot write '" + (out_dir / "residuals.csv").string() + "'");
  csv << "frame,masked_mean_abs_residual,invalid_fraction\n";
  std::vector<Frame> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& e = estimates[i];
    const double invalid = static_cast<double>(e.invalid_pixels) / static_cast<double>(frames[i].plane_size());
    csv << i << "," << io::format_double(masked_mean_abs_residual(frames[i], e)) << ","
        << io::format_double(invalid) << "\n";
    if (e.background.channels == 1 || e.background.channels == 3) {
      io::write_png(out_dir / "backgrounds" / io::frame_filename("background_", i, frames.size()), e.background);
    }
    out.push_back(e.background);
  }
  return out;
}

EvalOutcome eval_stage(const std::vector<Frame>& frames, const std::vector<Frame>& backgrounds,
                       const std::vector<Annotation>& annotations, const PipelineConfig& cfg,
                       const fs::path& out_dir) {
  if (frames.size() != backgrounds.size() || frames.size() != annotations.size()) {
    throw ArgumentError("eval: need equally many frames (" + std::to_string(frames.size()) + "), backgrounds (" +
                        std::to_string(backgrounds.size()) + ") and annotations (" +
                        std::to_string(annotations.size()) + ")");
  }
  std::vector<ErrorMap> errors;
  errors.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (annotations[i].height != frames[i].height || annotations[i].width != frames[i].width) {
      throw ArgumentError("eval: annotation " + std::to_string(i) + " does not match the frame size");
    }
    errors.push_back(pixel_error(frames[i], backgrounds[i]));
  }

  EvalOutcome out;
  std::vector<ErrorMap> scaled;
  try {
    scaled = scale_errors(errors);
  } catch (const DegenerateErrorField& e) {
    out.degenerate = true;
    out.reason = "constant error field";
    out.curve.auc_raw = out.curve.auc_normalized = std::numeric_limits<double>::quiet_NaN();
    out.curve.degenerate = true;
    io::write_roc(out_dir / "roc.csv", RocCurve{});
  }
  if (!out.degenerate) {
    out.curve = roc(scaled, annotations, cfg.n_thresholds);
    if (out.curve.degenerate) {
      out.degenerate = true;
      out.reason = out.curve.positives == 0 ? "no foreground pixels" : "no background pixels";
    }
    io::write_roc(out_dir / "roc.csv", out.curve);
  }
  fs::create_directories(out_dir);
  std::ofstream summary(out_dir / "auc.csv");
  summary << "auc_raw,auc_normalized\n"
          << io::format_double(out.curve.auc_raw) << "," << io::format_double(out.curve.auc_normalized) << "\n";
  return out;
}

void run_pipeline(const RunOptions& opt, const PipelineConfig& cfg) {
  using clock = std::chrono::steady_clock;
  fs::create_directories(opt.out_dir);
  if (opt.annotations_dir && !fs::is_directory(*opt.annotations_dir)) {
    throw ArgumentError("annotations directory '" + opt.annotations_dir->string() + "' does not exist");
  }

  const auto t_read = clock::now();
  const std::vector<Frame> frames = labelled("read", [&] { return io::read_frames(opt.frames_dir); });
  std::vector<Annotation> annotations;
  if (opt.annotations_dir) {
    annotations = labelled("read", [&] { return io::read_annotations(*opt.annotations_dir); });
  }
  const double read_s = seconds_since(t_read);

  const auto t_align = clock::now();
  const AlignmentState state = labelled("align", [&] { return align_stage(frames, cfg, opt.out_dir); });
  const double align_s = seconds_since(t_align);

  const auto t_mom = clock::now();
  const PanoramicMoments moments =
      labelled("moments", [&] { return moments_stage(frames, state.params, cfg, opt.out_dir); });
  const double moments_s = seconds_since(t_mom);

  const auto t_bg = clock::now();
  const std::vector<Frame> backgrounds =
      labelled("background", [&] { return background_stage(frames, state.params, moments, cfg, opt.out_dir); });
  const double background_s = seconds_since(t_bg);

  double eval_s = 0.0;
  if (opt.annotations_dir) {
    const auto t_eval = clock::now();
    const EvalOutcome e =
        labelled("eval", [&] { return eval_stage(frames, backgrounds, annotations, cfg, opt.out_dir); });
    eval_s = seconds_since(t_eval);
    if (e.degenerate) std::cerr << "warning: eval: degenerate ROC (" << e.reason << ")\n";
  }

  std::ofstream manifest(opt.out_dir / "manifest.txt");
  manifest << "# mcbm " << kVersion << "\n"
           << "# frames = " << opt.frames_dir.string() << "\n";
  if (opt.annotations_dir) manifest << "# annotations = " << opt.annotations_dir->string() << "\n";
  manifest << "# frame_count = " << frames.size() << "\n"
           << "# wall_seconds read = " << read_s << ", align = " << align_s << ", moments = " << moments_s
           << ", background = " << background_s << ", eval = " << eval_s << "\n"
           << to_config_text(cfg);
}

}  // namespace mcbm
