#include "mcbm/background.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcbm/error.hpp"
#include "mcbm/parallel.hpp"

namespace mcbm {

UnwarpedMoments unwarp_moments(const PanoramicMoments& m, const TransformParams& p, const SceneDomain& scene,
                               int height, int width) {
  if (m.height() != scene.height || m.width() != scene.width) {
    throw ArgumentError("unwarp_moments: moments do not match the scene domain");
  }
  const Matrix3 t = realize(p);
  const int c_count = m.channels();
  const std::size_t scene_plane = scene.size();
  UnwarpedMoments out;
  out.mean = Image(c_count, height, width);
  out.var = Image(c_count, height, width);
  out.valid = BinaryMap(height, width);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double w = t(2, 0) * x + t(2, 1) * y + t(2, 2);
      if (!(w > 1e-12)) continue;
      const double sx = (t(0, 0) * x + t(0, 1) * y + t(0, 2)) / w + scene.offset_x;
      const double sy = (t(1, 0) * x + t(1, 1) * y + t(1, 2)) / w + scene.offset_y;
      const BilinearStencil st(sx, sy, scene.height, scene.width);
      if (!st.any) continue;

      // Every corner carrying weight must lie in the scene and have a non-empty stack.
      const double weights[4] = {(1 - st.fx) * (1 - st.fy), st.fx * (1 - st.fy), (1 - st.fx) * st.fy,
                                 st.fx * st.fy};
      bool valid = true;
      for (int k = 0; k < 4 && valid; ++k) {
        if (weights[k] == 0.0) continue;
        if (!st.in[k]) {
          valid = false;
          break;
        }
        const int cx = st.x0 + (k & 1), cy = st.y0 + (k >> 1);
        if (m.count[static_cast<std::size_t>(cy) * scene.width + cx] == 0) valid = false;
      }
      if (!valid) continue;
      out.valid.at(y, x) = 1;
      for (int c = 0; c < c_count; ++c) {
        out.mean.at(c, y, x) = st.value(m.mean.data.data() + c * scene_plane, scene.width);
        out.var.at(c, y, x) = st.value(m.var.data.data() + c * scene_plane, scene.width);
      }
    }
  }
  return out;
}

BackgroundEstimate estimate_background(const Frame& f, const TransformParams& p, const PanoramicMoments& m,
                                       const SceneDomain& scene) {
  if (f.channels != m.channels()) throw ArgumentError("estimate_background: channel count mismatch");
  const UnwarpedMoments u = unwarp_moments(m, p, scene, f.height, f.width);
  BackgroundEstimate out;
  out.background = Image(f.channels, f.height, f.width);
  out.valid = u.valid;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const bool ok = u.valid.at(y, x) != 0;
      if (!ok) ++out.invalid_pixels;
      for (int c = 0; c < f.channels; ++c) {
        out.background.at(c, y, x) = ok ? std::clamp(u.mean.at(c, y, x), 0.0, 1.0) : f.at(c, y, x);
      }
    }
  }
  return out;
}

BackgroundEstimate estimate_background(int n, const std::vector<Frame>& frames, const AlignmentState& state,
                                       const PanoramicMoments& m) {
  if (n < 0 || n >= static_cast<int>(frames.size()) || frames.size() != state.params.size()) {
    throw ArgumentError("estimate_background: frame index out of range");
  }
  return estimate_background(frames[static_cast<std::size_t>(n)], state.params[static_cast<std::size_t>(n)], m,
                             state.scene);
}

double masked_mean_abs_residual(const Frame& f, const BackgroundEstimate& bg) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      if (!bg.valid.at(y, x)) continue;
      for (int c = 0; c < f.channels; ++c) sum += std::abs(f.at(c, y, x) - bg.background.at(c, y, x));
      count += static_cast<std::size_t>(f.channels);
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

namespace {

struct Candidate {
  TransformParams params;
  double loss = std::numeric_limits<double>::infinity();
  double coverage = 0.0;
};

// Adam descent from `start`; returns the best point visited (including the start).
Candidate descend(const Frame& f, const TransformParams& start, const Image& mu, const SceneDomain& scene,
                  const LossOptions& opts, double step, int iterations) {
  const Eigen::VectorXd scales = parameter_scales(start.kind, f.height, f.width);
  Candidate best;
  TransformParams p = start;
  AdamState adam = AdamState::zeros(p.dim());
  for (int it = 0; it <= iterations; ++it) {
    const FrameTerm t = frame_term(f, p, mu, scene, opts, it < iterations);
    if (t.dropped) break;
    if (t.loss < best.loss) best = Candidate{p, t.loss, t.coverage};
    if (it == iterations) break;
    adam_step(p.theta, adam, t.gradient, scales * step_size_at(step, it, iterations));
  }
  return best;
}

}  // namespace

NovelFrameFit align_novel_frame(const Frame& f, const PanoramicMoments& m, const SceneDomain& scene,
                                const NovelFrameConfig& cfg) {
  check_frame(f);
  if (f.channels != m.channels() || m.height() != scene.height || m.width() != scene.width) {
    throw ArgumentError("align_novel_frame: frame or moments do not match the scene");
  }
  if (!(cfg.grid_step > 0.0) || cfg.grid_extent < 0.0) throw ArgumentError("align_novel_frame: bad start grid");

  BinaryMap support(scene.height, scene.width);
  for (std::size_t i = 0; i < support.data.size(); ++i) support.data[i] = m.count[i] > 0 ? 1 : 0;
  const LossOptions opts{cfg.beta, cfg.coverage_floor, &support};

  std::vector<TransformParams> starts;
  const int steps = static_cast<int>(std::floor(cfg.grid_extent / cfg.grid_step + 1e-9));
  starts.push_back(TransformParams::identity(TransformKind::affine));
  for (int iy = -steps; iy <= steps; ++iy) {
    for (int ix = -steps; ix <= steps; ++ix) {
      if (ix == 0 && iy == 0) continue;
      TransformParams p = TransformParams::identity(TransformKind::affine);
      p.theta[2] = ix * cfg.grid_step * f.width;
      p.theta[5] = iy * cfg.grid_step * f.height;
      starts.push_back(p);
    }
  }

  NovelFrameFit out;
  const FrameTerm at_identity = frame_term(f, starts.front(), m.mean, scene, opts, false);
  out.identity_loss = at_identity.dropped ? std::numeric_limits<double>::infinity() : at_identity.loss;

  std::vector<Candidate> results(starts.size());
  parallel_for(static_cast<int>(starts.size()), resolve_threads(cfg.threads), [&](int i) {
    results[static_cast<std::size_t>(i)] =
        descend(f, starts[static_cast<std::size_t>(i)], m.mean, scene, opts, cfg.step_size, cfg.iterations);
  });
  // First minimum wins so ties resolve in start order.
  Candidate best;
  for (const auto& r : results) {
    if (r.loss < best.loss) best = r;
  }
  if (!std::isfinite(best.loss)) {
    throw NoOverlapError("align_novel_frame: the frame does not overlap the panorama at any start");
  }

  if (cfg.kind == TransformKind::homography) {
    const Candidate refined = descend(f, TransformParams::homography_from(realize(best.params)), m.mean, scene,
                                      opts, cfg.homography_step_size, cfg.iterations);
    if (refined.loss <= best.loss) best = refined;
  }
  out.params = best.params;
  out.loss = best.loss;
  out.coverage = best.coverage;
  return out;
}

}  // namespace mcbm
