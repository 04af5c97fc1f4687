#pragma once

#include <vector>

#include "mcbm/image.hpp"
#include "mcbm/ja.hpp"
#include "mcbm/moments.hpp"
#include "mcbm/transform.hpp"
#include "mcbm/warp.hpp"

namespace mcbm {

/// Panoramic moments pulled back onto one frame's h x w domain.
struct UnwarpedMoments {
  Image mean;
  Image var;
  BinaryMap valid;  // 0 where any contributing scene pixel has an empty stack
};

UnwarpedMoments unwarp_moments(const PanoramicMoments& m, const TransformParams& p, const SceneDomain& scene,
                               int height, int width);

struct BackgroundEstimate {
  Frame background;  // values in [0,1]
  BinaryMap valid;
  std::size_t invalid_pixels = 0;
};

/// Unwarped robust mean; pixels without panoramic support take the input frame's value.
BackgroundEstimate estimate_background(const Frame& f, const TransformParams& p, const PanoramicMoments& m,
                                       const SceneDomain& scene);
BackgroundEstimate estimate_background(int n, const std::vector<Frame>& frames, const AlignmentState& state,
                                       const PanoramicMoments& m);

/// Mean |f - background| over valid pixels and channels.
double masked_mean_abs_residual(const Frame& f, const BackgroundEstimate& bg);

struct NovelFrameConfig {
  TransformKind kind = TransformKind::affine;
  double beta = 0.35;
  double coverage_floor = 0.01;
  double step_size = 0.05;
  double homography_step_size = 0.0125;  // refinement from the best affine start
  int iterations = 150;
  // Translation starts on a grid of +-grid_extent frames at grid_step spacing.
  double grid_extent = 0.25;
  double grid_step = 0.125;
  int threads = 1;
};

struct NovelFrameFit {
  TransformParams params;
  double loss = 0.0;
  double coverage = 0.0;
  double identity_loss = 0.0;  // +inf when identity has no overlap
};

/// Aligns an unseen frame to frozen panoramic moments by minimizing its robust
/// alignment term against the trimmed mean. Throws NoOverlapError when no start
/// reaches the coverage floor.
NovelFrameFit align_novel_frame(const Frame& f, const PanoramicMoments& m, const SceneDomain& scene,
                                const NovelFrameConfig& cfg);

}  // namespace mcbm
