#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mcbm/image.hpp"
#include "mcbm/transform.hpp"
#include "mcbm/warp.hpp"

namespace mcbm {

/// Memory of past warps: G holds lambda-weighted sums of mask * pixel, M of masks.
/// Pixel values are the in-domain values image / mask, so mask * pixel is the warped
/// image itself.
struct Accumulators {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> g;  // C x H x W
  std::vector<double> m;  // H x W

  Accumulators() = default;
  Accumulators(int c, int h, int w)
      : channels(c), height(h), width(w),
        g(static_cast<std::size_t>(c) * h * w, 0.0), m(static_cast<std::size_t>(h) * w, 0.0) {}
};

struct TargetMean {
  Image mu;                    // C x H x W, zero at invalid pixels
  std::vector<double> weight;  // H x W
  BinaryMap valid;             // weight > 0
};

/// Alignment target from the accumulators plus the current batch:
/// mu = (G + sum M^n g^n) / (M + sum M^n).
TargetMean target_mean(const Accumulators& acc, std::span<const WarpedFrame> batch);

struct LossOptions {
  double beta = 0.35;
  double coverage_floor = 0.01;  // fraction of h*w below which a frame is dropped
  // Optional scene-domain support; pixels with support 0 are ignored.
  const BinaryMap* support = nullptr;
};

/// One frame's term of the joint-alignment loss and its gradient. Residuals use the
/// in-domain value image / mask, so partially covered border pixels are not darkened.
struct FrameTerm {
  double loss = 0.0;
  double coverage = 0.0;  // sum of the warped mask
  bool dropped = false;
  Eigen::VectorXd gradient;
};

FrameTerm frame_term(const Frame& f, const TransformParams& p, const Image& mu, const SceneDomain& scene,
                     const LossOptions& opt, bool with_gradient);

struct FrameRef {
  const Frame* frame;
  const TransformParams* params;
};

struct BatchLoss {
  double loss = 0.0;
  int dropped = 0;
};

/// Mean over non-dropped frames of the per-frame robust, mask-normalized error
/// against mu. Throws DegenerateBatchError if every frame is dropped.
BatchLoss batch_loss(std::span<const FrameRef> batch, const Image& mu, const SceneDomain& scene,
                     const LossOptions& opt);

/// Gradient of one frame's term with mu held constant. Zero for dropped frames.
Eigen::VectorXd loss_gradient(const Frame& f, const TransformParams& p, const Image& mu,
                              const SceneDomain& scene, const LossOptions& opt);

/// Bias-corrected adaptive-moment state for one parameter vector.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  int steps = 0;

  static AdamState zeros(int dim);
};

struct AdamBetas {
  double beta1 = 0.9;
  double beta2 = 0.99;
};

/// theta -= lr .* mhat / (sqrt(vhat) + eps), lr per parameter.
void adam_step(Eigen::VectorXd& theta, AdamState& state, const Eigen::VectorXd& grad,
               const Eigen::VectorXd& lr, const AdamBetas& betas = {});

/// Per-parameter step scale: one unit moves the frame corners by roughly
/// the frame extent, for every parameter of the family.
Eigen::VectorXd parameter_scales(TransformKind kind, int height, int width);

struct EpochRecord {
  int epoch = 0;
  TransformKind stage = TransformKind::affine;
  double loss = 0.0;
  double mean_coverage = 0.0;  // mean over frames of sum(M^n) / (h*w)
  int dropped_frames = 0;
};

struct AlignmentState;

struct JaConfig {
  int batch_size = 8;
  int epochs_affine = 200;
  int epochs_homography = 100;
  double step_size = 0.05;  // halved after each third of a stage
  double homography_step_size = 0.0125;  // refinement stage starts where the affine stage ended
  AdamBetas adam;
  double beta = 0.35;
  double lambda = 0.9;
  double coverage_floor = 0.01;
  double pad = 3.0;
  std::uint64_t seed = 0;
  bool accumulate = true;             // false gives a batch-only target
  bool accumulate_post_step = false;  // re-warp with updated theta before accumulating
  int threads = 1;
  std::function<void(const EpochRecord&, const AlignmentState&)> on_epoch;
};

struct AlignmentState {
  SceneDomain scene;
  int frame_height = 0;
  int frame_width = 0;
  std::vector<TransformParams> params;
  Accumulators acc;
  int epoch = 0;
  double lambda = 0.9;
  std::vector<AdamState> opt;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> history;

  static AlignmentState initial(const std::vector<Frame>& frames, const JaConfig& cfg);
};

/// G <- lambda G, M <- lambda M, epoch += 1.
void epoch_decay(AlignmentState& state);

/// G += sum M^n g^n, M += sum M^n.
void accumulate_batch(AlignmentState& state, std::span<const WarpedFrame> batch);

double step_size_at(double base, int epoch_in_stage, int stage_epochs);

/// Joint alignment from identity: an affine stage, then (if epochs_homography > 0) a
/// homography stage warm-started from the affine result.
AlignmentState fit(const std::vector<Frame>& frames, const JaConfig& cfg);

}  // namespace mcbm
