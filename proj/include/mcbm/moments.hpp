#pragma once

#include <span>
#include <vector>

#include "mcbm/image.hpp"
#include "mcbm/warp.hpp"

namespace mcbm {

/// Per-pixel robust moments of the pixel stacks over the scene domain.
struct PanoramicMoments {
  Image mean;                // C x H x W trimmed mean
  Image var;                 // C x H x W trimmed (biased) variance
  std::vector<int> count;    // H x W stack sizes N_x; 0 marks an invalid pixel
  double alpha = 0.3;

  int channels() const { return mean.channels; }
  int height() const { return mean.height; }
  int width() const { return mean.width; }
};

struct TrimmedStats {
  double mean = 0.0;
  double var = 0.0;
  int kept = 0;
};

/// Sorts, drops floor(alpha*N) entries from each end and returns the mean and
/// divide-by-kept variance of the rest. Requires N >= 1 and 0 <= alpha < 0.5.
TrimmedStats trimmed_mean_var(std::span<const double> values, double alpha);

struct MomentOptions {
  double alpha = 0.3;
  // Weight kept samples by their mask.
  bool mask_weighted = false;
  int threads = 1;
};

/// Stack membership at x is M^n_x > 0. Stack values are image / mask.
PanoramicMoments compute_moments(std::span<const WarpedFrame> warps, const MomentOptions& opt);
PanoramicMoments compute_moments(std::span<const WarpedFrame> warps, double alpha);

}  // namespace mcbm
