#pragma once

#include <span>
#include <vector>

#include "mcbm/image.hpp"

namespace mcbm {

/// Real-valued h x w map.
struct ErrorMap {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ErrorMap() = default;
  ErrorMap(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}
};

using Annotation = BinaryMap;  // 1 = foreground

/// Channel-mean squared error per pixel.
ErrorMap pixel_error(const Frame& f, const Frame& f_hat);

/// (E - min) / (max - min) with extrema over every frame and pixel of the sequence.
/// Throws DegenerateErrorField when max == min.
std::vector<ErrorMap> scale_errors(std::span<const ErrorMap> errors);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // thresholds strictly increasing
  double auc_raw = 0.0;          // rates over N*h*w, as displayed in the evaluation protocol
  double auc_normalized = 0.0;   // rates divided by their maxima; NaN when degenerate
  std::size_t positives = 0;
  std::size_t negatives = 0;
  bool degenerate = false;       // no positive or no negative pixel
};

/// TPR(a) = #{fg & E >= a} / (N h w), FPR(a) = #{bg & E >= a} / (N h w) on the inclusive
/// grid a_i = i / (n_thresholds - 1). AUC is the trapezoid rule over the points in
/// order of decreasing threshold, anchored at the origin.
RocCurve roc(std::span<const ErrorMap> scaled, std::span<const Annotation> annotations, int n_thresholds);

/// Trapezoid area of (fpr, tpr) points listed by decreasing threshold, starting from (0, 0).
double trapezoid_auc(std::span<const RocPoint> by_decreasing_threshold, double fpr_scale, double tpr_scale);

}  // namespace mcbm
