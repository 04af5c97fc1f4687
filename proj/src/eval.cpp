#include "mcbm/eval.hpp"

#include <algorithm>
#include <limits>

#include "mcbm/error.hpp"

namespace mcbm {

ErrorMap pixel_error(const Frame& f, const Frame& f_hat) {
  if (!f.same_shape(f_hat)) throw ArgumentError("pixel_error: frame dimensions differ");
  if (f.channels <= 0) throw ArgumentError("pixel_error: empty frame");
  ErrorMap e(f.height, f.width);
  const std::size_t plane = f.plane_size();
  for (std::size_t i = 0; i < plane; ++i) {
    double s = 0.0;
    for (int c = 0; c < f.channels; ++c) {
      const double d = f.data[c * plane + i] - f_hat.data[c * plane + i];
      s += d * d;
    }
    e.data[i] = s / f.channels;
  }
  return e;
}

std::vector<ErrorMap> scale_errors(std::span<const ErrorMap> errors) {
  if (errors.empty()) throw ArgumentError("scale_errors: no error maps");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : errors) {
    for (double v : e.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) throw DegenerateErrorField("scale_errors: constant error field");
  std::vector<ErrorMap> out(errors.begin(), errors.end());
  const double range = hi - lo;
  for (auto& e : out) {
    for (double& v : e.data) v = (v - lo) / range;
  }
  return out;
}

double trapezoid_auc(std::span<const RocPoint> pts, double fpr_scale, double tpr_scale) {
  double area = 0.0;
  double px = 0.0, py = 0.0;
  for (const auto& p : pts) {
    const double x = p.fpr / fpr_scale, y = p.tpr / tpr_scale;
    area += (x - px) * (y + py) * 0.5;
    px = x;
    py = y;
  }
  return area;
}

RocCurve roc(std::span<const ErrorMap> scaled, std::span<const Annotation> annotations, int n_thresholds) {
  if (n_thresholds < 2) throw ArgumentError("roc: n_thresholds must be >= 2");
  if (scaled.size() != annotations.size() || scaled.empty()) {
    throw ArgumentError("roc: need one annotation per error map");
  }

  // Histogram-free counting: sort the scores of each class once, then count >= a.
  std::vector<double> fg, bg;
  for (std::size_t n = 0; n < scaled.size(); ++n) {
    const auto& e = scaled[n];
    const auto& a = annotations[n];
    if (e.height != a.height || e.width != a.width) throw ArgumentError("roc: annotation dimensions differ");
    for (std::size_t i = 0; i < e.data.size(); ++i) (a.data[i] ? fg : bg).push_back(e.data[i]);
  }
  std::sort(fg.begin(), fg.end());
  std::sort(bg.begin(), bg.end());
  const double total = static_cast<double>(fg.size() + bg.size());
  auto at_least = [](const std::vector<double>& v, double a) {
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), a));
  };

  RocCurve out;
  out.positives = fg.size();
  out.negatives = bg.size();
  out.degenerate = fg.empty() || bg.empty();
  out.points.reserve(static_cast<std::size_t>(n_thresholds));
  for (int i = 0; i < n_thresholds; ++i) {
    const double a = static_cast<double>(i) / (n_thresholds - 1);
    out.points.push_back(RocPoint{a, at_least(bg, a) / total, at_least(fg, a) / total});
  }

  std::vector<RocPoint> descending(out.points.rbegin(), out.points.rend());
  out.auc_raw = trapezoid_auc(descending, 1.0, 1.0);
  if (out.degenerate) {
    out.auc_normalized = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.auc_normalized = trapezoid_auc(descending, static_cast<double>(bg.size()) / total,
                                       static_cast<double>(fg.size()) / total);
  }
  return out;
}

}  // namespace mcbm
