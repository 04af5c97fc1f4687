#include "mcbm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcbm/error.hpp"
#include "mcbm/parallel.hpp"

namespace mcbm {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 0.5)) throw ArgumentError("trim fraction alpha must be in [0, 0.5)");
}

int trim_count(int n, double alpha) { return static_cast<int>(std::floor(alpha * n)); }

// Sorted in place.
TrimmedStats trimmed_sorted(std::span<double> values, double alpha) {
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  const int cut = trim_count(n, alpha);
  const auto kept = values.subspan(static_cast<std::size_t>(cut), static_cast<std::size_t>(n - 2 * cut));
  TrimmedStats s;
  s.kept = static_cast<int>(kept.size());
  if (kept.front() == kept.back()) {
    s.mean = kept.front();
    return s;
  }
  s.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / s.kept;
  double ss = 0.0;
  for (double v : kept) ss += (v - s.mean) * (v - s.mean);
  s.var = ss / s.kept;
  return s;
}

// Trimming by value order, then mask-weighted moments of the kept samples.
TrimmedStats trimmed_weighted(std::vector<std::pair<double, double>>& samples, double alpha) {
  std::sort(samples.begin(), samples.end());
  const int n = static_cast<int>(samples.size());
  const int cut = trim_count(n, alpha);
  double wsum = 0.0, sum = 0.0;
  for (int i = cut; i < n - cut; ++i) {
    wsum += samples[i].second;
    sum += samples[i].second * samples[i].first;
  }
  TrimmedStats s;
  s.kept = n - 2 * cut;
  if (samples[cut].first == samples[n - cut - 1].first) {
    s.mean = samples[cut].first;
    return s;
  }
  s.mean = sum / wsum;
  double ss = 0.0;
  for (int i = cut; i < n - cut; ++i) {
    const double d = samples[i].first - s.mean;
    ss += samples[i].second * d * d;
  }
  s.var = ss / wsum;
  return s;
}

}  // namespace

TrimmedStats trimmed_mean_var(std::span<const double> values, double alpha) {
  if (values.empty()) throw ArgumentError("trimmed_mean_var: empty list");
  check_alpha(alpha);
  std::vector<double> copy(values.begin(), values.end());
  return trimmed_sorted(copy, alpha);
}

PanoramicMoments compute_moments(std::span<const WarpedFrame> warps, double alpha) {
  MomentOptions opt;
  opt.alpha = alpha;
  return compute_moments(warps, opt);
}

PanoramicMoments compute_moments(std::span<const WarpedFrame> warps, const MomentOptions& opt) {
  check_alpha(opt.alpha);
  if (warps.empty()) throw ArgumentError("compute_moments: no warped frames");
  const int c_count = warps.front().image.channels;
  const int height = warps.front().mask.height;
  const int width = warps.front().mask.width;
  for (const auto& w : warps) {
    if (w.image.channels != c_count || w.mask.height != height || w.mask.width != width) {
      throw ArgumentError("compute_moments: warped frames differ in scene dimensions");
    }
  }
  const std::size_t plane = static_cast<std::size_t>(height) * width;

  PanoramicMoments out;
  out.mean = Image(c_count, height, width);
  out.var = Image(c_count, height, width);
  out.count.assign(plane, 0);
  out.alpha = opt.alpha;

  // Rows are independent.
  parallel_for(height, resolve_threads(opt.threads), [&](int y) {
    std::vector<double> stack;
    std::vector<std::pair<double, double>> weighted;
    std::vector<std::size_t> members;
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      members.clear();
      for (std::size_t n = 0; n < warps.size(); ++n) {
        if (warps[n].mask.data[i] > 0.0) members.push_back(n);
      }
      out.count[i] = static_cast<int>(members.size());
      if (members.empty()) continue;
      for (int c = 0; c < c_count; ++c) {
        const std::size_t ci = c * plane + i;
        TrimmedStats s;
        if (opt.mask_weighted) {
          weighted.clear();
          for (std::size_t n : members) {
            const double m = warps[n].mask.data[i];
            weighted.emplace_back(warps[n].image.data[ci] / m, m);
          }
          s = trimmed_weighted(weighted, opt.alpha);
        } else {
          stack.clear();
          for (std::size_t n : members) stack.push_back(warps[n].image.data[ci] / warps[n].mask.data[i]);
          s = trimmed_sorted(stack, opt.alpha);
        }
        out.mean.data[ci] = s.mean;
        out.var.data[ci] = s.var;
      }
    }
  });
  return out;
}

}  // namespace mcbm
