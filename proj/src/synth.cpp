#include "mcbm/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "mcbm/error.hpp"
#include "mcbm/io.hpp"
#include "mcbm/warp.hpp"

namespace mcbm {

namespace {

// Smooth signal over t in [0,1] with max |value| == bound.
std::vector<double> smooth_walk(int n, int components, double bound, std::mt19937_64& rng) {
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  std::uniform_real_distribution<double> freq(0.2, 1.2), phase(0.0, 2.0 * std::numbers::pi), amp(0.5, 1.0);
  for (int k = 0; k < components; ++k) {
    const double w = freq(rng), ph = phase(rng), a = amp(rng);
    for (int i = 0; i < n; ++i) {
      const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
      v[static_cast<std::size_t>(i)] += a * std::sin(2.0 * std::numbers::pi * w * t + ph);
    }
  }
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  for (double& x : v) x = (bound == 0.0 || peak == 0.0) ? 0.0 : x * bound / peak;
  return v;
}

}  // namespace

Image make_panorama(int size, int channels, std::uint64_t seed) {
  if (size <= 0 || channels <= 0) throw ArgumentError("make_panorama: empty size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Image p(channels, size, size);

  for (int c = 0; c < channels; ++c) {
    for (int k = 0; k < 4; ++k) {
      const double wavelength = 40.0 + 80.0 * uni(rng);
      const double dir = 2.0 * std::numbers::pi * uni(rng);
      const double ph = 2.0 * std::numbers::pi * uni(rng);
      const double kx = std::cos(dir) * 2.0 * std::numbers::pi / wavelength;
      const double ky = std::sin(dir) * 2.0 * std::numbers::pi / wavelength;
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) p.at(c, y, x) += 0.15 * std::sin(kx * x + ky * y + ph);
      }
    }
  }

  const int blobs = size * size / 80;
  for (int b = 0; b < blobs; ++b) {
    const double cx = size * uni(rng), cy = size * uni(rng);
    const double sigma = 2.5 * std::pow(4.0, uni(rng));
    const double amp = 0.5 * (2.0 * uni(rng) - 1.0);
    std::vector<double> tint(static_cast<std::size_t>(channels));
    for (auto& t : tint) t = 1.5 * uni(rng) - 0.5;
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int x0 = std::max(0, static_cast<int>(cx) - r), x1 = std::min(size - 1, static_cast<int>(cx) + r);
    const int y0 = std::max(0, static_cast<int>(cy) - r), y1 = std::min(size - 1, static_cast<int>(cy) + r);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double g = amp * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * sigma * sigma));
        for (int c = 0; c < channels; ++c) p.at(c, y, x) += tint[static_cast<std::size_t>(c)] * g;
      }
    }
  }

  const auto [lo, hi] = std::minmax_element(p.data.begin(), p.data.end());
  const double min = *lo, range = *hi - *lo;
  for (double& v : p.data) v = 0.05 + 0.9 * (v - min) / range;
  return p;
}

SynthData synthesize(const Image& panorama, const SynthSpec& spec) {
  const int h = spec.frame_height, w = spec.frame_width;
  if (h <= 0 || w <= 0 || spec.n_frames <= 0) throw ArgumentError("synthesize: empty frame size or count");
  if (panorama.height < h || panorama.width < w) throw ArgumentError("synthesize: panorama smaller than a frame");
  if (spec.max_translation < 0 || spec.max_rotation_deg < 0 || spec.max_log_scale < 0 || spec.fg_size < 0 ||
      spec.fg_travel < 0) {
    throw ArgumentError("synthesize: motion bounds must be non-negative");
  }

  std::mt19937_64 rng(spec.seed);
  const int n = spec.n_frames;
  auto tx = smooth_walk(n, spec.walk_components, spec.max_translation, rng);
  auto ty = smooth_walk(n, spec.walk_components, spec.max_translation, rng);
  if (spec.integer_translation) {
    for (double& v : tx) v = std::round(v);
    for (double& v : ty) v = std::round(v);
  }
  const auto rot = smooth_walk(n, spec.walk_components, spec.max_rotation_deg * std::numbers::pi / 180.0, rng);
  const auto lsc = smooth_walk(n, spec.walk_components, spec.max_log_scale, rng);

  SynthData out;
  out.panorama = panorama;
  out.origin_x = (panorama.width - w) / 2;
  out.origin_y = (panorama.height - h) / 2;

  const Vector2 center((w - 1) / 2.0, (h - 1) / 2.0);
  const Vector2 pano_center(out.origin_x + center.x(), out.origin_y + center.y());
  const Vector2 half_path = 0.5 * spec.fg_travel * Vector2(w, 0.5 * h);
  const Vector2 path_from = pano_center - half_path;
  const Vector2 path_to = pano_center + half_path;

  std::vector<double> fg_color(static_cast<std::size_t>(panorama.channels), 0.98);
  if (panorama.channels == 3) fg_color = {0.95, 0.1, 0.8};

  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double s = std::exp(lsc[ui]);
    Matrix3 lin = Matrix3::Identity();
    lin(0, 0) = s * std::cos(rot[ui]);
    lin(0, 1) = -s * std::sin(rot[ui]);
    lin(1, 0) = s * std::sin(rot[ui]);
    lin(1, 1) = s * std::cos(rot[ui]);
    const Matrix3 t = translation(center.x() + tx[ui], center.y() + ty[ui]) * lin *
                      translation(-center.x(), -center.y());

    for (const auto& corner : {Vector2(0, 0), Vector2(w - 1, 0), Vector2(0, h - 1), Vector2(w - 1, h - 1)}) {
      const Vector2 q = apply(t, corner) + Vector2(out.origin_x, out.origin_y);
      if (q.x() < 0 || q.y() < 0 || q.x() > panorama.width - 1 || q.y() > panorama.height - 1) {
        throw ArgumentError("synthesize: motion of frame " + std::to_string(i) + " leaves the panorama");
      }
    }

    const double progress = n > 1 ? static_cast<double>(i) / (n - 1) : 0.5;
    const Vector2 square = path_from + progress * (path_to - path_from) - Vector2::Constant(spec.fg_size / 2.0);

    Frame clean(panorama.channels, h, w);
    Frame frame(panorama.channels, h, w);
    Annotation ann(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Vector2 q = apply(t, Vector2(x, y)) + Vector2(out.origin_x, out.origin_y);
        const bool fg = spec.foreground && q.x() >= square.x() && q.x() < square.x() + spec.fg_size &&
                        q.y() >= square.y() && q.y() < square.y() + spec.fg_size;
        ann.at(y, x) = fg ? 1 : 0;
        for (int c = 0; c < panorama.channels; ++c) {
          const double v = std::clamp(bilinear_sample(panorama, c, q), 0.0, 1.0);
          clean.at(c, y, x) = v;
          frame.at(c, y, x) = fg ? fg_color[static_cast<std::size_t>(c)] : v;
        }
      }
    }
    out.frames.push_back(std::move(frame));
    out.clean.push_back(std::move(clean));
    out.annotations.push_back(std::move(ann));
    out.truth.push_back(affine_params_from(t));
  }
  return out;
}

void write_synth(const std::filesystem::path& dir, const SynthData& data) {
  io::write_frames(dir / "frames", data.frames);
  io::write_frames(dir / "clean", data.clean);
  std::filesystem::create_directories(dir / "annotations");
  for (std::size_t i = 0; i < data.annotations.size(); ++i) {
    io::write_annotation(dir / "annotations" / io::frame_filename("mask_", i, data.annotations.size()),
                         data.annotations[i]);
  }
  io::write_png(dir / "panorama.png", data.panorama);
  io::write_transforms(dir / "truth.csv", data.truth);
}

}  // namespace mcbm
