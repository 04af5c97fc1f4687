#include "mcbm/ja.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mcbm/error.hpp"
#include "mcbm/parallel.hpp"
#include "mcbm/robust.hpp"

namespace mcbm {

TargetMean target_mean(const Accumulators& acc, std::span<const WarpedFrame> batch) {
  const int c_count = acc.channels;
  const std::size_t plane = static_cast<std::size_t>(acc.height) * acc.width;
  TargetMean out;
  out.mu = Image(c_count, acc.height, acc.width);
  out.weight = acc.m;
  out.valid = BinaryMap(acc.height, acc.width);
  std::vector<double> num = acc.g;

  for (const auto& w : batch) {
    if (w.mask.height != acc.height || w.mask.width != acc.width || w.image.channels != c_count) {
      throw ArgumentError("target_mean: warped frame does not match the accumulators");
    }
    for (int y = w.box.y0; y < w.box.y1; ++y) {
      for (int x = w.box.x0; x < w.box.x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * acc.width + x;
        const double m = w.mask.data[i];
        if (m == 0.0) continue;
        out.weight[i] += m;
        for (int c = 0; c < c_count; ++c) num[c * plane + i] += w.image.data[c * plane + i];
      }
    }
  }
  for (std::size_t i = 0; i < plane; ++i) {
    if (!(out.weight[i] > 0.0)) continue;
    out.valid.data[i] = 1;
    for (int c = 0; c < c_count; ++c) out.mu.data[c * plane + i] = num[c * plane + i] / out.weight[i];
  }
  return out;
}

FrameTerm frame_term(const Frame& f, const TransformParams& p, const Image& mu, const SceneDomain& scene,
                     const LossOptions& opt, bool with_gradient) {
  if (mu.channels != f.channels || mu.height != scene.height || mu.width != scene.width) {
    throw ArgumentError("frame_term: mu does not match the scene domain");
  }
  if (!(opt.beta > 0.0)) throw ArgumentError("frame_term: beta must be > 0");
  const int d = p.dim();
  const WarpGeometry geo(p, scene, with_gradient);
  const PixelBox box = geo.footprint(f.height, f.width);
  const std::size_t plane = f.plane_size();
  const std::size_t scene_plane = scene.size();

  double num = 0.0, den = 0.0;
  std::array<double, WarpGeometry::kMaxParams> dnum{}, dden{};
  Vector2 pre;
  WarpGeometry::PointJacobian dp;

  for (int sy = box.y0; sy < box.y1; ++sy) {
    for (int sx = box.x0; sx < box.x1; ++sx) {
      const std::size_t idx = static_cast<std::size_t>(sy) * scene.width + sx;
      if (opt.support != nullptr && opt.support->data[idx] == 0) continue;
      const bool ok = with_gradient ? geo.preimage(sx, sy, pre, dp) : geo.preimage(sx, sy, pre);
      if (!ok) continue;
      const BilinearStencil st(pre.x(), pre.y(), f.height, f.width);
      if (!st.any) continue;

      if (!with_gradient) {
        const double m = st.mask();
        if (m == 0.0) continue;
        den += m;
        for (int c = 0; c < f.channels; ++c) {
          const double g = st.value(f.data.data() + c * plane, f.width) / m;
          num += m * detail::rho_ja_unchecked(g - mu.data[c * scene_plane + idx], opt.beta);
        }
        continue;
      }

      double m, mdx, mdy;
      st.mask_gradient(m, mdx, mdy);
      if (m == 0.0) continue;
      std::array<double, WarpGeometry::kMaxParams> dm{};
      for (int k = 0; k < d; ++k) {
        dm[k] = mdx * dp(0, k) + mdy * dp(1, k);
        dden[k] += dm[k];
      }
      den += m;
      for (int c = 0; c < f.channels; ++c) {
        double s, sx, sy;
        st.gradient(f.data.data() + c * plane, f.width, s, sx, sy);
        // in-domain value g = s / m
        const double g = s / m;
        const double gx = (sx - g * mdx) / m;
        const double gy = (sy - g * mdy) / m;
        const double r = g - mu.data[c * scene_plane + idx];
        const double rho = detail::rho_ja_unchecked(r, opt.beta);
        const double drho = detail::d_rho_ja_unchecked(r, opt.beta);
        num += m * rho;
        const double w = m * drho;
        for (int k = 0; k < d; ++k) dnum[k] += dm[k] * rho + w * (gx * dp(0, k) + gy * dp(1, k));
      }
    }
  }

  FrameTerm out;
  out.coverage = den;
  out.gradient = Eigen::VectorXd::Zero(d);
  if (den < opt.coverage_floor * static_cast<double>(f.height) * f.width || !(den > 0.0)) {
    out.dropped = true;
    return out;
  }
  const double inv_c = 1.0 / f.channels;
  out.loss = inv_c * num / den;
  if (with_gradient) {
    for (int k = 0; k < d; ++k) out.gradient[k] = inv_c * (dnum[k] * den - num * dden[k]) / (den * den);
  }
  return out;
}

BatchLoss batch_loss(std::span<const FrameRef> batch, const Image& mu, const SceneDomain& scene,
                     const LossOptions& opt) {
  BatchLoss out;
  double sum = 0.0;
  int used = 0;
  for (const auto& ref : batch) {
    const FrameTerm t = frame_term(*ref.frame, *ref.params, mu, scene, opt, false);
    if (t.dropped) {
      ++out.dropped;
      continue;
    }
    sum += t.loss;
    ++used;
  }
  if (used == 0) throw DegenerateBatchError("batch_loss: every frame in the batch was dropped");
  out.loss = sum / used;
  return out;
}

Eigen::VectorXd loss_gradient(const Frame& f, const TransformParams& p, const Image& mu,
                              const SceneDomain& scene, const LossOptions& opt) {
  return frame_term(f, p, mu, scene, opt, true).gradient;
}

AdamState AdamState::zeros(int dim) {
  return AdamState{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), 0};
}

void adam_step(Eigen::VectorXd& theta, AdamState& state, const Eigen::VectorXd& grad,
               const Eigen::VectorXd& lr, const AdamBetas& betas) {
  constexpr double kEps = 1e-8;
  const double b1 = betas.beta1, b2 = betas.beta2;
  if (state.m.size() != theta.size()) state = AdamState::zeros(static_cast<int>(theta.size()));
  ++state.steps;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, state.steps);
  const double c2 = 1.0 - std::pow(b2, state.steps);
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    theta[k] -= lr[k] * (state.m[k] / c1) / (std::sqrt(state.v[k] / c2) + kEps);
  }
}

Eigen::VectorXd parameter_scales(TransformKind kind, int height, int width) {
  const double extent = std::max(height, width);
  Eigen::VectorXd s(parameter_count(kind));
  // linear block, then translations
  s << 1.0, 1.0, extent, 1.0, 1.0, extent, Eigen::VectorXd::Constant(s.size() - 6, 1.0 / extent);
  return s;
}

void epoch_decay(AlignmentState& state) {
  for (double& v : state.acc.g) v *= state.lambda;
  for (double& v : state.acc.m) v *= state.lambda;
  ++state.epoch;
}

void accumulate_batch(AlignmentState& state, std::span<const WarpedFrame> batch) {
  Accumulators& acc = state.acc;
  const std::size_t plane = static_cast<std::size_t>(acc.height) * acc.width;
  for (const auto& w : batch) {
    if (w.mask.height != acc.height || w.mask.width != acc.width || w.image.channels != acc.channels) {
      throw ArgumentError("accumulate_batch: warped frame does not match the accumulators");
    }
    for (int y = w.box.y0; y < w.box.y1; ++y) {
      for (int x = w.box.x0; x < w.box.x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * acc.width + x;
        const double m = w.mask.data[i];
        if (m == 0.0) continue;
        acc.m[i] += m;
        for (int c = 0; c < acc.channels; ++c) acc.g[c * plane + i] += w.image.data[c * plane + i];
      }
    }
  }
}

double step_size_at(double base, int epoch_in_stage, int stage_epochs) {
  if (stage_epochs <= 0) return base;
  const int third = std::min(2, 3 * epoch_in_stage / stage_epochs);
  return base * std::ldexp(1.0, -third);
}

AlignmentState AlignmentState::initial(const std::vector<Frame>& frames, const JaConfig& cfg) {
  check_sequence(frames);
  AlignmentState s;
  s.frame_height = frames.front().height;
  s.frame_width = frames.front().width;
  s.scene = scene_bounds(s.frame_height, s.frame_width, cfg.pad);
  s.params.assign(frames.size(), TransformParams::identity(TransformKind::affine));
  s.acc = Accumulators(frames.front().channels, s.scene.height, s.scene.width);
  s.lambda = cfg.lambda;
  s.opt.assign(frames.size(), AdamState::zeros(6));
  s.seed = cfg.seed;
  return s;
}

namespace {

void check_config(const JaConfig& cfg) {
  if (cfg.batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (cfg.epochs_affine < 0 || cfg.epochs_homography < 0) throw ArgumentError("epochs must be >= 0");
  if (!(cfg.lambda >= 0.0 && cfg.lambda < 1.0)) throw ArgumentError("lambda must be in [0,1)");
  if (!(cfg.beta > 0.0)) throw ArgumentError("beta must be > 0");
  if (!(cfg.step_size > 0.0)) throw ArgumentError("step_size must be > 0");
  if (!(cfg.homography_step_size > 0.0)) throw ArgumentError("homography_step_size must be > 0");
  if (!(cfg.adam.beta1 >= 0.0 && cfg.adam.beta1 < 1.0 && cfg.adam.beta2 >= 0.0 && cfg.adam.beta2 < 1.0)) {
    throw ArgumentError("adam betas must be in [0,1)");
  }
  if (!(cfg.coverage_floor >= 0.0)) throw ArgumentError("coverage_floor must be >= 0");
}

void run_stage(const std::vector<Frame>& frames, const JaConfig& cfg, AlignmentState& state,
               TransformKind stage, int epochs, double base_step, std::mt19937_64& rng) {
  const int n = static_cast<int>(frames.size());
  const int threads = resolve_threads(cfg.threads);
  const double frame_area = static_cast<double>(state.frame_height) * state.frame_width;
  const Eigen::VectorXd scales = parameter_scales(stage, state.frame_height, state.frame_width);
  const LossOptions opts{cfg.beta, cfg.coverage_floor, nullptr};

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int e = 0; e < epochs; ++e) {
    const Eigen::VectorXd lr = scales * step_size_at(base_step, e, epochs);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0, coverage_sum = 0.0;
    int good_batches = 0, batches = 0, dropped = 0;

    for (int start = 0; start < n; start += cfg.batch_size) {
      const int size = std::min(cfg.batch_size, n - start);
      ++batches;
      std::vector<WarpedFrame> warps(static_cast<std::size_t>(size));
      parallel_for(size, threads, [&](int i) {
        const int f = order[static_cast<std::size_t>(start + i)];
        warps[static_cast<std::size_t>(i)] = warp_frame(frames[f], realize(state.params[f]), state.scene);
      });
      const TargetMean target = target_mean(state.acc, warps);

      std::vector<FrameTerm> terms(static_cast<std::size_t>(size));
      parallel_for(size, threads, [&](int i) {
        const int f = order[static_cast<std::size_t>(start + i)];
        terms[static_cast<std::size_t>(i)] =
            frame_term(frames[f], state.params[f], target.mu, state.scene, opts, true);
      });

      double batch_sum = 0.0;
      int used = 0;
      for (int i = 0; i < size; ++i) {
        const auto& t = terms[static_cast<std::size_t>(i)];
        coverage_sum += t.coverage / frame_area;
        if (t.dropped) {
          ++dropped;
          continue;
        }
        batch_sum += t.loss;
        ++used;
        const int f = order[static_cast<std::size_t>(start + i)];
        adam_step(state.params[f].theta, state.opt[f], t.gradient, lr, cfg.adam);
      }
      if (used > 0) {
        loss_sum += batch_sum / used;
        ++good_batches;
      }

      if (cfg.accumulate) {
        if (cfg.accumulate_post_step) {
          parallel_for(size, threads, [&](int i) {
            const int f = order[static_cast<std::size_t>(start + i)];
            warps[static_cast<std::size_t>(i)] = warp_frame(frames[f], realize(state.params[f]), state.scene);
          });
        }
        accumulate_batch(state, warps);
      }
    }

    if (good_batches == 0) {
      std::ostringstream msg;
      msg << "joint alignment diverged: every batch of epoch " << state.epoch << " (" << to_string(stage)
          << " stage) was degenerate; mean coverage " << coverage_sum / n << ", dropped " << dropped
          << " of " << n << " frames";
      throw DivergenceError(msg.str());
    }

    EpochRecord rec;
    rec.epoch = state.epoch;
    rec.stage = stage;
    rec.loss = loss_sum / good_batches;
    rec.mean_coverage = coverage_sum / n;
    rec.dropped_frames = dropped;
    if (cfg.accumulate) {
      epoch_decay(state);
    } else {
      ++state.epoch;
    }
    state.history.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec, state);
  }
}

}  // namespace

AlignmentState fit(const std::vector<Frame>& frames, const JaConfig& cfg) {
  if (frames.size() < 2) throw ArgumentError("fit: at least 2 frames are required");
  check_config(cfg);
  AlignmentState state = AlignmentState::initial(frames, cfg);
  std::mt19937_64 rng(cfg.seed);

  run_stage(frames, cfg, state, TransformKind::affine, cfg.epochs_affine, cfg.step_size, rng);
  if (cfg.epochs_homography > 0) {
    for (std::size_t i = 0; i < state.params.size(); ++i) {
      state.params[i] = TransformParams::homography_from(realize(state.params[i]));
      state.opt[i] = AdamState::zeros(8);
    }
    run_stage(frames, cfg, state, TransformKind::homography, cfg.epochs_homography, cfg.homography_step_size, rng);
  }
  return state;
}

}  // namespace mcbm
