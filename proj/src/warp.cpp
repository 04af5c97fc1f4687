#include "mcbm/warp.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mcbm/error.hpp"

namespace mcbm {

namespace {

constexpr double kHorizonEps = 1e-12;

}  // namespace

SceneDomain scene_bounds(int height, int width, double pad) {
  if (!(pad >= 1.0)) throw ArgumentError("scene_bounds: pad must be >= 1");
  if (height <= 0 || width <= 0) throw ArgumentError("scene_bounds: empty frame size");
  SceneDomain s;
  s.height = static_cast<int>(std::ceil(pad * height));
  s.width = static_cast<int>(std::ceil(pad * width));
  s.offset_x = (s.width - width) / 2;
  s.offset_y = (s.height - height) / 2;
  return s;
}

BilinearStencil::BilinearStencil(double x, double y, int height, int width) {
  if (!(x > -1.0 && x < width && y > -1.0 && y < height)) return;
  const double xf = std::floor(x);
  const double yf = std::floor(y);
  x0 = static_cast<int>(xf);
  y0 = static_cast<int>(yf);
  fx = x - xf;
  fy = y - yf;
  const bool cx0 = x0 >= 0, cx1 = x0 + 1 < width;
  const bool cy0 = y0 >= 0, cy1 = y0 + 1 < height;
  in[0] = cx0 && cy0;
  in[1] = cx1 && cy0;
  in[2] = cx0 && cy1;
  in[3] = cx1 && cy1;
  any = in[0] || in[1] || in[2] || in[3];
}

double BilinearStencil::corner(const double* plane, int width, int k) const {
  if (!in[k]) return 0.0;
  const int x = x0 + (k & 1), y = y0 + (k >> 1);
  return plane[static_cast<std::size_t>(y) * width + x];
}

double BilinearStencil::value(const double* plane, int width) const {
  if (!any) return 0.0;
  const double v00 = corner(plane, width, 0);
  const double v10 = corner(plane, width, 1);
  const double v01 = corner(plane, width, 2);
  const double v11 = corner(plane, width, 3);
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

void BilinearStencil::gradient(const double* plane, int width, double& v, double& dx, double& dy) const {
  if (!any) {
    v = dx = dy = 0.0;
    return;
  }
  const double v00 = corner(plane, width, 0);
  const double v10 = corner(plane, width, 1);
  const double v01 = corner(plane, width, 2);
  const double v11 = corner(plane, width, 3);
  v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
  dx = (1.0 - fy) * (v10 - v00) + fy * (v11 - v01);
  dy = (1.0 - fx) * (v01 - v00) + fx * (v11 - v10);
}

double BilinearStencil::mask() const {
  if (!any) return 0.0;
  const double v00 = in[0], v10 = in[1], v01 = in[2], v11 = in[3];
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

void BilinearStencil::mask_gradient(double& v, double& dx, double& dy) const {
  if (!any) {
    v = dx = dy = 0.0;
    return;
  }
  const double v00 = in[0], v10 = in[1], v01 = in[2], v11 = in[3];
  v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
  dx = (1.0 - fy) * (v10 - v00) + fy * (v11 - v01);
  dy = (1.0 - fx) * (v01 - v00) + fx * (v11 - v10);
}

double bilinear_sample(const Image& img, int channel, const Vector2& x) {
  if (channel < 0 || channel >= img.channels) throw ArgumentError("bilinear_sample: channel out of range");
  const BilinearStencil st(x.x(), x.y(), img.height, img.width);
  return st.value(img.data.data() + img.plane_size() * channel, img.width);
}

WarpGeometry::WarpGeometry(const Matrix3& t, const SceneDomain& scene)
    : t_(t), tinv_(mcbm::inverse(t)), scene_(scene) {}

WarpGeometry::WarpGeometry(const TransformParams& p, const SceneDomain& scene, bool with_derivatives)
    : WarpGeometry(realize(p), scene) {
  if (!with_derivatives) return;
  dim_ = p.dim();
  dtinv_.reserve(static_cast<std::size_t>(dim_));
  for (int k = 0; k < dim_; ++k) dtinv_.push_back(-tinv_ * d_realize(p, k) * tinv_);
}

bool WarpGeometry::preimage(int sx, int sy, Vector2& p) const {
  const double qx = sx - scene_.offset_x;
  const double qy = sy - scene_.offset_y;
  const double u2 = tinv_(2, 0) * qx + tinv_(2, 1) * qy + tinv_(2, 2);
  if (!(u2 > kHorizonEps)) return false;
  p.x() = (tinv_(0, 0) * qx + tinv_(0, 1) * qy + tinv_(0, 2)) / u2;
  p.y() = (tinv_(1, 0) * qx + tinv_(1, 1) * qy + tinv_(1, 2)) / u2;
  return true;
}

bool WarpGeometry::preimage(int sx, int sy, Vector2& p, PointJacobian& dp) const {
  const Eigen::Vector3d q(sx - scene_.offset_x, sy - scene_.offset_y, 1.0);
  const Eigen::Vector3d u = tinv_ * q;
  if (!(u.z() > kHorizonEps)) return false;
  const double inv = 1.0 / u.z();
  p.x() = u.x() * inv;
  p.y() = u.y() * inv;
  for (int k = 0; k < dim_; ++k) {
    const Eigen::Vector3d du = dtinv_[static_cast<std::size_t>(k)] * q;
    dp(0, k) = (du.x() - p.x() * du.z()) * inv;
    dp(1, k) = (du.y() - p.y() * du.z()) * inv;
  }
  return true;
}

PixelBox WarpGeometry::footprint(int height, int width) const {
  const PixelBox full{0, 0, scene_.width, scene_.height};
  const std::array<Vector2, 4> corners = {Vector2(-1, -1), Vector2(width, -1), Vector2(-1, height),
                                          Vector2(width, height)};
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : corners) {
    const double w = t_(2, 0) * c.x() + t_(2, 1) * c.y() + t_(2, 2);
    if (!(w > kHorizonEps)) return full;
    const double x = (t_(0, 0) * c.x() + t_(0, 1) * c.y() + t_(0, 2)) / w + scene_.offset_x;
    const double y = (t_(1, 0) * c.x() + t_(1, 1) * c.y() + t_(1, 2)) / w + scene_.offset_y;
    if (!std::isfinite(x) || !std::isfinite(y)) return full;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  auto clampi = [](double v, int lo, int hi) {
    return static_cast<int>(std::clamp(v, static_cast<double>(lo), static_cast<double>(hi)));
  };
  PixelBox b;
  b.x0 = clampi(std::floor(xmin), 0, scene_.width);
  b.y0 = clampi(std::floor(ymin), 0, scene_.height);
  b.x1 = clampi(std::ceil(xmax) + 1, 0, scene_.width);
  b.y1 = clampi(std::ceil(ymax) + 1, 0, scene_.height);
  if (b.empty()) b = PixelBox{};
  return b;
}

WarpedFrame warp_frame(const Frame& f, const Matrix3& t, const SceneDomain& scene) {
  const WarpGeometry geo(t, scene);
  WarpedFrame out;
  out.image = Image(f.channels, scene.height, scene.width);
  out.mask = Image(1, scene.height, scene.width);
  out.box = geo.footprint(f.height, f.width);
  const std::size_t plane = f.plane_size();
  const std::size_t scene_plane = scene.size();
  Vector2 p;
  for (int sy = out.box.y0; sy < out.box.y1; ++sy) {
    for (int sx = out.box.x0; sx < out.box.x1; ++sx) {
      if (!geo.preimage(sx, sy, p)) continue;
      const BilinearStencil st(p.x(), p.y(), f.height, f.width);
      if (!st.any) continue;
      const std::size_t idx = static_cast<std::size_t>(sy) * scene.width + sx;
      out.mask.data[idx] = st.mask();
      for (int c = 0; c < f.channels; ++c) {
        out.image.data[c * scene_plane + idx] = st.value(f.data.data() + c * plane, f.width);
      }
    }
  }
  return out;
}

Eigen::MatrixXd warp_jacobian(const Frame& f, const TransformParams& p, const SceneDomain& scene,
                              int sx, int sy) {
  const WarpGeometry geo(p, scene, true);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(p.dim(), f.channels);
  Vector2 pre;
  WarpGeometry::PointJacobian dp;
  if (!geo.preimage(sx, sy, pre, dp)) return jac;
  const BilinearStencil st(pre.x(), pre.y(), f.height, f.width);
  if (!st.any) return jac;
  for (int c = 0; c < f.channels; ++c) {
    double v, gx, gy;
    st.gradient(f.data.data() + c * f.plane_size(), f.width, v, gx, gy);
    for (int k = 0; k < p.dim(); ++k) jac(k, c) = gx * dp(0, k) + gy * dp(1, k);
  }
  return jac;
}

}  // namespace mcbm
