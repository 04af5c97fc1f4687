#pragma once

#include <Eigen/Core>
#include <vector>

#include "mcbm/image.hpp"
#include "mcbm/transform.hpp"

namespace mcbm {

// Coordinates: pixel centers sit at integer positions, origin at the frame's top-left
// pixel. A scene pixel (sx, sy) corresponds to the frame-coordinate point
// (sx - offset_x, sy - offset_y).
struct SceneDomain {
  int height = 0;
  int width = 0;
  int offset_x = 0;
  int offset_y = 0;
  std::size_t size() const { return static_cast<std::size_t>(height) * width; }
};

/// Scene domain of ceil(pad*h) x ceil(pad*w) pixels with the frame domain centered.
SceneDomain scene_bounds(int height, int width, double pad);

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

/// image is the zero-padded bilinear sample, i.e. mask times the value interpolated
/// from in-domain neighbours only. Dividing by the mask recovers that value.
struct WarpedFrame {
  Image image;     // C x H x W, zero wherever mask is zero
  Image mask;      // 1 x H x W, in [0,1]
  PixelBox box;    // mask is zero outside this box
};

/// Bilinear interpolation weights for one sample point with zero padding outside an
/// h x w domain.
struct BilinearStencil {
  int x0 = 0, y0 = 0;
  double fx = 0.0, fy = 0.0;
  bool in[4] = {false, false, false, false};  // (x0,y0), (x0+1,y0), (x0,y0+1), (x0+1,y0+1)
  bool any = false;

  BilinearStencil(double x, double y, int height, int width);

  double value(const double* plane, int width) const;
  // Value and spatial gradient (d/dx, d/dy) of the interpolant.
  void gradient(const double* plane, int width, double& v, double& dx, double& dy) const;
  // Interpolant of the all-ones image restricted to the domain.
  double mask() const;
  void mask_gradient(double& v, double& dx, double& dy) const;

 private:
  double corner(const double* plane, int width, int k) const;
};

double bilinear_sample(const Image& img, int channel, const Vector2& x);

/// Pre-images of scene pixels under a transform and, optionally, their derivatives
/// with respect to the transform parameters.
class WarpGeometry {
 public:
  static constexpr int kMaxParams = 8;
  using PointJacobian = Eigen::Matrix<double, 2, kMaxParams>;

  WarpGeometry(const Matrix3& t, const SceneDomain& scene);
  WarpGeometry(const TransformParams& p, const SceneDomain& scene, bool with_derivatives);

  // False when the pixel's pre-image lies on or behind the horizon.
  bool preimage(int sx, int sy, Vector2& p) const;
  bool preimage(int sx, int sy, Vector2& p, PointJacobian& dp) const;

  /// Scene-pixel bounding box of the mask support of an h x w frame.
  PixelBox footprint(int height, int width) const;

  int dim() const { return dim_; }
  const Matrix3& forward() const { return t_; }
  const Matrix3& inverse() const { return tinv_; }

 private:
  Matrix3 t_;
  Matrix3 tinv_;
  std::vector<Matrix3> dtinv_;
  SceneDomain scene_;
  int dim_ = 0;
};

WarpedFrame warp_frame(const Frame& f, const Matrix3& t, const SceneDomain& scene);

/// d g(x, c) / d theta_k at scene pixel (sx, sy): a d x C matrix.
Eigen::MatrixXd warp_jacobian(const Frame& f, const TransformParams& p, const SceneDomain& scene,
                              int sx, int sy);

}  // namespace mcbm
