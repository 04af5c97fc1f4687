#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>
#include <string>

namespace mcbm {

using Matrix3 = Eigen::Matrix3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector2 = Eigen::Vector2d;

enum class TransformKind { affine, homography };

std::string to_string(TransformKind kind);
TransformKind parse_transform_kind(const std::string& s);

/// Number of parameters of a transformation family: 6 (affine) or 8 (homography).
int parameter_count(TransformKind kind);

/// Transformation parameters. The realized matrix is base * exp(G(theta)), where G is
/// the generator of the family and base is the identity except for homographies that
/// were warm-started from a fitted affine transform.
struct TransformParams {
  TransformKind kind = TransformKind::affine;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(6);
  Matrix3 base = Matrix3::Identity();

  int dim() const { return static_cast<int>(theta.size()); }

  static TransformParams identity(TransformKind kind);
  // Homography initialized at the realized matrix of an affine transform (theta = 0).
  static TransformParams homography_from(const Matrix3& base);
};

Matrix3 affine_generator(std::span<const double> theta6);
Matrix3 homography_generator(std::span<const double> theta8);
Matrix3 generator(TransformKind kind, std::span<const double> theta);
/// Basis generator E_k: d generator(theta) / d theta_k.
Matrix3 generator_basis(TransformKind kind, int k);

/// Matrix exponential by scaling and squaring with a Taylor core.
/// Squaring count is ceil(log2(max(1, |A|_1))) + 4.
Matrix3 matrix_exp(const Matrix3& a);
Matrix6 matrix_exp(const Matrix6& a);

/// Principal logarithm by inverse scaling and squaring (Denman-Beavers square roots,
/// then the log(I + X) series). Requires no eigenvalues on the closed negative real axis.
Matrix3 matrix_log(const Matrix3& t);

/// Affine parameters whose realization is t (last row of t must be (0, 0, 1)).
TransformParams affine_params_from(const Matrix3& t);

Matrix3 realize(const TransformParams& p);

/// Fréchet derivative of realize along theta_k, read off the upper-right block of
/// exp([[A, E_k], [0, A]]).
Matrix3 d_realize(const TransformParams& p, int k);

/// Projective action on a point. Throws HorizonError when |w| <= 1e-12.
Vector2 apply(const Matrix3& t, const Vector2& x);

/// Throws NumericalError for (numerically) singular matrices.
Matrix3 inverse(const Matrix3& t);

// Classical transforms in pixel coordinates.
Matrix3 translation(double tx, double ty);

/// Mean distance between the images of the four corners of an h x w domain under a and b.
double mean_corner_error(const Matrix3& a, const Matrix3& b, int height, int width);

/// Gauge-invariant relative transform ref^-1 * t: maps frame-n coordinates into
/// reference-frame coordinates, unchanged when every transform is left-composed
/// with a common T0.
Matrix3 relative_transform(const Matrix3& ref, const Matrix3& t);

/// Re-expresses every transform relative to params[ref], which becomes exactly the
/// identity. Transforms bitwise equal to the reference also become the identity.
std::vector<TransformParams> normalize_gauge(const std::vector<TransformParams>& params, std::size_t ref = 0);

}  // namespace mcbm
