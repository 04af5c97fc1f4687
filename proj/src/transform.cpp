#include "mcbm/transform.hpp"

#include <Eigen/LU>
#include <array>
#include <cmath>

#include "mcbm/error.hpp"

namespace mcbm {

namespace {

// Taylor terms after scaling; |A / 2^s|_1 <= 1/16 so 18 terms are far past
// double precision.
constexpr int kTaylorTerms = 18;

template <int N>
Eigen::Matrix<double, N, N> exp_scaling_squaring(const Eigen::Matrix<double, N, N>& a) {
  using Mat = Eigen::Matrix<double, N, N>;
  if (!a.allFinite()) throw ArgumentError("matrix_exp: non-finite input");

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  const int squarings = static_cast<int>(std::ceil(std::log2(std::max(1.0, norm1)))) + 4;
  const Mat scaled = a / std::ldexp(1.0, squarings);

  // Horner: I + X(I + X/2(I + X/3(...)))
  Mat result = Mat::Identity();
  for (int k = kTaylorTerms; k >= 1; --k) {
    result = Mat::Identity() + (scaled * result) / static_cast<double>(k);
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

void expect_length(std::span<const double> theta, std::size_t n, const char* who) {
  if (theta.size() != n) {
    throw ArgumentError(std::string(who) + ": expected " + std::to_string(n) +
                        " parameters, got " + std::to_string(theta.size()));
  }
}

}  // namespace

std::string to_string(TransformKind kind) {
  return kind == TransformKind::affine ? "affine" : "homography";
}

TransformKind parse_transform_kind(const std::string& s) {
  if (s == "affine") return TransformKind::affine;
  if (s == "homography") return TransformKind::homography;
  throw ArgumentError("unknown transform kind '" + s + "'");
}

int parameter_count(TransformKind kind) { return kind == TransformKind::affine ? 6 : 8; }

TransformParams TransformParams::identity(TransformKind kind) {
  TransformParams p;
  p.kind = kind;
  p.theta = Eigen::VectorXd::Zero(parameter_count(kind));
  return p;
}

TransformParams TransformParams::homography_from(const Matrix3& base) {
  TransformParams p = identity(TransformKind::homography);
  p.base = base;
  return p;
}

Matrix3 affine_generator(std::span<const double> theta6) {
  expect_length(theta6, 6, "affine_generator");
  Matrix3 a;
  a << theta6[0], theta6[1], theta6[2],
       theta6[3], theta6[4], theta6[5],
       0.0, 0.0, 0.0;
  return a;
}

Matrix3 homography_generator(std::span<const double> theta8) {
  expect_length(theta8, 8, "homography_generator");
  Matrix3 a;
  a << theta8[0], theta8[1], theta8[2],
       theta8[3], theta8[4], theta8[5],
       theta8[6], theta8[7], -(theta8[0] + theta8[4]);
  return a;
}

Matrix3 generator(TransformKind kind, std::span<const double> theta) {
  return kind == TransformKind::affine ? affine_generator(theta) : homography_generator(theta);
}

Matrix3 generator_basis(TransformKind kind, int k) {
  const int d = parameter_count(kind);
  if (k < 0 || k >= d) throw ArgumentError("generator_basis: parameter index out of range");
  std::array<double, 8> e{};
  e[static_cast<std::size_t>(k)] = 1.0;
  return generator(kind, std::span<const double>(e.data(), static_cast<std::size_t>(d)));
}

Matrix3 matrix_exp(const Matrix3& a) { return exp_scaling_squaring<3>(a); }
Matrix6 matrix_exp(const Matrix6& a) { return exp_scaling_squaring<6>(a); }

Matrix3 matrix_log(const Matrix3& t) {
  if (!t.allFinite()) throw ArgumentError("matrix_log: non-finite input");
  Matrix3 a = t;
  int roots = 0;
  while ((a - Matrix3::Identity()).cwiseAbs().colwise().sum().maxCoeff() > 0.25) {
    if (++roots > 60) throw NumericalError("matrix_log: square-root iteration did not approach the identity");
    Matrix3 y = a, z = Matrix3::Identity();
    for (int it = 0; it < 100; ++it) {
      const Matrix3 yi = inverse(y), zi = inverse(z);
      const Matrix3 yn = 0.5 * (y + zi);
      z = 0.5 * (z + yi);
      const double change = (yn - y).cwiseAbs().maxCoeff();
      y = yn;
      if (change <= 1e-15 * std::max(1.0, y.cwiseAbs().maxCoeff())) break;
    }
    a = y;
  }
  // log(I + X) = X - X^2/2 + X^3/3 - ...
  const Matrix3 x = a - Matrix3::Identity();
  Matrix3 term = x, sum = Matrix3::Zero();
  for (int k = 1; k <= 60; ++k) {
    sum += ((k % 2) ? 1.0 : -1.0) * term / static_cast<double>(k);
    term = term * x;
  }
  return std::ldexp(1.0, roots) * sum;
}

TransformParams affine_params_from(const Matrix3& t) {
  if (t(2, 0) != 0.0 || t(2, 1) != 0.0 || t(2, 2) != 1.0) {
    throw ArgumentError("affine_params_from: last row must be (0, 0, 1)");
  }
  const Matrix3 a = matrix_log(t);
  TransformParams p = TransformParams::identity(TransformKind::affine);
  p.theta << a(0, 0), a(0, 1), a(0, 2), a(1, 0), a(1, 1), a(1, 2);
  return p;
}

Matrix3 realize(const TransformParams& p) {
  const Matrix3 g = generator(p.kind, std::span<const double>(p.theta.data(), p.theta.size()));
  if (p.kind == TransformKind::affine) return matrix_exp(g);
  return p.base * matrix_exp(g);
}

Matrix3 d_realize(const TransformParams& p, int k) {
  if (k < 0 || k >= p.dim()) throw ArgumentError("d_realize: parameter index out of range");
  const Matrix3 g = generator(p.kind, std::span<const double>(p.theta.data(), p.theta.size()));
  Matrix6 block = Matrix6::Zero();
  block.topLeftCorner<3, 3>() = g;
  block.bottomRightCorner<3, 3>() = g;
  block.topRightCorner<3, 3>() = generator_basis(p.kind, k);
  const Matrix3 frechet = matrix_exp(block).topRightCorner<3, 3>();
  if (p.kind == TransformKind::affine) return frechet;
  return p.base * frechet;
}

Vector2 apply(const Matrix3& t, const Vector2& x) {
  const double w = t(2, 0) * x.x() + t(2, 1) * x.y() + t(2, 2);
  if (std::abs(w) <= 1e-12) throw HorizonError("apply: point maps to the line at infinity");
  return {(t(0, 0) * x.x() + t(0, 1) * x.y() + t(0, 2)) / w,
          (t(1, 0) * x.x() + t(1, 1) * x.y() + t(1, 2)) / w};
}

Matrix3 inverse(const Matrix3& t) {
  if (!t.allFinite()) throw NumericalError("inverse: non-finite matrix");
  const double det = t.determinant();
  const double scale = t.cwiseAbs().maxCoeff();
  if (scale == 0.0 || std::abs(det) <= 1e-14 * scale * scale * scale) {
    throw NumericalError("inverse: singular matrix");
  }
  return t.inverse();
}

Matrix3 translation(double tx, double ty) {
  Matrix3 t = Matrix3::Identity();
  t(0, 2) = tx;
  t(1, 2) = ty;
  return t;
}

double mean_corner_error(const Matrix3& a, const Matrix3& b, int height, int width) {
  const std::array<Vector2, 4> corners = {Vector2(0, 0), Vector2(width - 1, 0),
                                          Vector2(0, height - 1), Vector2(width - 1, height - 1)};
  double sum = 0.0;
  for (const auto& c : corners) sum += (apply(a, c) - apply(b, c)).norm();
  return sum / 4.0;
}

Matrix3 relative_transform(const Matrix3& ref, const Matrix3& t) { return inverse(ref) * t; }

std::vector<TransformParams> normalize_gauge(const std::vector<TransformParams>& params, std::size_t ref) {
  if (ref >= params.size()) throw ArgumentError("normalize_gauge: reference index out of range");
  const Matrix3 t_ref = realize(params[ref]);
  const Matrix3 inv = inverse(t_ref);
  std::vector<TransformParams> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    const Matrix3 t = realize(p);
    if (p.kind == TransformKind::affine) {
      if (t == t_ref) {
        out.push_back(TransformParams::identity(TransformKind::affine));
        continue;
      }
      Matrix3 rel = inv * t;
      rel.row(2) << 0.0, 0.0, 1.0;
      out.push_back(affine_params_from(rel));
    } else {
      const Matrix3 rel = t == t_ref ? Matrix3(Matrix3::Identity()) : Matrix3(inv * t);
      out.push_back(TransformParams::homography_from(rel / rel(2, 2)));
    }
  }
  return out;
}

}  // namespace mcbm
