#include "slambench/geometry/umeyama.hpp"

#include <string>

#include <Eigen/SVD>

#include "slambench/error.hpp"

namespace slambench::geometry {

SimTransform umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale) {
  if (src.size() != dst.size())
    throw Error(Errc::SizeMismatch, "point sets differ in length (" + std::to_string(src.size()) +
                                        " vs " + std::to_string(dst.size()) + ")");
  if (src.size() < 3)
    throw Error(Errc::SizeMismatch, "need at least 3 correspondences, got " + std::to_string(src.size()));

  const double n = static_cast<double>(src.size());
  Vec3 mean_src = Vec3::Zero();
  Vec3 mean_dst = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mean_src += src[i];
    mean_dst += dst[i];
  }
  mean_src /= n;
  mean_dst /= n;

  Mat3 cov = Mat3::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 a = src[i] - mean_src;
    const Vec3 b = dst[i] - mean_dst;
    cov += b * a.transpose();
    var_src += a.squaredNorm();
  }
  cov /= n;
  var_src /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0) || var_src <= 0.0)
    throw Error(Errc::DegenerateGeometry, "cross-covariance rank < 2");

  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 s = Vec3::Ones();
  if (u.determinant() * v.determinant() < 0.0) s(2) = -1.0;

  const Mat3 r = u * s.asDiagonal() * v.transpose();

  SimTransform out;
  out.scale = with_scale ? sv.dot(s) / var_src : 1.0;
  out.rotation = canonical(Quat(r));
  out.translation = mean_dst - out.scale * (r * mean_src);
  return out;
}

}  // namespace slambench::geometry
