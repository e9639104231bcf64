#include "mp/registration.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace mp {

SimilarityTransform umeyama_alignment(std::span<const Eigen::Vector3d> source,
                                      std::span<const Eigen::Vector3d> target,
                                      bool with_scale) {
  const std::size_t n = source.size();
  if (n != target.size()) fail(ErrorCode::InvalidInput, "point lists differ in length");
  if (n < 3) fail(ErrorCode::DegenerateInput, "need at least 3 point pairs");

  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_t = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= double(n);
  mu_t /= double(n);

  double var_s = 0.0;
  Eigen::Matrix3d cov_st = Eigen::Matrix3d::Zero();  // source scatter, for rank check
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();   // target x source cross-covariance
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d ds = source[i] - mu_s;
    const Eigen::Vector3d dt = target[i] - mu_t;
    var_s += ds.squaredNorm();
    cov_st += ds * ds.transpose();
    sigma += dt * ds.transpose();
  }
  var_s /= double(n);
  sigma /= double(n);
  cov_st /= double(n);

  // Rank of the source covariance must be >= 2: collinear or coincident
  // source points leave the rotation underdetermined.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov_st);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2)) {
    fail(ErrorCode::DegenerateInput, "source covariance rank < 2");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  const Eigen::Vector3d d = svd.singularValues();

  Eigen::Vector3d s_diag = Eigen::Vector3d::Ones();
  if (u.determinant() * v.determinant() < 0.0) s_diag(2) = -1.0;

  SimilarityTransform out;
  out.rotation = u * s_diag.asDiagonal() * v.transpose();
  out.scale = with_scale ? (d.dot(s_diag) / var_s) : 1.0;
  if (!(out.scale > 0.0)) fail(ErrorCode::DegenerateInput, "non-positive scale estimate");
  out.translation = mu_t - out.scale * (out.rotation * mu_s);
  return out;
}

double rotation_geodesic_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  if (!is_rotation(a, 1e-6) || !is_rotation(b, 1e-6)) {
    fail(ErrorCode::NotARotation, "input is not a proper rotation");
  }
  const double c = ((a * b.transpose()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

}  // namespace mp
