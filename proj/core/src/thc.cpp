#include "thcsim/thc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace thcsim {

Eigen::MatrixXd damped_pseudo_inverse(const Eigen::MatrixXd& jacobian, double damping) {
  const Eigen::Index rows = jacobian.rows();
  if (rows == 0) return Eigen::MatrixXd::Zero(jacobian.cols(), 0);
  if (damping == 0.0) {
    return jacobian.completeOrthogonalDecomposition().pseudoInverse();
  }
  const Eigen::MatrixXd gram =
      jacobian * jacobian.transpose() +
      damping * damping * Eigen::MatrixXd::Identity(rows, rows);
  return jacobian.transpose() * gram.ldlt().solve(Eigen::MatrixXd::Identity(rows, rows));
}

double effective_damping(const Eigen::MatrixXd& jacobian, double damping) {
  if (jacobian.rows() == 0 || damping == 0.0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian);
  const double sigma_min = svd.singularValues().minCoeff();
  if (sigma_min >= kSingularRegion) return 0.0;
  const double ratio = sigma_min / kSingularRegion;
  return damping * std::sqrt(1.0 - ratio * ratio);
}

Eigen::Matrix3d null_space_projector(const Eigen::MatrixX3d& jacobian, double damping) {
  if (jacobian.rows() == 0) return Eigen::Matrix3d::Identity();
  const double lambda = effective_damping(jacobian, damping);
  // J^+ J = V diag(s^2 / (s^2 + lambda^2)) V^T, valid for any row count.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  const double cutoff = s.size() > 0 ? 1e-12 * std::max(1.0, s.maxCoeff()) : 0.0;
  Eigen::Matrix3d range = Eigen::Matrix3d::Zero();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double w;
    if (lambda > 0.0) {
      w = s[i] * s[i] / (s[i] * s[i] + lambda * lambda);
    } else {
      w = s[i] > cutoff ? 1.0 : 0.0;
    }
    range += w * v.col(i) * v.col(i).transpose();
  }
  return Eigen::Matrix3d::Identity() - range;
}

void PriorityStack::push(TaskOutput task) {
  if (!tasks_.empty() && task.priority() <= tasks_.back().priority()) {
    throw std::invalid_argument("tasks must be pushed in strictly decreasing priority");
  }
  tasks_.push_back(std::move(task));
}

Vec3 compose(const PriorityStack& stack, double damping, double accel_limit) {
  Vec3 u = Vec3::Zero();
  Eigen::Matrix3d projector = Eigen::Matrix3d::Identity();
  Eigen::MatrixX3d accumulated(0, 3);
  for (const TaskOutput& task : stack.tasks()) {
    if (!task.active) continue;
    u += projector * task.accel_cmd;
    const Eigen::Index prev = accumulated.rows();
    accumulated.conservativeResize(prev + task.jacobian.rows(), Eigen::NoChange);
    accumulated.bottomRows(task.jacobian.rows()) = task.jacobian;
    projector = null_space_projector(accumulated, damping);
  }
  return clamp_norm(u, accel_limit);
}

}  // namespace thcsim
