#pragma once

#include <Eigen/Core>

namespace tdefumi {

// Column-atom dictionary. The first target_count columns are target atoms,
// the remaining columns are non-target (background) atoms. Every atom lies on
// or inside the unit ball.
class Dictionary {
 public:
  static constexpr double kNormSlack = 1e-9;

  Dictionary() = default;
  // Throws InvalidParameter when an atom has norm above 1 + kNormSlack, when
  // target_count is out of range, or when there are no non-target atoms.
  Dictionary(Eigen::MatrixXd atoms, Eigen::Index target_count);

  const Eigen::MatrixXd& atoms() const { return atoms_; }
  Eigen::Index dim() const { return atoms_.rows(); }
  Eigen::Index size() const { return atoms_.cols(); }
  Eigen::Index target_count() const { return target_count_; }
  Eigen::Index nontarget_count() const { return atoms_.cols() - target_count_; }
  bool is_target(Eigen::Index k) const { return k < target_count_; }

  auto atom(Eigen::Index k) const { return atoms_.col(k); }
  auto target_atoms() const { return atoms_.leftCols(target_count_); }
  auto nontarget_atoms() const { return atoms_.rightCols(nontarget_count()); }

  // Dictionary made of the non-target atoms only (target_count 0).
  Dictionary nontarget_subdictionary() const;

 private:
  Eigen::MatrixXd atoms_;
  Eigen::Index target_count_ = 0;
};

}  // namespace tdefumi
