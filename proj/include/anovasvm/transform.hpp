#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstddef>
#include <vector>

#include "anovasvm/basis.hpp"
#include "anovasvm/indexsets.hpp"

namespace anovasvm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// The feature matrix Phi(X, I) bound to a set of points, stored per ANOVA
/// term: dense blocks for the cosine system, compressed-row sparse blocks for
/// Haar. Immutable once built.
class FeatureTransform {
public:
  FeatureTransform(const Matrix& points, GroupedIndexSet set,
                   CosineNormalization norm = CosineNormalization::orthonormal);

  const GroupedIndexSet& set() const noexcept { return set_; }
  CosineNormalization normalization() const noexcept { return norm_; }
  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return static_cast<Eigen::Index>(set_.cardinality()); }

  Vector apply(const Vector& coeffs) const;
  Vector apply_transpose(const Vector& v) const;

  // allocation-free variants; `out` must already have the right length
  void apply_into(const Vector& coeffs, Vector& out) const;
  void apply_transpose_into(const Vector& v, Vector& out) const;

  Matrix dense_block(const AnovaSubset& subset) const;
  Matrix dense_block(std::size_t term) const;
  Matrix dense() const;

  // stored entries of a term block (rows x cols for dense blocks)
  std::size_t stored_entries(std::size_t term) const;
  const SparseRowMatrix& sparse_block(std::size_t term) const { return sparse_[term]; }

private:
  void build_cosine(const Matrix& points);
  void build_haar(const Matrix& points);

  GroupedIndexSet set_;
  CosineNormalization norm_;
  Eigen::Index rows_;
  std::vector<Matrix> dense_;
  std::vector<SparseRowMatrix> sparse_;
};

}  // namespace anovasvm
