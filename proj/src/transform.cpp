#include "anovasvm/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "anovasvm/errors.hpp"

namespace anovasvm {

FeatureTransform::FeatureTransform(const Matrix& points, GroupedIndexSet set,
                                   CosineNormalization norm)
    : set_(std::move(set)), norm_(norm), rows_(points.rows()) {
  if (points.cols() != set_.dimension())
    fail(ErrorCode::invalid_argument, "points have " + std::to_string(points.cols()) +
                                          " columns, index set expects " +
                                          std::to_string(set_.dimension()));
  if (!points.allFinite()) fail(ErrorCode::invalid_argument, "points contain non-finite values");
  if (set_.kind() == BasisKind::cosine)
    build_cosine(points);
  else
    build_haar(points);
}

void FeatureTransform::build_cosine(const Matrix& points) {
  for (Eigen::Index r = 0; r < points.rows(); ++r)
    for (Eigen::Index c = 0; c < points.cols(); ++c)
      if (!in_cosine_domain(points(r, c)))
        fail(ErrorCode::domain_error, "row " + std::to_string(r) + " lies outside [0, 1/2]^d (dim " +
                                          std::to_string(c + 1) + " = " +
                                          std::to_string(points(r, c)) + ")");

  // tables[dim].col(k) = c * cos(2 pi k x_dim) over all rows
  const int d = set_.dimension();
  std::vector<int> max_freq(d + 1, 0);
  for (const auto& term : set_.terms())
    for (std::size_t i = 0; i < term.subset().size(); ++i)
      max_freq[term.subset().dims()[i]] =
          std::max(max_freq[term.subset().dims()[i]], term.bandwidth()[i] - 1);
  const double c = cosine_constant(norm_);
  std::vector<Matrix> tables(d + 1);
  for (int dim = 1; dim <= d; ++dim) {
    if (max_freq[dim] == 0) continue;
    tables[dim].resize(rows_, max_freq[dim] + 1);
    for (int k = 0; k <= max_freq[dim]; ++k)
      for (Eigen::Index r = 0; r < rows_; ++r)
        tables[dim](r, k) = k == 0 ? 1.0 : c * std::cos(2.0 * std::numbers::pi * k * points(r, dim - 1));
  }

  dense_.reserve(set_.terms().size());
  for (const auto& term : set_.terms()) {
    Matrix block(rows_, static_cast<Eigen::Index>(term.size()));
    const auto& dims = term.subset().dims();
    for (std::size_t e = 0; e < term.size(); ++e) {
      auto col = block.col(static_cast<Eigen::Index>(e));
      col.setOnes();
      const auto k = term.frequency(e);
      for (std::size_t i = 0; i < dims.size(); ++i) col.array() *= tables[dims[i]].col(k[i]).array();
    }
    dense_.push_back(std::move(block));
  }
}

void FeatureTransform::build_haar(const Matrix& points) {
  const int d = set_.dimension();
  std::vector<int> max_level(d + 1, -1);
  for (const auto& term : set_.terms())
    for (std::size_t l = 0; l < term.level_count(); ++l) {
      const auto j = term.level(l);
      for (std::size_t i = 0; i < j.size(); ++i)
        max_level[term.subset().dims()[i]] = std::max(max_level[term.subset().dims()[i]], j[i]);
    }

  // cells[dim](r, j) = floor(2^{j+1} y): its half is the shift, its parity the sign
  std::vector<Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>> cells(d + 1);
  for (int dim = 1; dim <= d; ++dim) {
    if (max_level[dim] < 0) continue;
    cells[dim].resize(rows_, max_level[dim] + 1);
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const double y = haar_wrap(points(r, dim - 1));
      for (int j = 0; j <= max_level[dim]; ++j)
        cells[dim](r, j) = static_cast<long long>(std::ldexp(y, j + 1));
    }
  }

  sparse_.reserve(set_.terms().size());
  for (const auto& term : set_.terms()) {
    const auto cols = static_cast<Eigen::Index>(term.size());
    SparseRowMatrix block(rows_, cols);
    if (term.subset().empty()) {
      block.reserve(Eigen::VectorXi::Constant(rows_, 1));
      for (Eigen::Index r = 0; r < rows_; ++r) block.insert(r, 0) = 1.0;
      block.makeCompressed();
      sparse_.push_back(std::move(block));
      continue;
    }
    const auto& dims = term.subset().dims();
    const auto levels = static_cast<int>(term.level_count());
    block.reserve(Eigen::VectorXi::Constant(rows_, levels));
    for (Eigen::Index r = 0; r < rows_; ++r) {
      for (int l = 0; l < levels; ++l) {
        const auto j = term.level(static_cast<std::size_t>(l));
        long long rank = 0;
        double value = 1.0;
        for (std::size_t i = 0; i < dims.size(); ++i) {
          const long long h = cells[dims[i]](r, j[i]);
          rank = (rank << j[i]) + (h >> 1);
          const double amp = std::ldexp(1.0, j[i] / 2) * ((j[i] & 1) ? std::numbers::sqrt2 : 1.0);
          value *= (h & 1) ? -amp : amp;
        }
        const auto col = static_cast<Eigen::Index>(term.level_offset(static_cast<std::size_t>(l)) +
                                                   static_cast<std::size_t>(rank));
        block.insert(r, col) = value;
      }
    }
    block.makeCompressed();
    sparse_.push_back(std::move(block));
  }
}

Vector FeatureTransform::apply(const Vector& coeffs) const {
  Vector out(rows_);
  apply_into(coeffs, out);
  return out;
}

Vector FeatureTransform::apply_transpose(const Vector& v) const {
  Vector out(cols());
  apply_transpose_into(v, out);
  return out;
}

void FeatureTransform::apply_into(const Vector& coeffs, Vector& out) const {
  if (coeffs.size() != cols())
    fail(ErrorCode::invalid_argument, "coefficient vector has length " + std::to_string(coeffs.size()) +
                                          ", expected " + std::to_string(cols()));
  out.setZero(rows_);
  const auto& offsets = set_.offsets();
  for (std::size_t t = 0; t < set_.terms().size(); ++t) {
    const auto off = static_cast<Eigen::Index>(offsets[t]);
    const auto len = static_cast<Eigen::Index>(set_.terms()[t].size());
    if (set_.kind() == BasisKind::cosine)
      out.noalias() += dense_[t] * coeffs.segment(off, len);
    else
      out.noalias() += sparse_[t] * coeffs.segment(off, len);
  }
}

void FeatureTransform::apply_transpose_into(const Vector& v, Vector& out) const {
  if (v.size() != rows_)
    fail(ErrorCode::invalid_argument, "vector has length " + std::to_string(v.size()) +
                                          ", expected " + std::to_string(rows_));
  out.resize(cols());
  const auto& offsets = set_.offsets();
  for (std::size_t t = 0; t < set_.terms().size(); ++t) {
    const auto off = static_cast<Eigen::Index>(offsets[t]);
    const auto len = static_cast<Eigen::Index>(set_.terms()[t].size());
    if (set_.kind() == BasisKind::cosine)
      out.segment(off, len).noalias() = dense_[t].transpose() * v;
    else
      out.segment(off, len).noalias() = sparse_[t].transpose() * v;
  }
}

Matrix FeatureTransform::dense_block(std::size_t term) const {
  if (term >= set_.terms().size()) fail(ErrorCode::index_error, "term index out of range");
  if (set_.kind() == BasisKind::cosine) return dense_[term];
  return Matrix(sparse_[term]);
}

Matrix FeatureTransform::dense_block(const AnovaSubset& subset) const {
  const auto idx = set_.term_index(subset);
  if (!idx) fail(ErrorCode::not_found, "subset " + subset.to_string() + " is not part of the transform");
  return dense_block(*idx);
}

Matrix FeatureTransform::dense() const {
  Matrix out(rows_, cols());
  for (std::size_t t = 0; t < set_.terms().size(); ++t) {
    const auto b = set_.block(t);
    out.middleCols(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.length)) =
        dense_block(t);
  }
  return out;
}

std::size_t FeatureTransform::stored_entries(std::size_t term) const {
  if (term >= set_.terms().size()) fail(ErrorCode::index_error, "term index out of range");
  if (set_.kind() == BasisKind::cosine) return static_cast<std::size_t>(dense_[term].size());
  return static_cast<std::size_t>(sparse_[term].nonZeros());
}

}  // namespace anovasvm
