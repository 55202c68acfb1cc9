#include "mdm/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mdm/errors.hpp"

namespace mdm {

BlockBandedMatrix::BlockBandedMatrix(std::vector<Index> block_sizes, Index bandwidth)
    : sizes_(std::move(block_sizes)), bandwidth_(bandwidth) {
  if (bandwidth_ < 0) throw DimensionError("block bandwidth must be >= 0");
  offsets_.assign(sizes_.size() + 1, 0);
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] < 0) throw DimensionError("negative block size");
    offsets_[i + 1] = offsets_[i] + sizes_[i];
  }
  lower_.resize(sizes_.size() * static_cast<std::size_t>(bandwidth_ + 1));
  for (Index i = 0; i < blocks(); ++i) {
    for (Index j = std::max<Index>(0, i - bandwidth_); j <= i; ++j) {
      lower_[slot(i, j)] = Mat::Zero(block_size(i), block_size(j));
    }
  }
}

BlockBandedMatrix BlockBandedMatrix::identity(std::vector<Index> block_sizes,
                                              Index bandwidth) {
  BlockBandedMatrix m(std::move(block_sizes), bandwidth);
  for (Index i = 0; i < m.blocks(); ++i) m.lower(i, i).setIdentity();
  return m;
}

std::size_t BlockBandedMatrix::slot(Index i, Index j) const {
  if (i < j || i - j > bandwidth_ || j < 0 || i >= blocks()) {
    throw DimensionError("block (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is outside the stored band");
  }
  return static_cast<std::size_t>(i * (bandwidth_ + 1) + (i - j));
}

Mat& BlockBandedMatrix::lower(Index i, Index j) { return lower_[slot(i, j)]; }

const Mat& BlockBandedMatrix::lower(Index i, Index j) const { return lower_[slot(i, j)]; }

Mat BlockBandedMatrix::block(Index i, Index j) const {
  if (std::abs(i - j) > bandwidth_) return Mat::Zero(block_size(i), block_size(j));
  return i >= j ? lower(i, j) : Mat(lower(j, i).transpose());
}

Mat BlockBandedMatrix::to_dense() const {
  Mat out = Mat::Zero(rows(), rows());
  for (Index i = 0; i < blocks(); ++i) {
    for (Index j = std::max<Index>(0, i - bandwidth_); j <= i; ++j) {
      const Mat& b = lower(i, j);
      out.block(offset(i), offset(j), b.rows(), b.cols()) = b;
      if (i != j) out.block(offset(j), offset(i), b.cols(), b.rows()) = b.transpose();
    }
  }
  return out;
}

double BlockBandedMatrix::max_abs_diagonal() const {
  double m = 0.0;
  for (Index i = 0; i < blocks(); ++i) {
    if (block_size(i) > 0) m = std::max(m, lower(i, i).diagonal().cwiseAbs().maxCoeff());
  }
  return m;
}

BlockBandedCholesky::BlockBandedCholesky(const BlockBandedMatrix& p, double pivot_tol)
    : factor_(p) {
  const double scale = p.max_abs_diagonal();
  if (scale <= 0.0) {
    ok_ = p.rows() == 0;
    min_ratio_ = 0.0;
    return;
  }
  const Index b = p.bandwidth();
  min_ratio_ = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < p.blocks(); ++i) {
    const Index first = std::max<Index>(0, i - b);
    for (Index j = first; j <= i; ++j) {
      Mat s = p.lower(i, j);
      for (Index l = first; l < j; ++l) {
        s.noalias() -= factor_.lower(i, l) * factor_.lower(j, l).transpose();
      }
      if (j < i) {
        // L_ij L_jj^T = S
        factor_.lower(i, j) = factor_.lower(j, j)
                                  .triangularView<Eigen::Lower>()
                                  .solve(s.transpose())
                                  .transpose();
        continue;
      }
      if (s.rows() == 0) continue;
      Eigen::LLT<Mat> llt(s);
      if (llt.info() != Eigen::Success) {
        ok_ = false;
        min_ratio_ = 0.0;
        return;
      }
      Mat l = llt.matrixL();
      const double pivot = l.diagonal().cwiseAbs2().minCoeff() / scale;
      min_ratio_ = std::min(min_ratio_, pivot);
      if (!(pivot > pivot_tol)) {
        ok_ = false;
        return;
      }
      factor_.lower(i, i) = std::move(l);
    }
  }
  ok_ = true;
}

Mat BlockBandedCholesky::solve_lower(const Mat& rhs) const {
  if (!ok_) throw Error("block Cholesky factorization failed; cannot solve");
  if (rhs.rows() != factor_.rows()) {
    throw DimensionError("right-hand side has " + std::to_string(rhs.rows()) +
                         " rows, expected " + std::to_string(factor_.rows()));
  }
  Mat x(rhs.rows(), rhs.cols());
  const Index b = factor_.bandwidth();
  for (Index i = 0; i < factor_.blocks(); ++i) {
    const Index n = factor_.block_size(i);
    if (n == 0) continue;
    Mat r = rhs.middleRows(factor_.offset(i), n);
    for (Index l = std::max<Index>(0, i - b); l < i; ++l) {
      r.noalias() -= factor_.lower(i, l) * x.middleRows(factor_.offset(l), factor_.block_size(l));
    }
    x.middleRows(factor_.offset(i), n) =
        factor_.lower(i, i).triangularView<Eigen::Lower>().solve(r);
  }
  return x;
}

}  // namespace mdm
