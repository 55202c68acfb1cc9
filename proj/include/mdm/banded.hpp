#ifndef MDM_BANDED_HPP
#define MDM_BANDED_HPP

#include <vector>

#include "mdm/linalg.hpp"

namespace mdm {

/// Symmetric matrix with a block band: block (i, j) is zero when
/// |i - j| > bandwidth. Only the lower blocks (i >= j) are stored.
class BlockBandedMatrix {
 public:
  BlockBandedMatrix() = default;
  BlockBandedMatrix(std::vector<Index> block_sizes, Index bandwidth);

  static BlockBandedMatrix identity(std::vector<Index> block_sizes, Index bandwidth);

  Index blocks() const { return static_cast<Index>(sizes_.size()); }
  Index bandwidth() const { return bandwidth_; }
  Index rows() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index block_size(Index i) const { return sizes_[static_cast<std::size_t>(i)]; }
  Index offset(Index i) const { return offsets_[static_cast<std::size_t>(i)]; }

  /// Block (i, j) with 0 <= i - j <= bandwidth.
  Mat& lower(Index i, Index j);
  const Mat& lower(Index i, Index j) const;

  /// Block (i, j) for any i, j; zero outside the band.
  Mat block(Index i, Index j) const;

  Mat to_dense() const;
  double max_abs_diagonal() const;

 private:
  std::size_t slot(Index i, Index j) const;

  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  Index bandwidth_ = 0;
  std::vector<Mat> lower_;
};

/// Block Cholesky factor P = L L^T that keeps the band structure.
///
/// ok() is false when a pivot falls below pivot_tol * max|diag(P)|, i.e. P is
/// singular or indefinite to working precision.
class BlockBandedCholesky {
 public:
  BlockBandedCholesky(const BlockBandedMatrix& p, double pivot_tol);

  bool ok() const { return ok_; }
  /// Smallest squared pivot relative to max|diag(P)|.
  double min_pivot_ratio() const { return min_ratio_; }

  /// L^{-1} rhs.
  Mat solve_lower(const Mat& rhs) const;

 private:
  BlockBandedMatrix factor_;
  bool ok_ = false;
  double min_ratio_ = 0.0;
};

}  // namespace mdm

#endif  // MDM_BANDED_HPP
