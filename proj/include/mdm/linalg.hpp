#ifndef MDM_LINALG_HPP
#define MDM_LINALG_HPP

#include <span>

#include <Eigen/Dense>

namespace mdm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical thresholds shared by the rank decisions and the exactness checks.
///
/// `rank_tol` is relative: a singular value counts toward the rank when it
/// exceeds rank_tol * sigma_max * max(rows, cols). `zero_tol` is the absolute
/// slack used when asserting that a product vanishes.
struct Tolerance {
  double rank_tol = 1e-10;
  double zero_tol = 1e-9;
};

/// Throws std::invalid_argument on negative or non-finite thresholds.
void check_tolerance(const Tolerance& tol);

namespace linalg {

Mat kron(const Mat& a, const Mat& b);

/// a ⊗ a ⊗ ... ⊗ a with n factors. n == 0 is rejected.
Mat kron_power(const Mat& a, int n);

/// Column-wise stacking.
Vec vec(const Mat& m);
Mat unvec(const Vec& v, Index rows, Index cols);

Mat block_diagonal(std::span<const Mat> blocks);
Mat block_diagonal(std::initializer_list<Mat> blocks);

/// Singular values of m in decreasing order (empty for empty m).
Vec singular_values(const Mat& m);

/// rank_tol * sigma_max * max(rows, cols).
double rank_threshold(const Vec& singular_values, Index rows, Index cols,
                      const Tolerance& tol);

Index numerical_rank(const Mat& m, const Tolerance& tol);

/// Orthonormal basis (as rows) of the left null space of m, so that
/// N * m == 0 and rows(N) == rows(m) - rank(m).
///
/// Throws NoAnnihilator when m has full row rank.
Mat left_null_space(const Mat& m, const Tolerance& tol);

/// Moore-Penrose pseudo-inverse; singular values under the rank threshold are
/// treated as zero.
Mat pinv(const Mat& m, const Tolerance& tol);

/// Number of unique entries of a symmetric n x n matrix.
constexpr Index unique_count(Index n) { return n * (n + 1) / 2; }

/// Position of entry (i, j), i >= j, inside the unique-element vector.
///
/// Unique entries are listed column by column over the lower triangle:
/// (0,0), (1,0), ..., (n-1,0), (1,1), (2,1), ...
constexpr Index unique_index(Index i, Index j, Index n) {
  if (i < j) {
    const Index t = i;
    i = j;
    j = t;
  }
  return j * n - j * (j - 1) / 2 + (i - j);
}

/// 0/1 selector of size unique_count(n) x n^2 picking the unique entries of
/// vec(S) for symmetric S, in the order of unique_index.
Mat unification_matrix(Index n);

/// 0/1 matrix of size n^2 x unique_count(n) restoring vec(S) from its unique
/// entries. replication_matrix(n) * unification_matrix(n) * vec(S) == vec(S)
/// for symmetric S.
Mat replication_matrix(Index n);

/// unification_matrix(len(z)) * kron(z, z), computed without the Kronecker
/// product.
Vec unique_products(const Vec& z);

/// unification_matrix(rows(b)) * kron(b, b), computed row pair by row pair.
Mat unique_kron_square(const Mat& b);

}  // namespace linalg
}  // namespace mdm

#endif  // MDM_LINALG_HPP
