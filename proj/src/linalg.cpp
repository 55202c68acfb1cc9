#include "mdm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mdm/errors.hpp"

namespace mdm {

void check_tolerance(const Tolerance& tol) {
  if (!(tol.rank_tol >= 0.0) || !std::isfinite(tol.rank_tol) ||
      !(tol.zero_tol >= 0.0) || !std::isfinite(tol.zero_tol)) {
    throw std::invalid_argument("tolerances must be finite and nonnegative");
  }
}

namespace linalg {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Mat kron_power(const Mat& a, int n) {
  if (n < 1) {
    throw std::invalid_argument("kron_power needs at least one factor");
  }
  Mat out = a;
  for (int i = 1; i < n; ++i) out = kron(out, a);
  return out;
}

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, Index rows, Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw DimensionError("unvec: vector of length " + std::to_string(v.size()) +
                         " cannot be reshaped to " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Mat block_diagonal(std::span<const Mat> blocks) {
  Index rows = 0;
  Index cols = 0;
  for (const Mat& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Index r = 0;
  Index c = 0;
  for (const Mat& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Mat block_diagonal(std::initializer_list<Mat> blocks) {
  return block_diagonal(std::span<const Mat>(blocks.begin(), blocks.size()));
}

Vec singular_values(const Mat& m) {
  if (m.size() == 0) return Vec();
  if (std::min(m.rows(), m.cols()) <= 16) {
    return Eigen::JacobiSVD<Mat>(m).singularValues();
  }
  return Eigen::BDCSVD<Mat>(m).singularValues();
}

double rank_threshold(const Vec& sv, Index rows, Index cols,
                      const Tolerance& tol) {
  if (sv.size() == 0) return 0.0;
  return tol.rank_tol * sv(0) * static_cast<double>(std::max(rows, cols));
}

namespace {

Index count_above(const Vec& sv, double threshold) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  Index r = 0;
  while (r < sv.size() && sv(r) > threshold) ++r;
  return r;
}

}  // namespace

Index numerical_rank(const Mat& m, const Tolerance& tol) {
  const Vec sv = singular_values(m);
  return count_above(sv, rank_threshold(sv, m.rows(), m.cols(), tol));
}

Mat left_null_space(const Mat& m, const Tolerance& tol) {
  const Index n = m.rows();
  if (n == 0) {
    throw NoAnnihilator("left_null_space: matrix has no rows");
  }
  if (m.cols() == 0) return Mat::Identity(n, n);

  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
  const Vec& sv = svd.singularValues();
  const Index r = count_above(sv, rank_threshold(sv, m.rows(), m.cols(), tol));
  if (r >= n) {
    throw NoAnnihilator("matrix of size " + std::to_string(n) + "x" +
                        std::to_string(m.cols()) +
                        " has full row rank; no annihilator exists");
  }
  Mat null = svd.matrixU().rightCols(n - r).transpose();
  // Fix the sign of each row so the result does not depend on SVD internals.
  for (Index i = 0; i < null.rows(); ++i) {
    Index arg = 0;
    null.row(i).cwiseAbs().maxCoeff(&arg);
    if (null(i, arg) < 0.0) null.row(i) *= -1.0;
  }
  return null;
}

Mat pinv(const Mat& m, const Tolerance& tol) {
  if (m.size() == 0) return Mat::Zero(m.cols(), m.rows());
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double threshold = rank_threshold(sv, m.rows(), m.cols(), tol);
  Vec inv = Vec::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat unification_matrix(Index n) {
  if (n < 1) throw std::invalid_argument("unification_matrix: n must be >= 1");
  Mat xi = Mat::Zero(unique_count(n), n * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      xi(unique_index(i, j, n), i + j * n) = 1.0;
    }
  }
  return xi;
}

Mat replication_matrix(Index n) {
  if (n < 1) throw std::invalid_argument("replication_matrix: n must be >= 1");
  Mat psi = Mat::Zero(n * n, unique_count(n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      psi(i + j * n, unique_index(i, j, n)) = 1.0;
    }
  }
  return psi;
}

Vec unique_products(const Vec& z) {
  const Index n = z.size();
  Vec out(unique_count(n));
  Index r = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) out(r++) = z(i) * z(j);
  }
  return out;
}

Mat unique_kron_square(const Mat& b) {
  const Index n = b.rows();
  const Index m = b.cols();
  Mat out(unique_count(n), m * m);
  Index r = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      // Row i + j * n of kron(b, b) is kron(b.row(j), b.row(i)).
      for (Index p = 0; p < m; ++p) {
        out.row(r).segment(p * m, m) = b(j, p) * b.row(i);
      }
      ++r;
    }
  }
  return out;
}

}  // namespace linalg
}  // namespace mdm
