#include "mdm/eta_covariance.hpp"

#include <sstream>

#include "mdm/errors.hpp"

namespace mdm {

namespace {

/// Returns the PSD part of a symmetric matrix and the most negative
/// eigenvalue that was removed (0 when none).
std::pair<Mat, double> clip_psd(const Mat& m) {
  if (m.size() == 0) return {m, 0.0};
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Vec ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  const double slack = 1e-12 * scale;
  if (ev.minCoeff() >= -slack) return {m, 0.0};
  const Vec clipped = ev.cwiseMax(0.0);
  Mat out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  out = 0.5 * (out + out.transpose()).eval();
  return {out, ev.minCoeff()};
}

void place_shifted(Mat& out, Index row0, Index col0, Index blocks, Index n,
                   Index j, const Mat& cov) {
  // Block (a, b) pairs the noise at step a with the one at step b + j.
  for (Index a = j; a < blocks; ++a) {
    out.block(row0 + a * n, col0 + (a - j) * n, n, n) = cov;
  }
}

}  // namespace

Mat EtaCovariances::cross_covariance(Index j) const {
  const Index n = n_eps();
  if (j < 0) throw DimensionError("negative band offset");
  if (j >= L) return Mat::Zero(n, n);
  return cross[static_cast<std::size_t>(j)];
}

Mat EtaCovariances::joint_covariance(Index j) const {
  const Index n = n_eps();
  const Mat s0 = cross_covariance(0);
  const Mat sj = cross_covariance(j);
  Mat out(2 * n, 2 * n);
  out << s0, sj, sj.transpose(), s0;
  return out;
}

Vec EtaCovariances::vector_form(Index j) const {
  const Index n = n_eps();
  const Index n2 = n * n;
  const Mat joint = joint_covariance(j);
  const Vec mean = linalg::vec(cross_covariance(0));
  Vec out(n2 * n2);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const Index p = a * n + b;
      for (Index c = 0; c < n; ++c) {
        for (Index d = 0; d < n; ++d) {
          const Index q = c * n + d;
          const double e4 = joint(a, b) * joint(n + c, n + d) +
                            joint(a, n + c) * joint(b, n + d) +
                            joint(a, n + d) * joint(b, n + c);
          out(p * n2 + q) = e4 - mean(p) * mean(q);
        }
      }
    }
  }
  return out;
}

Mat EtaCovariances::band(Index j) const {
  const Index n = n_eps();
  const Index n2 = n * n;
  if (j >= L) return Mat::Zero(n2, n2);
  const Mat s = cross_covariance(j);
  Mat out(n2, n2);
  for (Index c = 0; c < n; ++c) {
    for (Index d = 0; d < n; ++d) {
      const Index q = c * n + d;
      for (Index a = 0; a < n; ++a) {
        for (Index b = 0; b < n; ++b) {
          out(a * n + b, q) = s(a, c) * s(b, d) + s(a, d) * s(b, c);
        }
      }
    }
  }
  return out;
}

EtaCovariances gaussian_eta_covariances(const NoiseStructure& structure,
                                        const Vec& alpha, Index L, PsdRepair repair) {
  if (L < 1) throw DimensionError("window length L must be >= 1");
  NoiseCovariances qr = assemble_qr(structure, alpha);

  EtaCovariances out;
  out.L = L;
  out.n_w = structure.n_w();
  out.n_v = structure.n_v();

  const auto [q_fixed, q_min] = clip_psd(qr.Q);
  const auto [r_fixed, r_min] = clip_psd(qr.R);
  for (const auto& [name, min] : {std::pair{"Q", q_min}, std::pair{"R", r_min}}) {
    if (min == 0.0) continue;
    std::ostringstream msg;
    msg << name << "(alpha) is indefinite (min eigenvalue " << min << ")";
    if (repair == PsdRepair::reject) throw NonPsdCovariance(msg.str());
    msg << "; negative eigenvalues clipped to zero";
    out.warnings.push_back(msg.str());
  }
  out.Q = q_fixed;
  out.R = r_fixed;

  const Index n = out.n_eps();
  const Index w_rows = (L - 1) * out.n_w;
  for (Index j = 0; j < L; ++j) {
    Mat s = Mat::Zero(n, n);
    place_shifted(s, 0, 0, L - 1, out.n_w, j, out.Q);
    place_shifted(s, w_rows, w_rows, L, out.n_v, j, out.R);
    out.cross.push_back(std::move(s));
  }
  return out;
}

}  // namespace mdm
