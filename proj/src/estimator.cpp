#include "mdm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mdm/errors.hpp"

namespace mdm {

namespace {

constexpr Index kDenseLimit = 8000;

Vec equilibration(const Mat& design, const Tolerance& tol) {
  Vec scale = Vec::Ones(design.cols());
  if (design.cols() == 0) return scale;
  const Vec norms = design.colwise().norm().transpose();
  const double top = norms.maxCoeff();
  for (Index j = 0; j < design.cols(); ++j) {
    if (norms(j) > tol.rank_tol * top && norms(j) > 0.0) scale(j) = 1.0 / norms(j);
  }
  return scale;
}

IdentifiabilityReport analyse(const Mat& design, const Tolerance& tol,
                              Eigen::HouseholderQR<Mat>* keep_qr) {
  check_tolerance(tol);
  IdentifiabilityReport rep;
  rep.n_alpha = design.cols();
  rep.column_scale = equilibration(design, tol);
  const Mat scaled = design * rep.column_scale.asDiagonal();

  Mat r;
  if (scaled.rows() >= scaled.cols()) {
    Eigen::HouseholderQR<Mat> qr(scaled);
    r = qr.matrixQR().topRows(scaled.cols()).triangularView<Eigen::Upper>();
    if (keep_qr) *keep_qr = std::move(qr);
  } else {
    r = scaled;
  }
  Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeFullV);
  rep.singular_values = svd.singularValues();
  rep.threshold = linalg::rank_threshold(rep.singular_values, design.rows(),
                                         design.cols(), tol);
  rep.rank = 0;
  for (Index i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values(i) > rep.threshold) ++rep.rank;
  }

  const Index nullity = rep.n_alpha - rep.rank;
  if (nullity > 0) {
    const Mat directions =
        rep.column_scale.asDiagonal() * svd.matrixV().rightCols(nullity);
    Eigen::HouseholderQR<Mat> qr(directions);
    rep.null_basis = qr.householderQ() * Mat::Identity(rep.n_alpha, nullity);
    rep.participation = rep.null_basis.rowwise().squaredNorm();
  } else {
    rep.null_basis = Mat(rep.n_alpha, 0);
    rep.participation = Vec::Zero(rep.n_alpha);
  }
  return rep;
}

void check_weight_dims(const StackedSystem& sys, const BlockBandedMatrix& p) {
  if (p.rows() != sys.rows()) {
    throw DimensionError("weight matrix has " + std::to_string(p.rows()) +
                         " rows, stacked system has " + std::to_string(sys.rows()));
  }
}

Mat symmetrised(const Mat& m) { return 0.5 * (m + m.transpose()); }

Estimate full_rank_solve(const StackedSystem& sys, const BlockBandedCholesky& chol,
                         const Vec& scale) {
  const Mat aw = chol.solve_lower(sys.design() * scale.asDiagonal());
  const Vec yw = chol.solve_lower(sys.obs);
  Eigen::HouseholderQR<Mat> qr(aw);
  const Index n = aw.cols();
  const Mat r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const Mat r_inv = r.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));

  Estimate est;
  est.method = Method::weighted_full_rank;
  est.alpha = scale.cwiseProduct(qr.solve(yw));
  est.cov = symmetrised(scale.asDiagonal() * (r_inv * r_inv.transpose()) *
                        scale.asDiagonal());
  est.diagnostics.weight_pivot_ratio = chol.min_pivot_ratio();
  return est;
}

Estimate constrained_solve(const StackedSystem& sys, const Mat& p_dense,
                           const Vec& scale, const Tolerance& tol) {
  const Index n = sys.design().cols();
  const double top = p_dense.size() ? p_dense.diagonal().cwiseAbs().maxCoeff() : 0.0;
  const double c = top > 0.0 ? std::sqrt(top) : 1.0;
  const Mat a = c * (sys.design() * scale.asDiagonal());

  const Mat w_pinv = linalg::pinv(p_dense + a * a.transpose(), tol);
  const Mat wa = w_pinv * a;
  const Mat g = a.transpose() * wa;
  const Eigen::LDLT<Mat> ldlt(g);
  if (ldlt.info() != Eigen::Success) {
    throw Error("constrained weighted solve failed: A^T (P + A A^T)^+ A is singular");
  }
  const Vec alpha_scaled = ldlt.solve(wa.transpose() * sys.obs);
  const Mat cov_scaled = ldlt.solve(Mat::Identity(n, n)) - Mat::Identity(n, n);

  Estimate est;
  est.method = Method::weighted_constrained;
  est.alpha = c * scale.cwiseProduct(alpha_scaled);
  est.cov = symmetrised((c * c) * (scale.asDiagonal() * cov_scaled * scale.asDiagonal()));
  return est;
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::ordinary:
      return "ordinary";
    case Method::weighted_full_rank:
      return "weighted-full-rank";
    case Method::weighted_constrained:
      return "weighted-constrained";
  }
  return "unknown";
}

double IdentifiabilityReport::condition_number() const {
  if (singular_values.size() == 0) return 0.0;
  const double lo = singular_values(singular_values.size() - 1);
  return lo > 0.0 ? singular_values(0) / lo : std::numeric_limits<double>::infinity();
}

IdentifiabilityReport identifiability_report(const Mat& design, const Tolerance& tol) {
  return analyse(design, tol, nullptr);
}

IdentifiabilityReport identifiability_report(const StackedSystem& sys,
                                             const Tolerance& tol) {
  return analyse(sys.design(), tol, nullptr);
}

OrdinarySolver::OrdinarySolver(const Mat& design, const Tolerance& tol) {
  report_ = analyse(design, tol, &qr_);
  if (!report_.full_rank()) throw RankDeficientDesign(report_.rank, report_.n_alpha);
}

Vec OrdinarySolver::solve(const Vec& obs) const {
  if (obs.size() != qr_.rows()) {
    throw DimensionError("observation vector has " + std::to_string(obs.size()) +
                         " entries, design has " + std::to_string(qr_.rows()) + " rows");
  }
  return report_.column_scale.cwiseProduct(qr_.solve(obs));
}

Estimate ordinary_mdm(const StackedSystem& sys, const Tolerance& tol) {
  return ordinary_mdm(sys, OrdinarySolver(sys.design(), tol));
}

Estimate ordinary_mdm(const StackedSystem& sys, const OrdinarySolver& solver) {
  Estimate est;
  est.method = Method::ordinary;
  est.alpha = solver.solve(sys.obs);
  est.identifiability = solver.identifiability();
  est.diagnostics.condition_number = est.identifiability.condition_number();
  return est;
}

BlockBandedMatrix assemble_p(const StackedDesign& design, const EtaCovariances& etas) {
  const Index n2 = design.n_eps * design.n_eps;
  if (etas.L != design.L || etas.n_eps() != design.n_eps) {
    throw DimensionError("eta covariances were built for a different window");
  }
  std::vector<Mat> bands;
  for (Index j = 0; j < design.L; ++j) bands.push_back(etas.band(j));

  std::vector<Index> sizes;
  for (Index k = 0; k < design.windows(); ++k) {
    if (design.block(k).noisemap.cols() != n2) {
      throw DimensionError("noise map of window " + std::to_string(k) +
                           " does not match the eta dimension");
    }
    sizes.push_back(design.block(k).rows());
  }
  BlockBandedMatrix p(sizes, design.L - 1);
  for (Index k = 0; k < design.windows(); ++k) {
    for (Index m = k; m < std::min(design.windows(), k + design.L); ++m) {
      const bool repeat = k > 0 && design.blocks[static_cast<std::size_t>(k)] ==
                                       design.blocks[static_cast<std::size_t>(k - 1)] &&
                          design.blocks[static_cast<std::size_t>(m)] ==
                              design.blocks[static_cast<std::size_t>(m - 1)];
      if (repeat) {
        p.lower(m, k) = p.lower(m - 1, k - 1);
        continue;
      }
      const Mat& nk = design.block(k).noisemap;
      const Mat& nm = design.block(m).noisemap;
      p.lower(m, k) = (nk * bands[static_cast<std::size_t>(m - k)] * nm.transpose()).transpose();
    }
  }
  return p;
}

BlockBandedMatrix assemble_p_factored(const StackedDesign& design,
                                      const EtaCovariances& etas) {
  if (etas.L != design.L || etas.n_eps() != design.n_eps) {
    throw DimensionError("eta covariances were built for a different window");
  }
  std::vector<Index> sizes;
  for (Index k = 0; k < design.windows(); ++k) sizes.push_back(design.block(k).rows());
  BlockBandedMatrix p(sizes, design.L - 1);

  for (Index k = 0; k < design.windows(); ++k) {
    const Mat& bk = design.block(k).op.noise_map;
    for (Index m = k; m < std::min(design.windows(), k + design.L); ++m) {
      const bool repeat = k > 0 && design.blocks[static_cast<std::size_t>(k)] ==
                                       design.blocks[static_cast<std::size_t>(k - 1)] &&
                          design.blocks[static_cast<std::size_t>(m)] ==
                              design.blocks[static_cast<std::size_t>(m - 1)];
      if (repeat) {
        p.lower(m, k) = p.lower(m - 1, k - 1);
        continue;
      }
      const Mat& bm = design.block(m).op.noise_map;
      const Mat s = bk * etas.cross_covariance(m - k) * bm.transpose();
      const Index na = s.rows();
      const Index nb = s.cols();
      Mat blk(linalg::unique_count(na), linalg::unique_count(nb));
      Index col = 0;
      for (Index d = 0; d < nb; ++d) {
        for (Index c = d; c < nb; ++c, ++col) {
          Index row = 0;
          for (Index b = 0; b < na; ++b) {
            for (Index a = b; a < na; ++a, ++row) {
              blk(row, col) = s(a, c) * s(b, d) + s(a, d) * s(b, c);
            }
          }
        }
      }
      p.lower(m, k) = blk.transpose();
    }
  }
  return p;
}

Estimate weighted_mdm(const StackedSystem& sys, const BlockBandedMatrix& p_hat,
                      const Tolerance& tol, WeightedBranch branch) {
  return weighted_mdm(sys, p_hat, OrdinarySolver(sys.design(), tol), tol, branch);
}

Estimate weighted_mdm(const StackedSystem& sys, const BlockBandedMatrix& p_hat,
                      const OrdinarySolver& solver, const Tolerance& tol,
                      WeightedBranch branch) {
  check_weight_dims(sys, p_hat);
  const Vec& scale = solver.column_scale();

  Estimate est;
  if (branch != WeightedBranch::constrained) {
    const BlockBandedCholesky chol(p_hat, tol.rank_tol);
    if (chol.ok()) {
      est = full_rank_solve(sys, chol, scale);
    } else if (branch == WeightedBranch::full_rank) {
      throw Error("weight matrix is not numerically full rank (smallest pivot ratio " +
                  std::to_string(chol.min_pivot_ratio()) + ")");
    }
  }
  if (!est.alpha.size()) {
    if (p_hat.rows() > kDenseLimit) {
      throw Error("weight matrix is singular and too large (" +
                  std::to_string(p_hat.rows()) + " rows) for the dense constrained solve");
    }
    const Mat dense = p_hat.to_dense();
    if (dense.size() > 0) {
      const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(dense, Eigen::EigenvaluesOnly)
                         .eigenvalues();
      const double top = ev.cwiseAbs().maxCoeff();
      if (ev.minCoeff() < -tol.zero_tol * top) {
        throw IndefiniteWeight("weight matrix is indefinite (eigenvalue " +
                               std::to_string(ev.minCoeff()) + ", largest |eigenvalue| " +
                               std::to_string(top) + ")");
      }
    }
    est = constrained_solve(sys, dense, scale, tol);
  }
  est.identifiability = solver.identifiability();
  est.diagnostics.condition_number = est.identifiability.condition_number();
  return est;
}

Estimate three_step_weighted_pipeline(const LtvModel& model,
                                      const NoiseStructure& structure,
                                      const MeasurementData& data, Index L,
                                      InputMode mode, const Tolerance& tol) {
  const StackedSystem sys = build_stacked_system(model, structure, data, L, mode, tol);
  return three_step_weighted_pipeline(sys, structure, OrdinarySolver(sys.design(), tol),
                                      tol);
}

Estimate three_step_weighted_pipeline(const StackedSystem& sys,
                                      const NoiseStructure& structure,
                                      const OrdinarySolver& solver,
                                      const Tolerance& tol) {
  const Vec alpha_o = solver.solve(sys.obs);
  const EtaCovariances etas =
      gaussian_eta_covariances(structure, alpha_o, sys.layout->L, PsdRepair::clip);
  const BlockBandedMatrix p_hat = assemble_p_factored(*sys.layout, etas);
  Estimate est = weighted_mdm(sys, p_hat, solver, tol);
  est.diagnostics.alpha_ordinary = alpha_o;
  est.diagnostics.warnings.insert(est.diagnostics.warnings.end(), etas.warnings.begin(),
                                  etas.warnings.end());
  return est;
}

}  // namespace mdm
