#ifndef MDM_ESTIMATOR_HPP
#define MDM_ESTIMATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "mdm/banded.hpp"
#include "mdm/eta_covariance.hpp"
#include "mdm/stacked_system.hpp"

namespace mdm {

enum class Method { ordinary, weighted_full_rank, weighted_constrained };

const char* to_string(Method method);

struct IdentifiabilityReport {
  Index rank = 0;
  Index n_alpha = 0;
  double threshold = 0.0;
  /// Singular values of the column-equilibrated design.
  Vec singular_values;
  /// Column scales s_j with design * diag(s) having unit-norm columns.
  Vec column_scale;
  /// Orthonormal basis (columns) of the unidentifiable parameter directions.
  Mat null_basis;
  /// Squared row norms of null_basis: how much parameter i takes part in the
  /// unidentifiable subspace.
  Vec participation;

  bool full_rank() const { return rank == n_alpha; }
  double condition_number() const;
};

IdentifiabilityReport identifiability_report(const Mat& design, const Tolerance& tol);
IdentifiabilityReport identifiability_report(const StackedSystem& sys, const Tolerance& tol);

struct Diagnostics {
  double condition_number = 0.0;
  /// Step-1 estimate of the weighted pipeline.
  std::optional<Vec> alpha_ordinary;
  /// Smallest Cholesky pivot of P relative to its largest diagonal entry.
  std::optional<double> weight_pivot_ratio;
  std::vector<std::string> warnings;
};

struct Estimate {
  Vec alpha;
  std::optional<Mat> cov;
  Method method = Method::ordinary;
  IdentifiabilityReport identifiability;
  Diagnostics diagnostics;
};

/// QR factorisation of the equilibrated design, reusable across observation
/// vectors that share the design.
class OrdinarySolver {
 public:
  /// Throws RankDeficientDesign when the design has fewer than n_alpha
  /// identifiable directions.
  OrdinarySolver(const Mat& design, const Tolerance& tol);

  Vec solve(const Vec& obs) const;
  const IdentifiabilityReport& identifiability() const { return report_; }
  const Vec& column_scale() const { return report_.column_scale; }

 private:
  IdentifiabilityReport report_;
  Eigen::HouseholderQR<Mat> qr_;
};

Estimate ordinary_mdm(const StackedSystem& sys, const Tolerance& tol);
Estimate ordinary_mdm(const StackedSystem& sys, const OrdinarySolver& solver);

/// Covariance of the stacked noise term blkdiag(noisemaps) * [eta_0; ...],
/// built as noisemap_k * band(j) * noisemap_{k+j}^T.
BlockBandedMatrix assemble_p(const StackedDesign& design, const EtaCovariances& etas);

/// Same matrix, built from S = B_k E[E_k E_m^T] B_m^T (B_k the residue noise
/// map) as S_ac S_bd + S_ad S_bc over unique residue pairs. Never forms the
/// n_eps^2 bands.
BlockBandedMatrix assemble_p_factored(const StackedDesign& design,
                                      const EtaCovariances& etas);

enum class WeightedBranch { automatic, full_rank, constrained };

/// automatic: the full-rank solve when the block Cholesky of p_hat succeeds
/// with pivots above rank_tol, otherwise the constrained solve through
/// pinv(P + A A^T). Throws IndefiniteWeight when p_hat has an eigenvalue below
/// -zero_tol * max|diag(P)|.
Estimate weighted_mdm(const StackedSystem& sys, const BlockBandedMatrix& p_hat,
                      const Tolerance& tol,
                      WeightedBranch branch = WeightedBranch::automatic);
Estimate weighted_mdm(const StackedSystem& sys, const BlockBandedMatrix& p_hat,
                      const OrdinarySolver& solver, const Tolerance& tol,
                      WeightedBranch branch = WeightedBranch::automatic);

/// Ordinary estimate, Gaussian eta covariances at that estimate, P-hat, then
/// the weighted estimate.
Estimate three_step_weighted_pipeline(const LtvModel& model,
                                      const NoiseStructure& structure,
                                      const MeasurementData& data, Index L,
                                      InputMode mode, const Tolerance& tol);
Estimate three_step_weighted_pipeline(const StackedSystem& sys,
                                      const NoiseStructure& structure,
                                      const OrdinarySolver& solver,
                                      const Tolerance& tol);

}  // namespace mdm

#endif  // MDM_ESTIMATOR_HPP
