#ifndef MDM_RESIDUE_HPP
#define MDM_RESIDUE_HPP

#include <optional>

#include "mdm/linalg.hpp"
#include "mdm/model.hpp"

namespace mdm {

enum class InputMode { known, unknown };

const char* to_string(InputMode mode);

/// Stacked model matrices of the window z_k..z_{k+L-1}:
///   Z_k = O x_k + Gamma G U_k + Gamma E W_k + D V_k.
struct AugmentedBlock {
  Index k = 0;
  Index L = 1;
  Mat O;       // n_zkL x n_x
  Mat Gamma;   // n_zkL x (L-1) n_x, strictly block lower triangular
  Mat G;       // blkdiag(G_k..G_{k+L-2})
  Mat E;       // blkdiag(E_k..E_{k+L-2})
  Mat D;       // blkdiag(D_k..D_{k+L-1})
  Index n_zkL = 0;

  /// [Gamma, I] * blkdiag(E, D): maps [W; V] to the noise part of Z_k.
  Mat noise_gain() const;
};

/// Throws DimensionError when the window k..k+L-1 overruns the horizon.
AugmentedBlock build_augmented_block(const LtvModel& model, Index k, Index L);

struct StackedMeasurements {
  Vec Z;
  /// u_k..u_{k+L-2}; absent when the data carries no inputs.
  std::optional<Vec> U;
};

/// Concatenates z_k..z_{k+L-1} (and u_k..u_{k+L-2}) checking per-step sizes
/// against the model.
StackedMeasurements stack_measurements(const MeasurementData& data,
                                       const LtvModel& model, Index k, Index L);

/// Data-independent part of the residue at time k.
struct ResidueOperator {
  Index k = 0;
  InputMode mode = InputMode::known;
  /// Orthonormal rows annihilating O (known input) or [O, Gamma G].
  Mat annihilator;
  /// annihilator * Gamma * G; empty in unknown-input mode.
  Mat input_gain;
  Mat A;  // annihilator * [Gamma, I]
  Mat C;  // blkdiag(E, D)
  /// A * C: residue as a linear map of [W; V].
  Mat noise_map;

  Index n_a() const { return annihilator.rows(); }
  /// Residue from stacked data. An absent U is read as zero input.
  Vec apply(const Vec& Z, const std::optional<Vec>& U) const;
};

ResidueOperator make_residue_operator(const AugmentedBlock& block, InputMode mode,
                                      const Tolerance& tol);

struct ResidueBundle {
  Index k = 0;
  Vec ztilde;
  Mat A;
  Mat C;
  Mat annihilator;
  InputMode mode = InputMode::known;

  Index n_a() const { return ztilde.size(); }
};

/// ztilde = N (Z - Gamma G U) with N annihilating O.
ResidueBundle residue_known_input(const AugmentedBlock& block, const Vec& Z,
                                  const std::optional<Vec>& U,
                                  const Tolerance& tol);

/// ztilde = N Z with N annihilating [O, Gamma G]; the input drops out.
ResidueBundle residue_unknown_input(const AugmentedBlock& block, const Vec& Z,
                                    const Tolerance& tol);

/// Per-k moment equation  obs = design * alpha + noisemap * eta_k.
struct RegressionRow {
  Index k = 0;
  Vec obs;       // Xi * kron(ztilde, ztilde)
  Mat design;    // Xi * kron(A C, A C) * Upsilon
  Mat noisemap;  // Xi * kron(A C, A C)
};

RegressionRow regression_row(const ResidueBundle& bundle, const Mat& upsilon);

}  // namespace mdm

#endif  // MDM_RESIDUE_HPP
