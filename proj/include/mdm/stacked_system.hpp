#ifndef MDM_STACKED_SYSTEM_HPP
#define MDM_STACKED_SYSTEM_HPP

#include <memory>
#include <optional>
#include <vector>

#include "mdm/residue.hpp"

namespace mdm {

/// Regression block of one window. Time-invariant models share one block
/// across all k.
struct DesignBlock {
  ResidueOperator op;
  Mat design;    // unique_count(n_a) x n_alpha
  Mat noisemap;  // unique_count(n_a) x n_eps^2

  Index rows() const { return design.rows(); }
};

/// The data-independent half of the stacked regression
///   obs = design * alpha + blkdiag(noisemaps) * [eta_0; eta_1; ...],
/// one block per window k = 0..tau-L+1.
struct StackedDesign {
  InputMode mode = InputMode::known;
  Index L = 1;
  Index n_alpha = 0;
  Index n_eps = 0;
  Mat upsilon;
  std::vector<std::shared_ptr<const DesignBlock>> blocks;
  /// Row range of window k is [row_offsets[k], row_offsets[k+1]).
  std::vector<Index> row_offsets;
  Mat design;

  Index windows() const { return static_cast<Index>(blocks.size()); }
  Index rows() const { return row_offsets.empty() ? 0 : row_offsets.back(); }
  const DesignBlock& block(Index k) const { return *blocks[static_cast<std::size_t>(k)]; }
};

/// Builds every window's residue operator and regression block.
///
/// Throws NoAnnihilator (carrying k and the smallest feasible L, if any) when
/// some window has no annihilator, and DimensionError when the horizon is
/// shorter than the window.
std::shared_ptr<const StackedDesign> build_stacked_design(
    const LtvModel& model, const NoiseStructure& structure, Index L,
    InputMode mode, const Tolerance& tol);

/// Stacked observation vector Xi * kron(ztilde_k, ztilde_k) over all windows.
Vec observe(const StackedDesign& design, const LtvModel& model,
            const MeasurementData& data);

struct StackedSystem {
  std::shared_ptr<const StackedDesign> layout;
  Vec obs;

  const Mat& design() const { return layout->design; }
  Index rows() const { return layout->rows(); }
};

StackedSystem build_stacked_system(const LtvModel& model,
                                   const NoiseStructure& structure,
                                   const MeasurementData& data, Index L,
                                   InputMode mode, const Tolerance& tol);

/// True when every window of length L admits an annihilator.
bool window_feasible(const LtvModel& model, Index L, InputMode mode,
                     const Tolerance& tol);

/// Smallest feasible L in [from, max_L]; max_L < 0 means tau + 1.
std::optional<Index> minimal_window(const LtvModel& model, InputMode mode,
                                    const Tolerance& tol, Index from = 1,
                                    Index max_L = -1);

}  // namespace mdm

#endif  // MDM_STACKED_SYSTEM_HPP
