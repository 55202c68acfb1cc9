#include "mdm/stacked_system.hpp"

#include <string>

#include "mdm/errors.hpp"

namespace mdm {

namespace {

std::shared_ptr<const DesignBlock> make_block(const LtvModel& model, Index k,
                                              Index L, InputMode mode,
                                              const Mat& upsilon,
                                              const Tolerance& tol) {
  auto block = std::make_shared<DesignBlock>();
  block->op = make_residue_operator(build_augmented_block(model, k, L), mode, tol);
  block->noisemap = linalg::unique_kron_square(block->op.noise_map);
  block->design = block->noisemap * upsilon;
  return block;
}

Index window_count(Index tau, Index L) { return tau - L + 2; }

}  // namespace

std::shared_ptr<const StackedDesign> build_stacked_design(
    const LtvModel& model, const NoiseStructure& structure, Index L,
    InputMode mode, const Tolerance& tol) {
  check_tolerance(tol);
  require_valid(model, structure);
  if (L < 1) throw DimensionError("window length L must be >= 1");
  const Index windows = window_count(model.tau, L);
  if (windows < 1) {
    throw DimensionError("horizon too short: " + std::to_string(model.tau + 1) +
                         " samples cannot hold a window of length L=" +
                         std::to_string(L));
  }

  auto out = std::make_shared<StackedDesign>();
  out->mode = mode;
  out->L = L;
  out->n_alpha = structure.n_alpha();
  out->n_eps = (L - 1) * model.n_w + L * model.n_v;
  out->upsilon = defining_replication(structure, L);
  out->blocks.reserve(static_cast<std::size_t>(windows));
  out->row_offsets.reserve(static_cast<std::size_t>(windows + 1));
  out->row_offsets.push_back(0);

  const bool lti = model.is_time_invariant();
  for (Index k = 0; k < windows; ++k) {
    if (lti && k > 0) {
      out->blocks.push_back(out->blocks.back());
    } else {
      try {
        out->blocks.push_back(make_block(model, k, L, mode, out->upsilon, tol));
      } catch (const NoAnnihilator& e) {
        const auto feasible = minimal_window(model, mode, tol, L + 1);
        std::string msg = "no annihilator for window k=" + std::to_string(k) +
                          " with L=" + std::to_string(L) + ": " + e.what();
        msg += feasible ? "; smallest feasible L is " + std::to_string(*feasible)
                        : std::string("; no feasible L within the horizon");
        throw NoAnnihilator(msg, k, feasible);
      }
    }
    out->row_offsets.push_back(out->row_offsets.back() + out->blocks.back()->rows());
  }

  out->design.resize(out->rows(), out->n_alpha);
  for (Index k = 0; k < windows; ++k) {
    const DesignBlock& b = out->block(k);
    out->design.middleRows(out->row_offsets[static_cast<std::size_t>(k)], b.rows()) =
        b.design;
  }
  return out;
}

Vec observe(const StackedDesign& design, const LtvModel& model,
            const MeasurementData& data) {
  if (data.tau() < design.windows() + design.L - 2) {
    throw DimensionError("measurement data covers k=0.." + std::to_string(data.tau()) +
                         " but the design needs k=0.." +
                         std::to_string(design.windows() + design.L - 2));
  }
  Vec obs(design.rows());
  for (Index k = 0; k < design.windows(); ++k) {
    const StackedMeasurements m = stack_measurements(data, model, k, design.L);
    const DesignBlock& b = design.block(k);
    obs.segment(design.row_offsets[static_cast<std::size_t>(k)], b.rows()) =
        linalg::unique_products(b.op.apply(m.Z, m.U));
  }
  return obs;
}

StackedSystem build_stacked_system(const LtvModel& model,
                                   const NoiseStructure& structure,
                                   const MeasurementData& data, Index L,
                                   InputMode mode, const Tolerance& tol) {
  StackedSystem sys;
  sys.layout = build_stacked_design(model, structure, L, mode, tol);
  sys.obs = observe(*sys.layout, model, data);
  return sys;
}

bool window_feasible(const LtvModel& model, Index L, InputMode mode,
                     const Tolerance& tol) {
  const Index windows = window_count(model.tau, L);
  if (L < 1 || windows < 1) return false;
  const Index last = model.is_time_invariant() ? 1 : windows;
  for (Index k = 0; k < last; ++k) {
    const AugmentedBlock b = build_augmented_block(model, k, L);
    Mat target = b.O;
    if (mode == InputMode::unknown) {
      const Mat gamma_g = b.Gamma * b.G;
      target.resize(b.n_zkL, b.O.cols() + gamma_g.cols());
      target << b.O, gamma_g;
    }
    if (linalg::numerical_rank(target, tol) >= b.n_zkL) return false;
  }
  return true;
}

std::optional<Index> minimal_window(const LtvModel& model, InputMode mode,
                                    const Tolerance& tol, Index from, Index max_L) {
  if (max_L < 0) max_L = model.tau + 1;
  for (Index L = std::max<Index>(from, 1); L <= max_L; ++L) {
    if (window_feasible(model, L, mode, tol)) return L;
  }
  return std::nullopt;
}

}  // namespace mdm
