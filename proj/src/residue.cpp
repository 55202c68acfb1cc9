#include "mdm/residue.hpp"

#include <string>
#include <vector>

#include "mdm/errors.hpp"

namespace mdm {

const char* to_string(InputMode mode) {
  return mode == InputMode::known ? "known" : "unknown";
}

Mat AugmentedBlock::noise_gain() const {
  Mat out(n_zkL, E.cols() + D.cols());
  out << Gamma * E, D;
  return out;
}

AugmentedBlock build_augmented_block(const LtvModel& model, Index k, Index L) {
  if (L < 1) throw DimensionError("window length L must be >= 1");
  if (k < 0 || k + L - 1 > model.tau) {
    throw DimensionError("window k=" + std::to_string(k) + ", L=" + std::to_string(L) +
                         " overruns the horizon tau=" + std::to_string(model.tau));
  }
  const Index n_x = model.n_x;
  std::vector<Index> offset(static_cast<std::size_t>(L + 1), 0);
  for (Index i = 0; i < L; ++i) {
    offset[static_cast<std::size_t>(i + 1)] =
        offset[static_cast<std::size_t>(i)] + model.n_z(k + i);
  }
  const Index n_zkL = offset.back();
  auto row0 = [&](Index i) { return offset[static_cast<std::size_t>(i)]; };

  AugmentedBlock b;
  b.k = k;
  b.L = L;
  b.n_zkL = n_zkL;

  b.O.resize(n_zkL, n_x);
  Mat transition = Mat::Identity(n_x, n_x);  // F_{k+i-1} ... F_k
  for (Index i = 0; i < L; ++i) {
    b.O.middleRows(row0(i), model.n_z(k + i)) = model.H.at(k + i) * transition;
    if (i + 1 < L) transition = model.F.at(k + i) * transition;
  }

  b.Gamma = Mat::Zero(n_zkL, (L - 1) * n_x);
  for (Index j = 0; j + 1 < L; ++j) {
    Mat p = Mat::Identity(n_x, n_x);  // F_{k+i-1} ... F_{k+j+1}
    for (Index i = j + 1; i < L; ++i) {
      b.Gamma.block(row0(i), j * n_x, model.n_z(k + i), n_x) = model.H.at(k + i) * p;
      if (i + 1 < L) p = model.F.at(k + i) * p;
    }
  }

  std::vector<Mat> gs;
  std::vector<Mat> es;
  std::vector<Mat> ds;
  for (Index i = 0; i < L; ++i) {
    if (i + 1 < L) {
      gs.push_back(model.G.at(k + i));
      es.push_back(model.E.at(k + i));
    }
    ds.push_back(model.D.at(k + i));
  }
  b.G = linalg::block_diagonal(gs);
  b.E = linalg::block_diagonal(es);
  b.D = linalg::block_diagonal(ds);
  return b;
}

StackedMeasurements stack_measurements(const MeasurementData& data,
                                       const LtvModel& model, Index k, Index L) {
  if (L < 1) throw DimensionError("window length L must be >= 1");
  if (k < 0 || k + L - 1 > data.tau()) {
    throw DimensionError("measurement record k=" + std::to_string(k + L - 1) +
                         " is missing (data covers k=0.." +
                         std::to_string(data.tau()) + ")");
  }
  StackedMeasurements out;
  Index n = 0;
  for (Index i = 0; i < L; ++i) n += model.n_z(k + i);
  out.Z.resize(n);
  Index r = 0;
  for (Index i = 0; i < L; ++i) {
    const Vec& z = data.z[static_cast<std::size_t>(k + i)];
    if (z.size() != model.n_z(k + i)) {
      throw DimensionError("z at k=" + std::to_string(k + i) + " has " +
                           std::to_string(z.size()) + " entries, model expects " +
                           std::to_string(model.n_z(k + i)));
    }
    out.Z.segment(r, z.size()) = z;
    r += z.size();
  }

  if (data.u) {
    Index nu = 0;
    for (Index i = 0; i + 1 < L; ++i) nu += model.n_u(k + i);
    Vec U(nu);
    Index c = 0;
    for (Index i = 0; i + 1 < L; ++i) {
      const auto s = static_cast<std::size_t>(k + i);
      if (s >= data.u->size() || (*data.u)[s].size() != model.n_u(k + i)) {
        throw DimensionError("input at k=" + std::to_string(k + i) +
                             " is missing or has the wrong size");
      }
      U.segment(c, model.n_u(k + i)) = (*data.u)[s];
      c += model.n_u(k + i);
    }
    out.U = std::move(U);
  }
  return out;
}

Vec ResidueOperator::apply(const Vec& Z, const std::optional<Vec>& U) const {
  if (Z.size() != annihilator.cols()) {
    throw DimensionError("stacked measurement has " + std::to_string(Z.size()) +
                         " entries, expected " + std::to_string(annihilator.cols()));
  }
  Vec out = annihilator * Z;
  if (mode == InputMode::known && U && input_gain.cols() > 0) {
    if (U->size() != input_gain.cols()) {
      throw DimensionError("stacked input has " + std::to_string(U->size()) +
                           " entries, expected " + std::to_string(input_gain.cols()));
    }
    out.noalias() -= input_gain * (*U);
  }
  return out;
}

ResidueOperator make_residue_operator(const AugmentedBlock& block, InputMode mode,
                                      const Tolerance& tol) {
  ResidueOperator op;
  op.k = block.k;
  op.mode = mode;
  const Mat gamma_g = block.Gamma * block.G;
  if (mode == InputMode::known) {
    op.annihilator = linalg::left_null_space(block.O, tol);
    op.input_gain = op.annihilator * gamma_g;
  } else {
    Mat target(block.n_zkL, block.O.cols() + gamma_g.cols());
    target << block.O, gamma_g;
    op.annihilator = linalg::left_null_space(target, tol);
    op.input_gain = Mat(op.annihilator.rows(), 0);
  }
  const Index n = block.n_zkL;
  op.A.resize(op.annihilator.rows(), block.Gamma.cols() + n);
  op.A << op.annihilator * block.Gamma, op.annihilator;
  op.C = linalg::block_diagonal({block.E, block.D});
  op.noise_map = op.annihilator * block.noise_gain();
  return op;
}

namespace {

ResidueBundle to_bundle(const ResidueOperator& op, Vec ztilde) {
  ResidueBundle b;
  b.k = op.k;
  b.ztilde = std::move(ztilde);
  b.A = op.A;
  b.C = op.C;
  b.annihilator = op.annihilator;
  b.mode = op.mode;
  return b;
}

}  // namespace

ResidueBundle residue_known_input(const AugmentedBlock& block, const Vec& Z,
                                  const std::optional<Vec>& U,
                                  const Tolerance& tol) {
  const ResidueOperator op = make_residue_operator(block, InputMode::known, tol);
  return to_bundle(op, op.apply(Z, U));
}

ResidueBundle residue_unknown_input(const AugmentedBlock& block, const Vec& Z,
                                    const Tolerance& tol) {
  const ResidueOperator op = make_residue_operator(block, InputMode::unknown, tol);
  return to_bundle(op, op.apply(Z, std::nullopt));
}

RegressionRow regression_row(const ResidueBundle& bundle, const Mat& upsilon) {
  const Mat b = bundle.A * bundle.C;
  if (upsilon.rows() != b.cols() * b.cols()) {
    throw DimensionError("Upsilon has " + std::to_string(upsilon.rows()) +
                         " rows, expected n_eps^2 = " +
                         std::to_string(b.cols() * b.cols()));
  }
  RegressionRow row;
  row.k = bundle.k;
  row.obs = linalg::unique_products(bundle.ztilde);
  row.noisemap = linalg::unique_kron_square(b);
  row.design = row.noisemap * upsilon;
  return row;
}

}  // namespace mdm
