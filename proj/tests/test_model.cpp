#include <gtest/gtest.h>

#include <cmath>

#include "mdm/errors.hpp"
#include "mdm/harness.hpp"
#include "mdm/model.hpp"
#include "mdm/model_io.hpp"
#include "test_support.hpp"

namespace mdm {
namespace {

using testing::Gen;
using testing::max_abs;
using testing::scalar;

Mat mat(std::initializer_list<std::initializer_list<double>> r) {
  Mat m(static_cast<Index>(r.size()), static_cast<Index>(r.begin()->size()));
  Index i = 0;
  for (const auto& row : r) {
    Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

NoiseStructure ncv_structure(double T) {
  const Mat z = Mat::Zero(2, 2);
  NoiseStructure s;
  s.bq = {mat({{T * T * T / 3, T * T / 2}, {T * T / 2, T}}), z, z, z};
  s.br = {z, mat({{1, 0}, {0, 0}}), mat({{0, 1}, {1, 0}}), mat({{0, 0}, {0, 1}})};
  return s;
}

NoiseStructure random_structure(Gen& g, Index n_w, Index n_v, Index n_alpha) {
  NoiseStructure s;
  for (Index i = 0; i < n_alpha; ++i) {
    s.bq.push_back(g.integer_symmetric(n_w));
    s.br.push_back(g.integer_symmetric(n_v));
  }
  return s;
}

Vec integer_vector(Gen& g, Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = static_cast<double>(g.integer(-4, 4));
  return v;
}

TEST(AssembleQr, NearlyConstantVelocityBasis) {
  const double T = 0.5;
  const double s2 = 3.0, r1 = 2.0, r12 = -0.5, r2 = 4.0;
  const NoiseCovariances qr = assemble_qr(ncv_structure(T), (Vec(4) << s2, r1, r12, r2).finished());
  EXPECT_EQ(qr.Q, s2 * mat({{T * T * T / 3, T * T / 2}, {T * T / 2, T}}));
  EXPECT_EQ(qr.R, mat({{r1, r12}, {r12, r2}}));
}

TEST(AssembleQr, ZeroAlphaGivesZeroMatrices) {
  const NoiseCovariances qr = assemble_qr(ncv_structure(1.0), Vec::Zero(4));
  EXPECT_EQ(qr.Q, Mat::Zero(2, 2));
  EXPECT_EQ(qr.R, Mat::Zero(2, 2));
}

TEST(AssembleQr, UnknownInputExampleParameters) {
  const BenchmarkSpec spec = preset("unobs-unknown-input", 50);
  const NoiseCovariances qr = assemble_qr(spec.structure, spec.alpha_true);
  EXPECT_EQ(qr.Q, mat({{1, 1, 0}, {1, 2, 1}, {0, 1, 2}}));
  EXPECT_EQ(qr.R, mat({{2, 0, 1}, {0, 4, 1}, {1, 1, 2}}));
}

TEST(AssembleQr, LengthMismatchRejected) {
  EXPECT_THROW(assemble_qr(ncv_structure(1.0), Vec::Zero(3)), DimensionError);
}

TEST(AssembleQr, LinearInAlpha) {
  Gen g(20);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n_alpha = g.integer(1, 5);
    const NoiseStructure s = random_structure(g, g.integer(1, 4), g.integer(1, 4), n_alpha);
    const Vec a = integer_vector(g, n_alpha);
    const Vec b = integer_vector(g, n_alpha);
    const NoiseCovariances sum = assemble_qr(s, a + b);
    const NoiseCovariances qa = assemble_qr(s, a);
    const NoiseCovariances qb = assemble_qr(s, b);
    EXPECT_EQ(sum.Q, qa.Q + qb.Q);
    EXPECT_EQ(sum.R, qa.R + qb.R);
  }
}

TEST(DefiningReplication, SingleWindowHasOnlyMeasurementBlock) {
  const NoiseStructure s = ncv_structure(1.0);
  const Mat upsilon = defining_replication(s, 1);
  ASSERT_EQ(upsilon.rows(), 4);
  for (Index i = 0; i < 4; ++i) {
    EXPECT_EQ(upsilon.col(i), linalg::vec(s.br[static_cast<std::size_t>(i)]));
  }
}

TEST(DefiningReplication, ScalarTwoStepWindow) {
  const Mat upsilon = defining_replication(testing::scalar_structure(), 2);
  // blkdiag(Q, R, R) is 3x3; vec positions of the diagonal are 0, 4, 8
  Mat expected = Mat::Zero(9, 2);
  expected(0, 0) = 1;
  expected(4, 1) = 1;
  expected(8, 1) = 1;
  EXPECT_EQ(upsilon, expected);
}

TEST(DefiningReplication, UnknownInputExampleAgainstDirectAssembly) {
  const BenchmarkSpec spec = preset("unobs-unknown-input", 50);
  const NoiseCovariances qr = assemble_qr(spec.structure, spec.alpha_true);
  Mat direct = Mat::Zero(9, 9);
  direct.topLeftCorner(3, 3) = qr.Q;
  direct.block(3, 3, 3, 3) = qr.R;
  direct.block(6, 6, 3, 3) = qr.R;
  EXPECT_EQ(defining_replication(spec.structure, 2) * spec.alpha_true, linalg::vec(direct));
}

TEST(DefiningReplication, PropertyOnRandomStructures) {
  Gen g(21);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n_w = g.integer(1, 3), n_v = g.integer(1, 3), n_alpha = g.integer(1, 4);
    const Index L = g.integer(1, 4);
    const NoiseStructure s = random_structure(g, n_w, n_v, n_alpha);
    const Vec a = integer_vector(g, n_alpha);
    const NoiseCovariances qr = assemble_qr(s, a);
    const Index n_eps = (L - 1) * n_w + L * n_v;
    Mat direct = Mat::Zero(n_eps, n_eps);
    for (Index i = 0; i + 1 < L; ++i) direct.block(i * n_w, i * n_w, n_w, n_w) = qr.Q;
    for (Index i = 0; i < L; ++i) {
      const Index o = (L - 1) * n_w + i * n_v;
      direct.block(o, o, n_v, n_v) = qr.R;
    }
    EXPECT_EQ(defining_replication(s, L) * a, linalg::vec(direct));
  }
}

TEST(Validate, WellFormedPresetsAreClean) {
  for (const std::string& name : preset_names()) {
    const BenchmarkSpec spec = preset(name, 30);
    EXPECT_TRUE(validate(spec.model, spec.structure).empty()) << name;
  }
}

TEST(Validate, WrongMeasurementColumnsNamesStep) {
  BenchmarkSpec spec = preset("obs-ltv", 10);
  std::vector<Mat> h = spec.model.H.items();
  h[4] = Mat::Ones(1, 2);
  spec.model.H = StepSequence::per_step(h);
  const ValidationReport report = validate(spec.model, spec.structure);
  ASSERT_FALSE(report.empty());
  EXPECT_EQ(report.front().kind, Finding::Kind::dimension);
  EXPECT_NE(report.front().message.find("k=4"), std::string::npos);
  EXPECT_THROW(require_valid(spec.model, spec.structure), ValidationError);
}

TEST(Validate, AsymmetricBasisFlagged) {
  BenchmarkSpec spec = preset("unobs-unknown-input", 10);
  spec.structure.bq[0](0, 1) = 0.5;
  const ValidationReport report = validate(spec.model, spec.structure);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report.front().kind, Finding::Kind::asymmetric);
}

TEST(Validate, NonFiniteEntryFlagged) {
  LtvModel m = testing::scalar_model(0.5, 0, 1, 1, 1, 5);
  m.F = StepSequence::constant(scalar(std::nan("")));
  const ValidationReport report = validate(m, testing::scalar_structure());
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report.front().kind, Finding::Kind::non_finite);
}

TEST(Validate, ShortSequenceFlagged) {
  LtvModel m = testing::scalar_model(0.5, 0, 1, 1, 1, 5);
  m.H = StepSequence::per_step({scalar(1), scalar(1)});
  EXPECT_FALSE(validate(m, testing::scalar_structure()).empty());
}

TEST(Simulate, NoiseFreeTrajectoryIsDeterministicRecursion) {
  const BenchmarkSpec spec = preset("obs-ltv", 40);
  const InitialCondition init{Vec::Constant(1, 3.0), Mat::Zero(1, 1)};
  const Trajectory t = simulate(spec.model, spec.structure, Vec::Zero(2), init, std::nullopt, 5);
  double x = 3.0;
  for (Index k = 0; k <= spec.model.tau; ++k) {
    const auto s = static_cast<std::size_t>(k);
    EXPECT_EQ(t.x[s](0), x);
    EXPECT_EQ(t.z[s](0), spec.model.H.at(k)(0, 0) * x);
    x = spec.model.F.at(k)(0, 0) * x;
  }
}

TEST(Simulate, StateNoiseVarianceMatchesQ) {
  const BenchmarkSpec spec = preset("obs-ltv", 100001);
  const Trajectory t = simulate(spec.model, spec.structure, spec.alpha_true, spec.init,
                                spec.input, 11);
  const auto n = static_cast<double>(t.w.size());
  double sum = 0, sq = 0;
  for (const Vec& w : t.w) {
    sum += w(0);
    sq += w(0) * w(0);
  }
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  // var of a Gaussian sample variance is 2 sigma^4 / (n - 1)
  const double se = std::sqrt(2.0 * 4.0 / (n - 1));
  EXPECT_NEAR(var, 2.0, 3 * se);
}

TEST(Simulate, FixedSeedIsReproducible) {
  const BenchmarkSpec spec = preset("unobs-unknown-input", 60);
  const Trajectory a = simulate(spec.model, spec.structure, spec.alpha_true, spec.init, spec.input, 42);
  const Trajectory b = simulate(spec.model, spec.structure, spec.alpha_true, spec.init, spec.input, 42);
  const Trajectory c = simulate(spec.model, spec.structure, spec.alpha_true, spec.init, spec.input, 43);
  for (std::size_t k = 0; k < a.z.size(); ++k) EXPECT_EQ(a.z[k], b.z[k]);
  EXPECT_NE(a.z[5], c.z[5]);
}

TEST(Simulate, ReplayWithRetainedNoisesSatisfiesRecursions) {
  for (const std::string& name : preset_names()) {
    const BenchmarkSpec spec = preset(name, 80);
    const Trajectory t = simulate(spec.model, spec.structure, spec.alpha_true, spec.init,
                                  spec.input, 3);
    const LtvModel& m = spec.model;
    for (Index k = 0; k <= m.tau; ++k) {
      const auto s = static_cast<std::size_t>(k);
      const Vec z = m.H.at(k) * t.x[s] + m.D.at(k) * t.v[s];
      EXPECT_LE((z - t.z[s]).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + z.cwiseAbs().maxCoeff()));
      if (k == m.tau) break;
      Vec x = m.F.at(k) * t.x[s] + m.E.at(k) * t.w[s];
      if (spec.input) x += m.G.at(k) * (*spec.input)[s];
      EXPECT_LE((x - t.x[s + 1]).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + x.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Simulate, IndefiniteNoiseCovarianceRejected) {
  const BenchmarkSpec spec = preset("obs-ltv", 10);
  EXPECT_THROW(simulate(spec.model, spec.structure, (Vec(2) << -1.0, 1.0).finished(), spec.init,
                        std::nullopt, 0),
               NonPsdCovariance);
}

TEST(GaussianSampler, SemidefiniteCovarianceSupported) {
  const GaussianSampler draw(mat({{1, 1}, {1, 1}}));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const Vec x = draw(rng);
    EXPECT_NEAR(x(0), x(1), 1e-12);
  }
}

TEST(ModelIo, RoundTripPreservesModel) {
  const BenchmarkSpec spec = preset("unobs-unknown-input", 12);
  ModelSpec in{spec.model, spec.structure, spec.alpha_true, spec.init, spec.input, false};
  const ModelSpec out = parse_model_spec(dump_model_spec(in));
  EXPECT_EQ(out.model.tau, 11);
  EXPECT_FALSE(out.model.G.is_constant());
  for (Index k = 0; k <= 11; ++k) {
    EXPECT_EQ(out.model.G.at(k), spec.model.G.at(k));
    EXPECT_EQ(out.model.F.at(k), spec.model.F.at(k));
  }
  ASSERT_TRUE(out.alpha_true);
  EXPECT_EQ(*out.alpha_true, spec.alpha_true);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(out.structure.br[i], spec.structure.br[i]);
  ASSERT_TRUE(out.input);
  EXPECT_EQ((*out.input)[7], (*spec.input)[7]);
}

TEST(ModelIo, SinShorthandExpandsInput) {
  const ModelSpec m = parse_model_spec(R"({"n_x":1,"n_w":1,"n_v":1,"tau":9,
    "F":0.5,"G":1,"E":1,"H":1,"D":1,"basis":[{"BQ":1,"BR":0},{"BQ":0,"BR":1}],"u":"sin"})");
  ASSERT_TRUE(m.input);
  EXPECT_EQ(m.input->size(), 10u);
  EXPECT_DOUBLE_EQ((*m.input)[3](0), std::sin(0.3));
  EXPECT_EQ(m.init.mean, Vec::Ones(1));
}

TEST(ModelIo, MissingFieldIsValidationError) {
  EXPECT_THROW(parse_model_spec(R"({"n_x":1})"), ValidationError);
  EXPECT_THROW(parse_model_spec("not json"), ValidationError);
}

TEST(ModelIo, MeasurementsWithVaryingDimensions) {
  MeasurementData d;
  d.z = {Vec::Constant(1, 1.0), (Vec(2) << 2.0, 3.0).finished()};
  const MeasurementData back = parse_measurements(dump_measurements(d));
  ASSERT_EQ(back.z.size(), 2u);
  EXPECT_EQ(back.z[1], d.z[1]);
  EXPECT_FALSE(back.u);
}

}  // namespace
}  // namespace mdm
