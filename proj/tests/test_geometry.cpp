// Copyright 2026 The qsdgeom Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <numbers>

#include "qsdgeom/geometry.hpp"
#include "qsdgeom/sde.hpp"
#include "test_util.hpp"

namespace qsd {
namespace {

using namespace qsd::test;

Vec point(double theta, double phi) { return to_real(bloch_to_state(BlochPoint<double>{theta, phi})); }

Vec random_point(std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Vec x(4);
  for (auto &v : x) v = g(rng);
  return x;
}

const std::vector<EnvironmentModel<double>> &presets() {
  static const std::vector<EnvironmentModel<double>> p = {make_dephasing(0.6), make_thermal(2.0, 1.0),
                                                          make_measurement(1.0)};
  return p;
}

// --- complex diffusion matrix ---------------------------------------------

TEST(ComplexDiffusion, MatchesIndexLoop) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_state(rng, 3);
    const EnvironmentModel<double> m(CMat::Zero(3, 3), {random_matrix(rng, 3), random_matrix(rng, 3)});
    CMat want = CMat::Zero(3, 3);
    for (const auto &l : m.lindblads()) {
      C mean = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mean += std::conj(s[i]) * l(i, j) * s[j];
      CVec b(3);
      for (int i = 0; i < 3; ++i) {
        b[i] = -mean * s[i];
        for (int j = 0; j < 3; ++j) b[i] += l(i, j) * s[j];
      }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) want(i, j) += b[i] * std::conj(b[j]);
    }
    EXPECT_LT(max_abs(complex_diffusion_matrix(s, m) - want), 1e-13);
  }
}

TEST(ComplexDiffusion, SingleChannelHasRankOne) {
  std::mt19937_64 rng(2);
  const auto g = complex_diffusion_matrix(random_state(rng), make_thermal(2.0, 1.0));
  Eigen::SelfAdjointEigenSolver<CMat> es(g);
  EXPECT_LT(std::abs(es.eigenvalues()[0]), 1e-14);
  EXPECT_GT(es.eigenvalues()[1], 0.0);
}

TEST(ComplexDiffusion, VanishesOnEigenstate) {
  EXPECT_EQ(max_abs(complex_diffusion_matrix(bloch_to_state(BlochPoint<double>{0, 0}), make_measurement(1.0))), 0.0);
}

// --- real diffusion matrix ------------------------------------------------

TEST(RealDiffusion, Example) {
  CMat g(2, 2);
  g << 1, C(0, 1), C(0, -1), 1;
  Mat want(4, 4);
  want << 1, 0, 0, -1,  //
      0, 1, 1, 0,       //
      0, 1, 1, 0,       //
      -1, 0, 0, 1;
  EXPECT_EQ(real_diffusion_matrix(g), 0.5 * want);
}

TEST(RealDiffusion, Errors) {
  CMat g(2, 2);
  g << 1, 1, 0, 1;
  EXPECT_THROW(real_diffusion_matrix(g), InvalidArgument);
  EXPECT_THROW(real_diffusion_matrix(CMat(CMat::Zero(2, 3))), DimensionMismatch);
}

TEST(RealDiffusion, IsPositiveSemidefinite) {
  std::mt19937_64 rng(3);
  for (const auto &m : presets()) {
    const Mat gr = real_diffusion_matrix(complex_diffusion_matrix(random_state(rng), m));
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(gr).eigenvalues().minCoeff(), -1e-14);
  }
}

// --- metric ---------------------------------------------------------------

TEST(Metric, FlatWithoutChannels) {
  std::mt19937_64 rng(4);
  const EnvironmentModel<double> m(CMat(sigma_x()), {});
  for (int k = 0; k < 10; ++k) EXPECT_EQ(metric_at(random_point(rng), m).g, Mat(0.5 * Mat::Identity(4, 4)));
}

TEST(Metric, SdeConventionIsHalfIdentityPlusRealDiffusion) {
  std::mt19937_64 rng(5);
  for (const auto &m : presets()) {
    for (int k = 0; k < 20; ++k) {
      const auto s = random_state(rng);
      const Mat want = 0.5 * Mat::Identity(4, 4) + real_diffusion_matrix(complex_diffusion_matrix(s, m));
      EXPECT_LT(max_abs(metric_at(to_real(s), m, MetricConvention::sde_diffusion).g - want), 1e-14);
    }
  }
}

TEST(Metric, EigenstateGivesHalfIdentity) {
  const Mat half = 0.5 * Mat::Identity(4, 4);
  const auto m = make_dephasing(0.6);
  // |0> has eigenvalue mu, |1> eigenvalue 0.
  EXPECT_LT(max_abs(metric_at(point(0, 0), m, MetricConvention::sde_diffusion).g - half), 1e-15);
  EXPECT_LT(max_abs(metric_at(point(std::numbers::pi, 0), m, MetricConvention::sde_diffusion).g - half), 1e-15);
  EXPECT_LT(max_abs(metric_at(point(std::numbers::pi, 0), m).g - half), 1e-15);
  // (L + <L>) psi = 2 mu psi at |0>.
  EXPECT_GT(max_abs(metric_at(point(0, 0), m).g - half), 0.1);
}

TEST(Metric, Invariants) {
  std::mt19937_64 rng(6);
  for (auto conv : {MetricConvention::closed_form, MetricConvention::sde_diffusion}) {
    for (const auto &m : presets()) {
      for (int k = 0; k < 20; ++k) {
        const Mat g = metric_at(random_point(rng), m, conv).g;
        EXPECT_LT(max_abs(Mat(g - g.transpose())), 1e-15);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff(), 0.5 - 1e-13);
        EXPECT_EQ(g.topLeftCorner(2, 2), g.bottomRightCorner(2, 2));
        EXPECT_EQ(g.topRightCorner(2, 2), Mat(-g.bottomLeftCorner(2, 2)));
      }
    }
  }
}

TEST(Metric, ConventionNamesAndErrors) {
  EXPECT_EQ(parse_metric_convention("sde_diffusion"), MetricConvention::sde_diffusion);
  EXPECT_EQ(parse_metric_convention(to_string(MetricConvention::closed_form)), MetricConvention::closed_form);
  EXPECT_THROW(parse_metric_convention("other"), InvalidArgument);
  EXPECT_THROW(metric_at(Vec(Vec::Zero(3)), make_dephasing(0.6)), DimensionMismatch);
}

TEST(MetricNorm, Examples) {
  const double mu = 0.6;
  // Unit state with vanishing fluctuation: sqrt(1/2 * 2).
  EXPECT_NEAR(metric_norm(point(1.1, 2.0), EnvironmentModel<double>(CMat::Zero(2, 2), {})), 1.0, 1e-15);
  EXPECT_NEAR(metric_norm(point(0, 0), make_dephasing(mu), MetricConvention::sde_diffusion), 1.0, 1e-15);
  // closed_form at |0>: g11 = 1/2 + 2 mu^2, x = (sqrt2, 0, 0, 0).
  EXPECT_NEAR(metric_norm(point(0, 0), make_dephasing(mu)), std::sqrt(1 + 4 * mu * mu), 1e-14);
  EXPECT_GT(metric_norm(point(1.0, 0.3), make_dephasing(mu)), 1.0);
}

// --- closed-form qubit metrics --------------------------------------------

TEST(ClosedForm, Aux) {
  const auto a = qubit_metric_aux(Vec((Vec(4) << 1, 2, 3, 4).finished()));
  EXPECT_EQ(a.d1sq, 10);
  EXPECT_EQ(a.d2sq, 20);
  EXPECT_EQ(a.s, 14);
  EXPECT_EQ(a.a, -2);
}

TEST(ClosedForm, NorthPoleDephasing) {
  const double mu = 0.6;
  const Mat g = closed_form_qubit_metric(point(0, 0), EnvironmentKind::dephasing, {{"mu", mu}}).g;
  Mat want = 0.5 * Mat::Identity(4, 4);
  want(0, 0) = want(2, 2) = 0.5 + 2 * mu * mu;
  EXPECT_LT(max_abs(Mat(g - want)), 1e-15);
}

TEST(ClosedForm, DephasingAgreesWithGenericConstruction) {
  std::mt19937_64 rng(7);
  const auto m = make_dephasing(0.6);
  for (int k = 0; k < 100; ++k) {
    const Vec x = k % 2 ? random_point(rng) : to_real(random_state(rng));
    const Mat tab = closed_form_qubit_metric(x, EnvironmentKind::dephasing, m.couplings()).g;
    EXPECT_LT(max_abs(Mat(tab - metric_at(x, m).g)), 1e-12 * (1 + x.squaredNorm() * x.squaredNorm()));
  }
}

TEST(ClosedForm, MeasurementAgreesExceptQ1Q2Entry) {
  std::mt19937_64 rng(8);
  const auto m = make_measurement(1.0);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const Vec x = to_real(random_state(rng));
    Mat diff = closed_form_qubit_metric(x, EnvironmentKind::measurement, m.couplings()).g - metric_at(x, m).g;
    worst = std::max(worst, std::abs(diff(0, 1)));
    diff(0, 1) = diff(1, 0) = diff(2, 3) = diff(3, 2) = 0;
    EXPECT_LT(max_abs(diff), 1e-13);
  }
  // The tabulated g12 differs from the generic construction.
  EXPECT_GT(worst, 0.1);
}

TEST(ClosedForm, ThermalEvaluatesTabulatedPolynomials) {
  // x = (1, 0.5, -0.3, 0.2): d1 = 1.09, d2 = 0.29, s = 0.44, a = 0.35, mu1 = 2, mu2 = 1, evaluated by hand.
  const Vec x = (Vec(4) << 1, 0.5, -0.3, 0.2).finished();
  const Mat g = closed_form_qubit_metric(x, EnvironmentKind::thermal, {{"mu1", 2.0}, {"mu2", 1.0}}).g;
  EXPECT_NEAR(g(0, 0), 0.7520843125, 1e-14);
  EXPECT_NEAR(g(0, 1), 0.16192825, 1e-14);
  EXPECT_NEAR(g(0, 3), 0.1288065625, 1e-14);
  EXPECT_NEAR(g(1, 2), -0.1288065625, 1e-14);
  EXPECT_NEAR(g(1, 1), 1.9487735, 1e-14);
  EXPECT_EQ(g(0, 2), 0.0);
  EXPECT_EQ(g(2, 2), g(0, 0));
}

TEST(ClosedForm, ThermalTableDiffersFromGenericConstruction) {
  const auto m = make_thermal(2.0, 1.0);
  const Vec x = point(1.0, 0.3);
  const Mat diff = closed_form_qubit_metric(x, EnvironmentKind::thermal, m.couplings()).g - metric_at(x, m).g;
  EXPECT_GT(max_abs(diff), 0.1);
}

TEST(ClosedForm, Errors) {
  EXPECT_THROW(closed_form_qubit_metric(point(0, 0), EnvironmentKind::dephasing, {}), InvalidArgument);
  EXPECT_THROW(closed_form_qubit_metric(point(0, 0), EnvironmentKind::custom, {}), InvalidArgument);
  EXPECT_THROW(closed_form_qubit_metric(Vec(Vec::Zero(6)), EnvironmentKind::dephasing, {{"mu", 1.0}}),
               DimensionMismatch);
}

// --- finite differences ---------------------------------------------------

TEST(CentralDerivative, ExactForSextic) {
  auto f = [](const Vec &y) { return Vec((Vec(1) << std::pow(y[0], 6) - 3 * std::pow(y[0], 5) * y[1]).finished()); };
  const Vec x = (Vec(2) << 0.7, -1.3).finished();
  const double want = 6 * std::pow(0.7, 5) - 15 * std::pow(0.7, 4) * -1.3;
  EXPECT_NEAR(central_derivative(f, x, 0, 1e-2, 2)[0], want, 1e-11);
  EXPECT_GT(std::abs(central_derivative(f, x, 0, 1e-2, 0)[0] - want), 1e-5);
}

// --- Christoffel symbols --------------------------------------------------

TEST(Christoffel, FlatVanishes) {
  const EnvironmentModel<double> m(CMat(sigma_z()), {});
  EXPECT_LT(christoffel(point(1.0, 0.3), m).data().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Christoffel, SymmetricInLowerIndices) {
  const auto gam = christoffel(point(1.0, 0.3), make_thermal(2.0, 1.0));
  for (int k = 0; k < 4; ++k)
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) EXPECT_EQ(gam(k, m, n), gam(k, n, m));
}

TEST(Christoffel, DephasingAgainstAnalyticDerivatives) {
  const double mu = 0.6, k = mu * mu / 16;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = to_real(random_state(rng));
    const auto aux = qubit_metric_aux(x);
    const double d1 = aux.d1sq, d2 = aux.d2sq, s = aux.s, a = aux.a;
    // gradients of the invariants
    const Vec gd1 = (Vec(4) << 2 * x[0], 0, 2 * x[2], 0).finished();
    const Vec gd2 = (Vec(4) << 0, 2 * x[1], 0, 2 * x[3]).finished();
    const Vec gs = (Vec(4) << x[1], x[0], x[3], x[2]).finished();
    const Vec ga = (Vec(4) << x[3], -x[2], -x[1], x[0]).finished();
    const Vec g11 = k * (2 + d1) * (2 + 3 * d1) * gd1;
    const Vec g12 = k * d1 * (2 + d1) * gs + k * s * (2 + 2 * d1) * gd1;
    const Vec g14 = k * d1 * (2 + d1) * ga + k * a * (2 + 2 * d1) * gd1;
    const Vec g22 = 2 * k * d1 * d2 * gd1 + k * d1 * d1 * gd2;
    std::vector<Mat> dg(4, Mat::Zero(4, 4));
    for (int p = 0; p < 4; ++p) {
      Mat &d = dg[p];
      d(0, 0) = d(2, 2) = g11[p];
      d(1, 1) = d(3, 3) = g22[p];
      d(0, 1) = d(1, 0) = d(2, 3) = d(3, 2) = g12[p];
      d(0, 3) = d(3, 0) = g14[p];
      d(1, 2) = d(2, 1) = -g14[p];
    }
    const Mat ginv = metric_at(x, make_dephasing(mu)).g.inverse();
    const auto gam = christoffel(x, make_dephasing(mu));
    for (int c = 0; c < 4; ++c)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          double want = 0;
          for (int l = 0; l < 4; ++l) want += 0.5 * ginv(c, l) * (dg[m](l, n) + dg[n](l, m) - dg[l](m, n));
          EXPECT_NEAR(gam(c, m, n), want, 1e-10);
        }
  }
}

// --- curvature ------------------------------------------------------------

TEST(Curvature, FlatVanishes) {
  const auto b = curvature_bundle(point(0.7, 1.2), EnvironmentModel<double>(CMat(sigma_y()), {}));
  EXPECT_LT(b.riemann.data().cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(std::abs(b.scalar), 1e-8);
}

TEST(Curvature, RiemannSymmetries) {
  for (const auto &model : presets()) {
    const Vec x = point(1.0, 0.3);
    const auto b = curvature_bundle(x, model);
    const Mat g = metric_at(x, model).g;
    const auto &r = b.riemann;
    const double scale = 1 + r.data().cwiseAbs().maxCoeff();
    auto lowered = [&](int k, int l, int m, int n) {
      double v = 0;
      for (int a = 0; a < 4; ++a) v += g(k, a) * r(a, l, m, n);
      return v;
    };
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l)
        for (int m = 0; m < 4; ++m)
          for (int n = 0; n < 4; ++n) {
            EXPECT_NEAR(r(k, l, m, n), -r(k, l, n, m), 1e-12 * scale);
            EXPECT_NEAR(r(k, l, m, n) + r(k, m, n, l) + r(k, n, l, m), 0, 1e-6 * scale);
            EXPECT_NEAR(lowered(k, l, m, n), -lowered(l, k, m, n), 1e-6 * scale);
            EXPECT_NEAR(lowered(k, l, m, n), lowered(m, n, k, l), 1e-6 * scale);
          }
  }
}

TEST(Curvature, RicciIsSymmetric) {
  const auto b = curvature_bundle(point(2.2, 4.0), make_measurement(1.0));
  EXPECT_LT(max_abs(Mat(b.ricci - b.ricci.transpose())), 1e-6);
}

TEST(Curvature, MetricCompatibility) {
  const auto model = make_thermal(1.6, 0.8);
  const Vec x = point(0.4, 5.0);
  const MetricField<double> field(model);
  const auto gam = christoffel(x, model);
  const Mat g = field(x);
  for (int m = 0; m < 4; ++m) {
    const Mat dg = central_derivative(field, x, m, 1e-2, 2);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double conn = 0;
        for (int c = 0; c < 4; ++c) conn += gam(c, m, a) * g(c, b) + gam(c, m, b) * g(a, c);
        EXPECT_NEAR(dg(a, b), conn, 1e-10);
      }
  }
}

TEST(Curvature, InvariantUnderGlobalPhase) {
  std::mt19937_64 rng(10);
  for (const auto &model : presets()) {
    const auto s = random_state(rng);
    const double r0 = scalar_curvature(to_real(s), model);
    const double r1 = scalar_curvature(to_real(QuantumState<double>(std::polar(1.0, 0.9) * s.amplitudes())), model);
    EXPECT_NEAR(r0, r1, 1e-7 * (1 + std::abs(r0)));
  }
}

TEST(Curvature, ConformallyFlatOracle) {
  // g = exp(2 f) I in N = 4: R = -exp(-2 f) (6 lap f + 6 |grad f|^2).
  auto f = [](const Vec &y) { return 0.1 * y.squaredNorm() + 0.05 * y[0] * y[1] + 0.03 * y[3]; };
  auto field = [&](const Vec &y) { return Mat(std::exp(2 * f(y)) * Mat::Identity(4, 4)); };
  const Vec x = (Vec(4) << 0.3, -0.7, 1.1, 0.2).finished();
  const Vec grad = (Vec(4) << 0.2 * x[0] + 0.05 * x[1], 0.2 * x[1] + 0.05 * x[0], 0.2 * x[2], 0.2 * x[3] + 0.03)
                       .finished();
  const double lap = 0.8;
  const double want = -std::exp(-2 * f(x)) * (6 * lap + 6 * grad.squaredNorm());
  EXPECT_NEAR(curvature_of(field, x).scalar, want, 1e-6);
}

TEST(Curvature, RoundSphereOracle) {
  // Stereographic chart of the unit 4-sphere: g = 4 / (1 + |y|^2)^2 I, R = N (N - 1) = 12.
  auto field = [](const Vec &y) { return Mat(4 / std::pow(1 + y.squaredNorm(), 2) * Mat::Identity(4, 4)); };
  EXPECT_NEAR(curvature_of(field, Vec((Vec(4) << 0.2, -0.4, 0.1, 0.5).finished())).scalar, 12.0, 1e-6);
}

struct Frozen {
  EnvironmentKind kind;
  double mu1, mu2, theta, phi;
  double closed_form, sde_diffusion;
};

// Forward-mode autodiff values from tests/oracles/autodiff_curvature.py.
const Frozen kFrozen[] = {
    {EnvironmentKind::dephasing, 0.3, 0, 0.0, 0.0, -0.3444107469977612, -0.35999999999999976},
    {EnvironmentKind::dephasing, 0.3, 0, 1.0, 0.3, -1.1188859521339567, -0.6056862006920845},
    {EnvironmentKind::dephasing, 0.6, 0, 0.0, 0.0, 2.8167806115930394, -1.439999999999999},
    {EnvironmentKind::dephasing, 0.6, 0, 1.0, 0.3, 0.6249659787849128, -2.3206369889630696},
    {EnvironmentKind::measurement, 1.0, 0, 1.0, 0.3, 0.04501229961789947, -11.135907352530335},
    {EnvironmentKind::measurement, 1.0, 0, 2.2, 4.0, 1.3407399841233478, -10.560494710345123},
    {EnvironmentKind::thermal, 2.0, 1.0, 1.0, 0.3, 3.9588458534022597, -8.429905480751161},
    {EnvironmentKind::thermal, 1.6, 0.8, 0.4, 5.0, -35.46375526968307, -10.95792911573724},
};

TEST(Curvature, MatchesAutodiffReference) {
  for (const auto &c : kFrozen) {
    const auto model = c.kind == EnvironmentKind::dephasing     ? make_dephasing(c.mu1)
                       : c.kind == EnvironmentKind::measurement ? make_measurement(c.mu1)
                                                                : make_thermal(c.mu1, c.mu2);
    const Vec x = point(c.theta, c.phi);
    GeometryOptions opts;
    EXPECT_NEAR(scalar_curvature(x, model, opts), c.closed_form, 1e-8 * (1 + std::abs(c.closed_form)));
    opts.metric = MetricConvention::sde_diffusion;
    EXPECT_NEAR(scalar_curvature(x, model, opts), c.sde_diffusion, 1e-8 * (1 + std::abs(c.sde_diffusion)));
  }
}

TEST(Curvature, AccessorsAgree) {
  const auto model = make_dephasing(0.6);
  const Vec x = point(1.0, 0.3);
  const auto b = curvature_bundle(x, model);
  EXPECT_EQ(ricci_scalar(x, model).scalar, b.scalar);
  EXPECT_EQ(ricci_scalar(x, model).ricci, b.ricci);
  EXPECT_EQ(riemann(x, model).data(), b.riemann.data());
  EXPECT_EQ(b.point, x);
  EXPECT_THROW(curvature_bundle(Vec(Vec::Zero(6)), model), DimensionMismatch);
}

}  // namespace
}  // namespace qsd
