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

#include "qsdgeom/quantum.hpp"
#include "test_util.hpp"

namespace qsd {
namespace {

using namespace qsd::test;
constexpr double pi = std::numbers::pi;

QuantumState<double> at(double theta, double phi) { return bloch_to_state(BlochPoint<double>{theta, phi}); }

CMat pure(const QuantumState<double> &s) { return s.projector(); }

EnvironmentModel<double> random_model(std::mt19937_64 &rng, Eigen::Index n, int channels) {
  std::vector<Operator<double>> ls;
  for (int k = 0; k < channels; ++k) ls.push_back(random_matrix(rng, n));
  return EnvironmentModel<double>(random_hermitian(rng, n), ls);
}

// --- expectation ----------------------------------------------------------

TEST(Expectation, NorthPoleSigmaZ) { EXPECT_NEAR(expectation(at(0, 0), sigma_z()).real(), 1.0, 1e-15); }

TEST(Expectation, EquatorSigmaX) {
  const C v = expectation(at(pi / 2, 0), sigma_x());
  EXPECT_NEAR(v.real(), 1.0, 1e-15);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(Expectation, EquatorSigmaZVanishes) { EXPECT_NEAR(std::abs(expectation(at(pi / 2, pi / 2), sigma_z())), 0, 1e-15); }

TEST(Expectation, HermitianGivesRealValue) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const auto s = random_state(rng, 4);
    EXPECT_LT(std::abs(expectation(s, random_hermitian(rng, 4)).imag()), 1e-12);
  }
}

TEST(Expectation, Errors) {
  EXPECT_THROW(expectation(at(0, 0), CMat(CMat::Identity(3, 3))), DimensionMismatch);
  EXPECT_THROW(expectation(QuantumState<double>({C(1), C(1)}), sigma_z()), NotNormalized);
}

TEST(Operators, HermitianQuery) {
  EXPECT_TRUE(is_hermitian(sigma_y()));
  EXPECT_FALSE(is_hermitian(sigma_plus()));
  CMat m = sigma_x();
  m(0, 1) += 2e-12;
  EXPECT_FALSE(is_hermitian(m));
  m(0, 1) = 1.0 + 5e-13;
  EXPECT_TRUE(is_hermitian(m));
}

TEST(Operators, LadderConvention) {
  // index 0 = excited state
  EXPECT_EQ(max_abs(CMat(sigma_plus() * sigma_minus()) - CMat(Eigen::Vector2cd(1, 0).asDiagonal())), 0.0);
  EXPECT_EQ(max_abs(CMat(sigma_plus() - (sigma_x() + C(0, 1) * sigma_y()) / 2.0)), 0.0);
}

TEST(QuantumState, RejectsTooSmall) { EXPECT_THROW(QuantumState<double>(CVec(1)), InvalidArgument); }

// --- lindblad_rhs ---------------------------------------------------------

TEST(LindbladRhs, ExcitedStateUnderDephasingIsStationary) {
  EXPECT_EQ(max_abs(lindblad_rhs(pure(at(0, 0)), make_dephasing(0.6))), 0.0);
}

TEST(LindbladRhs, MaximallyMixedUnderMeasurementIsStationary) {
  EXPECT_LT(max_abs(lindblad_rhs(DensityMatrix<double>::maximally_mixed(2), make_measurement(1.0))), 1e-15);
}

TEST(LindbladRhs, DephasingCoherenceDecay) {
  // Hand expansion for L = mu diag(1, 0): d rho01 / dt = -(mu^2 / 2) rho01, populations fixed.
  const double mu = 0.6;
  const CMat rho = pure(plus_state());
  const CMat d = lindblad_rhs(rho, make_dephasing(mu));
  EXPECT_NEAR(std::abs(d(0, 1) - (-mu * mu / 2) * rho(0, 1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(d(0, 0)), 0, 1e-15);
  EXPECT_NEAR(std::abs(d(1, 1)), 0, 1e-15);
}

TEST(LindbladRhs, MatchesSuperoperator) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto m = random_model(rng, 3, 2);
    const CMat rho = pure(random_state(rng, 3));
    const CMat d = lindblad_rhs(rho, m);
    const CVec vec = superoperator(m) * Eigen::Map<const CVec>(rho.data(), 9);
    EXPECT_LT(max_abs(CMat(d - Eigen::Map<const CMat>(vec.data(), 3, 3))), 1e-12);
  }
}

TEST(LindbladRhs, HermitianAndTraceless) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = 2 + k % 3;
    const auto m = random_model(rng, n, 1 + k % 3);
    const CMat d = lindblad_rhs(pure(random_state(rng, n)), m);
    EXPECT_LT(max_abs(CMat(d - d.adjoint())), 1e-12);
    EXPECT_LT(std::abs(d.trace()), 1e-12);
  }
}

TEST(LindbladRhs, DimensionMismatch) {
  EXPECT_THROW(lindblad_rhs(CMat(CMat::Identity(3, 3) / 3.0), make_dephasing(0.6)), DimensionMismatch);
}

// --- lindblad_evolve ------------------------------------------------------

TEST(LindbladEvolve, ZeroTimeReturnsInitialState) {
  const auto rho0 = DensityMatrix<double>::from_state(plus_state());
  const auto s = lindblad_evolve(rho0, make_thermal(2.0, 1.0), 0.0, 1e-3);
  ASSERT_EQ(s.states.size(), 1u);
  EXPECT_EQ(max_abs(CMat(s.states[0].entries() - rho0.entries())), 0.0);
}

TEST(LindbladEvolve, DephasingAnalyticSolution) {
  const double mu = 0.6;
  const auto s = lindblad_evolve(DensityMatrix<double>::from_state(plus_state()), make_dephasing(mu), 2.0, 1e-4, 100);
  for (std::size_t k = 0; k < s.states.size(); ++k) {
    EXPECT_NEAR(std::abs(s.states[k].entries()(0, 1)), 0.5 * std::exp(-mu * mu * s.times[k] / 2), 1e-8);
  }
  EXPECT_NEAR(s.times.back(), 2.0, 1e-12);
}

TEST(LindbladEvolve, ThermalFixedPointIsSuperoperatorNullVector) {
  const auto m = make_thermal(2.0, 1.0);
  const CMat fixed = stationary_state(m);
  for (const auto &psi0 : {at(0, 0), at(pi, 0), plus_state()}) {
    const auto s = lindblad_evolve(DensityMatrix<double>::from_state(psi0), m, 60.0, 1e-3, 60000);
    EXPECT_LT(max_abs(CMat(s.states.back().entries() - fixed)), 1e-9);
  }
}

TEST(LindbladEvolve, PurityNeverExceedsOne) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const auto m = random_model(rng, 2, 2);
    const auto s = lindblad_evolve(DensityMatrix<double>::from_state(random_state(rng)), m, 1.0, 1e-3, 10);
    for (const auto &rho : s.states) EXPECT_LE(rho.purity(), 1 + 1e-9);
  }
}

TEST(LindbladEvolve, RecordsStrideAndFinalTime) {
  const auto s = lindblad_evolve(DensityMatrix<double>::from_state(plus_state()), make_dephasing(0.6), 1.0, 0.03, 5);
  // 34 steps of 1/34: records at 5, 10, ..., 30 and 34
  EXPECT_EQ(s.states.size(), 1u + 6u + 1u);
  EXPECT_NEAR(s.times.back(), 1.0, 1e-12);
}

TEST(LindbladEvolve, RejectsBadArguments) {
  const auto rho0 = DensityMatrix<double>::from_state(plus_state());
  EXPECT_THROW(lindblad_evolve(rho0, make_dephasing(0.6), 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(lindblad_evolve(rho0, make_dephasing(0.6), -1.0, 1e-3), InvalidArgument);
}

TEST(LindbladEvolve, DivergenceIsReported) {
  // A strongly anti-Hermitian Hamiltonian at a huge step breaks positivity.
  const EnvironmentModel<double> m(CMat(C(0, -50) * sigma_y()), {});
  EXPECT_THROW(lindblad_evolve(DensityMatrix<double>::from_state(plus_state()), m, 1.0, 0.5), IntegrationDiverged);
}

TEST(DensityMatrix, Invariants) {
  CMat bad = CMat::Identity(2, 2);
  EXPECT_THROW(DensityMatrix<double>{bad}, InvalidArgument);  // trace 2
  bad << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix<double>{bad}, InvalidArgument);  // negative eigenvalue
  bad << 0.5, C(0, 0.1), C(0, 0.1), 0.5;
  EXPECT_THROW(DensityMatrix<double>{bad}, InvalidArgument);  // not Hermitian
  EXPECT_NO_THROW(DensityMatrix<double>::maximally_mixed(4));
}

// --- environments ---------------------------------------------------------

TEST(Environment, DephasingPreset) {
  const auto m = make_dephasing(0.6);
  CMat expected = CMat::Zero(2, 2);
  expected(0, 0) = 0.6;
  ASSERT_EQ(m.channels(), 1u);
  EXPECT_EQ(max_abs(CMat(m.lindblads()[0] - expected)), 0.0);
  EXPECT_EQ(max_abs(m.hamiltonian()), 0.0);
  EXPECT_EQ(m.kind(), EnvironmentKind::dephasing);
}

TEST(Environment, MeasurementPreset) {
  const auto m = make_measurement(1.0);
  EXPECT_EQ(max_abs(CMat(m.lindblads()[0] - CMat(Eigen::Vector2cd(1, -1).asDiagonal()))), 0.0);
}

TEST(Environment, ThermalPresetIsOneOperator) {
  const auto m = make_thermal(2.0, 1.0);
  ASSERT_EQ(m.channels(), 1u);
  CMat expected(2, 2);
  expected << 0, 2, 1, 0;
  EXPECT_EQ(max_abs(CMat(m.lindblads()[0] - expected)), 0.0);
  EXPECT_EQ(max_abs(make_thermal(0.0, 0.0).lindblads()[0]), 0.0);
}

TEST(Environment, SuppliedHamiltonian) {
  const auto m = make_dephasing(0.5, CMat(0.01 * sigma_x()));
  EXPECT_EQ(max_abs(CMat(m.hamiltonian() - 0.01 * sigma_x())), 0.0);
}

TEST(Environment, Errors) {
  EXPECT_THROW(make_dephasing(-0.1), InvalidArgument);
  EXPECT_THROW(make_thermal(1.0, -1.0), InvalidArgument);
  EXPECT_THROW(make_environment<double>(EnvironmentKind::dephasing, {}), InvalidArgument);
  EXPECT_THROW(make_environment<double>(EnvironmentKind::dephasing, {{"mu", 1.0}, {"mu2", 1.0}}), InvalidArgument);
  EXPECT_THROW(make_environment<double>(EnvironmentKind::custom, {}), InvalidArgument);
  EXPECT_THROW(make_dephasing(std::nan("")), InvalidArgument);
  EXPECT_THROW(make_dephasing(1.0, CMat(CMat::Zero(3, 3))), DimensionMismatch);
}

TEST(Environment, ChannelLimit) {
  std::vector<Operator<double>> four(4, sigma_z());
  EXPECT_THROW(EnvironmentModel<double>(CMat::Zero(2, 2), four), InvalidArgument);
  four.pop_back();
  EXPECT_NO_THROW(EnvironmentModel<double>(CMat::Zero(2, 2), four));
  EXPECT_THROW(EnvironmentModel<double>(CMat::Zero(2, 2), {CMat(CMat::Zero(3, 3))}), DimensionMismatch);
}

TEST(Environment, KindNames) {
  for (auto k : {EnvironmentKind::dephasing, EnvironmentKind::thermal, EnvironmentKind::measurement,
                 EnvironmentKind::custom}) {
    EXPECT_EQ(parse_environment_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_environment_kind("bath"), InvalidArgument);
}

// --- Bloch sphere ---------------------------------------------------------

TEST(Bloch, NorthPole) {
  for (double phi : {0.0, 1.0, 5.0}) {
    const auto s = at(0, phi);
    EXPECT_EQ(s[0], C(1));
    EXPECT_EQ(s[1], C(0));
  }
}

TEST(Bloch, EquatorExpectations) {
  const auto v = bloch_vector(at(pi / 2, 0));
  EXPECT_NEAR(v[0], 1, 1e-15);
  EXPECT_NEAR(v[1], 0, 1e-15);
  EXPECT_NEAR(v[2], 0, 1e-15);
}

TEST(Bloch, ExpectationsOnGrid) {
  double worst = 0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      const double th = pi * i / 63, ph = 2 * pi * j / 64;
      const auto s = at(th, ph);
      const double ex = std::sin(th) * std::cos(ph), ey = std::sin(th) * std::sin(ph), ez = std::cos(th);
      worst = std::max({worst, std::abs(expectation(s, sigma_x()) - ex), std::abs(expectation(s, sigma_y()) - ey),
                        std::abs(expectation(s, sigma_z()) - ez)});
    }
  EXPECT_LT(worst, 1e-12);
}

TEST(Bloch, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(1e-6, pi - 1e-6), ph(0, 2 * pi);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const BlochPoint<double> p{th(rng), ph(rng)};
    const auto q = state_to_bloch(at(p.theta, p.phi));
    double dphi = std::abs(q.phi - p.phi);
    dphi = std::min(dphi, 2 * pi - dphi);
    worst = std::max({worst, std::abs(q.theta - p.theta), dphi});
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Bloch, GaugeFixing) {
  const auto s = at(1.1, 2.3);
  const QuantumState<double> rotated(CVec(std::polar(1.0, 0.7) * s.amplitudes()));
  const auto p = state_to_bloch(rotated);
  EXPECT_NEAR(p.theta, 1.1, 1e-14);
  EXPECT_NEAR(p.phi, 2.3, 1e-14);
}

TEST(Bloch, PolesReportZeroPhi) {
  EXPECT_EQ(state_to_bloch(QuantumState<double>({C(0), C(0, 1)})).phi, 0.0);
  EXPECT_NEAR(state_to_bloch(QuantumState<double>({C(0), C(0, 1)})).theta, pi, 1e-15);
  EXPECT_EQ(state_to_bloch(QuantumState<double>({C(0, 1), C(0)})).phi, 0.0);
}

TEST(Bloch, Errors) {
  EXPECT_THROW(state_to_bloch(QuantumState<double>({C(1), C(1)})), NotNormalized);
  EXPECT_THROW(bloch_to_state(BlochPoint<double>{4.0, 0}), InvalidArgument);
  std::mt19937_64 rng(1);
  EXPECT_THROW(state_to_bloch(random_state(rng, 3)), DimensionMismatch);
}

}  // namespace
}  // namespace qsd
