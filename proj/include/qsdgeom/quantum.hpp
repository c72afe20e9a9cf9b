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

// Small-Hilbert-space substrate: states, operators, environments, density
// matrices, the Lindblad right-hand side and its RK4 integrator, and the
// Bloch-sphere parametrization of a qubit.
//
// Basis convention for qubits: index 0 is the excited state |e>, index 1 the
// ground state |g>. Hence sigma_+ = |e><g|, sigma_- = |g><e| and
// sigma_+ sigma_- = diag(1, 0).

#ifndef QSDGEOM_QUANTUM_HPP
#define QSDGEOM_QUANTUM_HPP

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <type_traits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qsdgeom/types.hpp"

namespace qsd {

// ---------------------------------------------------------------------------
// Pauli operators

template <typename Scalar = double>
Operator<Scalar> sigma_x() {
  Operator<Scalar> m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

template <typename Scalar = double>
Operator<Scalar> sigma_y() {
  const Complex<Scalar> i(0, 1);
  Operator<Scalar> m(2, 2);
  m << 0, -i, i, 0;
  return m;
}

template <typename Scalar = double>
Operator<Scalar> sigma_z() {
  Operator<Scalar> m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// |e><g|
template <typename Scalar = double>
Operator<Scalar> sigma_plus() {
  Operator<Scalar> m(2, 2);
  m << 0, 1, 0, 0;
  return m;
}

/// |g><e|
template <typename Scalar = double>
Operator<Scalar> sigma_minus() {
  Operator<Scalar> m(2, 2);
  m << 0, 0, 1, 0;
  return m;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived> &m, typename Derived::RealScalar tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() < tol;
}

// ---------------------------------------------------------------------------
// QuantumState

template <typename Scalar>
class QuantumState {
 public:
  QuantumState() = default;

  explicit QuantumState(CVector<Scalar> amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() < 2) {
      throw InvalidArgument("QuantumState: dimension must be at least 2");
    }
  }

  QuantumState(std::initializer_list<Complex<Scalar>> amps)
      : QuantumState(CVector<Scalar>(Eigen::Map<const CVector<Scalar>>(amps.begin(), static_cast<Eigen::Index>(amps.size())))) {}

  const CVector<Scalar> &amplitudes() const { return amplitudes_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  Complex<Scalar> operator[](Eigen::Index i) const { return amplitudes_[i]; }

  Scalar norm() const { return amplitudes_.norm(); }
  bool is_normalized(Scalar tol = Scalar(1e-12)) const {
    return std::abs(amplitudes_.squaredNorm() - Scalar(1)) <= tol;
  }

  QuantumState normalized() const {
    const Scalar n = norm();
    if (!(n > Scalar(0))) throw InvalidArgument("QuantumState: cannot normalize the zero vector");
    return QuantumState(amplitudes_ / n);
  }

  /// |psi><psi|
  CMatrix<Scalar> projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  CVector<Scalar> amplitudes_;
};

template <typename Scalar>
void require_normalized(const QuantumState<Scalar> &state, std::string_view who) {
  if (!state.is_normalized()) {
    throw NotNormalized(std::string(who) + ": state is not normalized (|psi|^2 = " +
                        std::to_string(state.amplitudes().squaredNorm()) + ")");
  }
}

/// <psi|op|psi>. The state must be normalized.
template <typename Scalar>
Complex<Scalar> expectation(const QuantumState<Scalar> &state, const Operator<Scalar> &op) {
  if (op.rows() != state.dim() || op.cols() != state.dim()) {
    throw DimensionMismatch("expectation: operator and state dimensions differ");
  }
  require_normalized(state, "expectation");
  return state.amplitudes().dot(op * state.amplitudes());
}

/// (<sigma_x>, <sigma_y>, <sigma_z>) of a normalized qubit state.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> bloch_vector(const QuantumState<Scalar> &state) {
  if (state.dim() != 2) throw DimensionMismatch("bloch_vector: qubit state required");
  require_normalized(state, "bloch_vector");
  const auto &c = state.amplitudes();
  const Complex<Scalar> coherence = std::conj(c[0]) * c[1];
  return {Scalar(2) * coherence.real(), Scalar(2) * coherence.imag(), std::norm(c[0]) - std::norm(c[1])};
}

// ---------------------------------------------------------------------------
// Environments

enum class EnvironmentKind { dephasing, thermal, measurement, custom };

inline std::string_view to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::dephasing:
      return "dephasing";
    case EnvironmentKind::thermal:
      return "thermal";
    case EnvironmentKind::measurement:
      return "measurement";
    case EnvironmentKind::custom:
      return "custom";
  }
  return "custom";
}

inline EnvironmentKind parse_environment_kind(std::string_view name) {
  if (name == "dephasing") return EnvironmentKind::dephasing;
  if (name == "thermal") return EnvironmentKind::thermal;
  if (name == "measurement") return EnvironmentKind::measurement;
  if (name == "custom") return EnvironmentKind::custom;
  throw InvalidArgument("unknown environment kind '" + std::string(name) + "'");
}

/// Named real coupling strengths: "mu" for dephasing/measurement, "mu1"/"mu2" for thermal.
template <typename Scalar>
using Couplings = std::map<std::string, Scalar>;

/// Hamiltonian plus Lindblad channels. Immutable once built.
template <typename Scalar>
class EnvironmentModel {
 public:
  EnvironmentModel(Operator<Scalar> hamiltonian, std::vector<Operator<Scalar>> lindblads,
                   EnvironmentKind kind = EnvironmentKind::custom, Couplings<Scalar> couplings = {})
      : hamiltonian_(std::move(hamiltonian)),
        lindblads_(std::move(lindblads)),
        kind_(kind),
        couplings_(std::move(couplings)) {
    const Eigen::Index n = hamiltonian_.rows();
    if (hamiltonian_.cols() != n) throw DimensionMismatch("EnvironmentModel: Hamiltonian is not square");
    if (n < 2) throw InvalidArgument("EnvironmentModel: dimension must be at least 2");
    for (const auto &l : lindblads_) {
      if (l.rows() != n || l.cols() != n) {
        throw DimensionMismatch("EnvironmentModel: Lindblad operator dimension differs from the Hamiltonian");
      }
    }
    if (static_cast<Eigen::Index>(lindblads_.size()) > n * n - 1) {
      throw InvalidArgument("EnvironmentModel: at most n^2 - 1 Lindblad operators are allowed");
    }
    grams_.reserve(lindblads_.size());
    for (const auto &l : lindblads_) grams_.push_back(l.adjoint() * l);
  }

  Eigen::Index dim() const { return hamiltonian_.rows(); }
  std::size_t channels() const { return lindblads_.size(); }
  const Operator<Scalar> &hamiltonian() const { return hamiltonian_; }
  const std::vector<Operator<Scalar>> &lindblads() const { return lindblads_; }
  /// L_l^dagger L_l, cached.
  const std::vector<Operator<Scalar>> &lindblad_grams() const { return grams_; }
  EnvironmentKind kind() const { return kind_; }
  const Couplings<Scalar> &couplings() const { return couplings_; }

  EnvironmentModel with_hamiltonian(Operator<Scalar> h) const {
    return EnvironmentModel(std::move(h), lindblads_, kind_, couplings_);
  }

 private:
  Operator<Scalar> hamiltonian_;
  std::vector<Operator<Scalar>> lindblads_;
  std::vector<Operator<Scalar>> grams_;
  EnvironmentKind kind_;
  Couplings<Scalar> couplings_;
};

namespace detail {

template <typename Scalar>
Scalar require_coupling(const Couplings<Scalar> &c, const std::string &key) {
  auto it = c.find(key);
  if (it == c.end()) throw InvalidArgument("make_environment: missing coupling '" + key + "'");
  if (!std::isfinite(it->second)) throw InvalidArgument("make_environment: coupling '" + key + "' is not finite");
  if (it->second < Scalar(0)) throw InvalidArgument("make_environment: coupling '" + key + "' is negative");
  return it->second;
}

template <typename Scalar>
void reject_extra_couplings(const Couplings<Scalar> &c, std::initializer_list<std::string_view> allowed) {
  for (const auto &[key, value] : c) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument("make_environment: unexpected coupling '" + key + "'");
  }
}

}  // namespace detail

/// Qubit presets: dephasing L = mu sigma_+ sigma_-, thermal L = mu1 sigma_+ + mu2 sigma_-
/// (one operator), measurement L = mu sigma_z. H defaults to zero.
template <typename Scalar = double>
EnvironmentModel<Scalar> make_environment(EnvironmentKind kind, const Couplings<Scalar> &couplings,
                                          std::optional<Operator<Scalar>> hamiltonian = std::nullopt) {
  Operator<Scalar> h = hamiltonian.value_or(Operator<Scalar>::Zero(2, 2));
  if (h.rows() != 2 || h.cols() != 2) throw DimensionMismatch("make_environment: presets are 2x2");
  switch (kind) {
    case EnvironmentKind::dephasing: {
      detail::reject_extra_couplings(couplings, {"mu"});
      const Scalar mu = detail::require_coupling(couplings, "mu");
      Operator<Scalar> l = Complex<Scalar>(mu) * (sigma_plus<Scalar>() * sigma_minus<Scalar>());
      return EnvironmentModel<Scalar>(std::move(h), {std::move(l)}, kind, couplings);
    }
    case EnvironmentKind::thermal: {
      detail::reject_extra_couplings(couplings, {"mu1", "mu2"});
      const Scalar mu1 = detail::require_coupling(couplings, "mu1");
      const Scalar mu2 = detail::require_coupling(couplings, "mu2");
      Operator<Scalar> l = Complex<Scalar>(mu1) * sigma_plus<Scalar>() + Complex<Scalar>(mu2) * sigma_minus<Scalar>();
      return EnvironmentModel<Scalar>(std::move(h), {std::move(l)}, kind, couplings);
    }
    case EnvironmentKind::measurement: {
      detail::reject_extra_couplings(couplings, {"mu"});
      const Scalar mu = detail::require_coupling(couplings, "mu");
      Operator<Scalar> l = Complex<Scalar>(mu) * sigma_z<Scalar>();
      return EnvironmentModel<Scalar>(std::move(h), {std::move(l)}, kind, couplings);
    }
    case EnvironmentKind::custom:
      break;
  }
  throw InvalidArgument("make_environment: custom environments are built with the EnvironmentModel constructor");
}

/// Convenience: the coupling record of a preset as a map.
template <typename Scalar = double>
EnvironmentModel<Scalar> make_dephasing(Scalar mu, std::optional<Operator<std::type_identity_t<Scalar>>> h = std::nullopt) {
  return make_environment<Scalar>(EnvironmentKind::dephasing, {{"mu", mu}}, std::move(h));
}

template <typename Scalar = double>
EnvironmentModel<Scalar> make_measurement(Scalar mu, std::optional<Operator<std::type_identity_t<Scalar>>> h = std::nullopt) {
  return make_environment<Scalar>(EnvironmentKind::measurement, {{"mu", mu}}, std::move(h));
}

template <typename Scalar = double>
EnvironmentModel<Scalar> make_thermal(Scalar mu1, Scalar mu2, std::optional<Operator<std::type_identity_t<Scalar>>> h = std::nullopt) {
  return make_environment<Scalar>(EnvironmentKind::thermal, {{"mu1", mu1}, {"mu2", mu2}}, std::move(h));
}

// ---------------------------------------------------------------------------
// Density matrices and the master equation

/// Empty string if rho is a valid density matrix, else a description of the first violation.
template <typename Scalar>
std::string density_violation(const CMatrix<Scalar> &rho, Scalar herm_tol = Scalar(1e-12),
                              Scalar trace_tol = Scalar(1e-10), Scalar eig_tol = Scalar(1e-10)) {
  if (rho.rows() != rho.cols()) return "not square";
  if (!rho.allFinite()) return "non-finite entries";
  const Scalar herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm >= herm_tol) return "not Hermitian (max |rho - rho^dag| = " + std::to_string(herm) + ")";
  const Scalar tr = rho.trace().real();
  if (std::abs(tr - Scalar(1)) > trace_tol) return "trace " + std::to_string(tr) + " != 1";
  const CMatrix<Scalar> h = (rho + rho.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -eig_tol) {
    return "negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff());
  }
  return {};
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
template <typename Scalar>
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix<Scalar> entries) : entries_(std::move(entries)) {
    if (auto why = density_violation(entries_); !why.empty()) {
      throw InvalidArgument("DensityMatrix: " + why);
    }
  }

  static DensityMatrix from_state(const QuantumState<Scalar> &psi) {
    require_normalized(psi, "DensityMatrix::from_state");
    return DensityMatrix(psi.projector());
  }

  static DensityMatrix maximally_mixed(Eigen::Index n) {
    return DensityMatrix(CMatrix<Scalar>::Identity(n, n) / Scalar(n));
  }

  const CMatrix<Scalar> &entries() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }
  Scalar purity() const { return (entries_ * entries_).trace().real(); }

 private:
  CMatrix<Scalar> entries_;
};

/// -i[H, rho] + sum_l (L rho L^dag - 1/2 {L^dag L, rho}).
template <typename Scalar>
CMatrix<Scalar> lindblad_rhs(const CMatrix<Scalar> &rho, const EnvironmentModel<Scalar> &model) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
    throw DimensionMismatch("lindblad_rhs: density matrix and model dimensions differ");
  }
  const Complex<Scalar> minus_i(0, -1);
  const auto &h = model.hamiltonian();
  CMatrix<Scalar> out = minus_i * (h * rho - rho * h);
  for (std::size_t l = 0; l < model.channels(); ++l) {
    const auto &op = model.lindblads()[l];
    const auto &gram = model.lindblad_grams()[l];
    out.noalias() += op * rho * op.adjoint();
    out.noalias() -= Scalar(0.5) * (gram * rho + rho * gram);
  }
  return out;
}

template <typename Scalar>
CMatrix<Scalar> lindblad_rhs(const DensityMatrix<Scalar> &rho, const EnvironmentModel<Scalar> &model) {
  return lindblad_rhs(rho.entries(), model);
}

template <typename Scalar>
struct LindbladSeries {
  std::vector<Scalar> times;
  std::vector<DensityMatrix<Scalar>> states;
  std::size_t trace_renormalizations = 0;
};

/// Classical RK4 on the master equation with a fixed step. The step is
/// shrunk uniformly so that an integer number of steps lands on t_final.
/// States are recorded every `record_stride` steps and at t_final.
template <typename Scalar>
LindbladSeries<Scalar> lindblad_evolve(const DensityMatrix<Scalar> &rho0, const EnvironmentModel<Scalar> &model,
                                       Scalar t_final, Scalar dt, std::size_t record_stride = 1) {
  if (!(dt > Scalar(0))) throw InvalidArgument("lindblad_evolve: dt must be positive");
  if (!(t_final >= Scalar(0))) throw InvalidArgument("lindblad_evolve: t_final must be non-negative");
  if (record_stride == 0) throw InvalidArgument("lindblad_evolve: record_stride must be at least 1");
  if (rho0.dim() != model.dim()) throw DimensionMismatch("lindblad_evolve: dimension mismatch");

  LindbladSeries<Scalar> series;
  series.times.push_back(Scalar(0));
  series.states.push_back(rho0);
  if (t_final == Scalar(0)) return series;

  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - Scalar(1e-9)));
  const Scalar h = t_final / static_cast<Scalar>(steps);
  CMatrix<Scalar> rho = rho0.entries();
  for (std::size_t k = 1; k <= steps; ++k) {
    const CMatrix<Scalar> k1 = lindblad_rhs(rho, model);
    const CMatrix<Scalar> k2 = lindblad_rhs<Scalar>(rho + (h / 2) * k1, model);
    const CMatrix<Scalar> k3 = lindblad_rhs<Scalar>(rho + (h / 2) * k2, model);
    const CMatrix<Scalar> k4 = lindblad_rhs<Scalar>(rho + h * k3, model);
    rho += (h / 6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);

    if (!rho.allFinite()) {
      throw IntegrationDiverged("lindblad_evolve: non-finite state at step " + std::to_string(k));
    }
    const Scalar tr = rho.trace().real();
    if (std::abs(tr - Scalar(1)) > Scalar(1e-10)) {
      if (series.trace_renormalizations == 0) {
        std::clog << "lindblad_evolve: trace drift " << (tr - 1) << " at step " << k << ", renormalizing\n";
      }
      ++series.trace_renormalizations;
      rho /= tr;
    }
    if (k % record_stride == 0 || k == steps) {
      if (auto why = density_violation<Scalar>(rho); !why.empty()) {
        throw IntegrationDiverged("lindblad_evolve: step " + std::to_string(k) + ": " + why);
      }
      series.times.push_back(h * static_cast<Scalar>(k));
      series.states.emplace_back(rho);
    }
  }
  return series;
}

// ---------------------------------------------------------------------------
// Bloch sphere

template <typename Scalar>
struct BlochPoint {
  Scalar theta = 0;  // [0, pi]
  Scalar phi = 0;    // [0, 2 pi)
};

/// (cos(theta/2), e^{i phi} sin(theta/2)). phi is ignored at the poles.
template <typename Scalar>
QuantumState<Scalar> bloch_to_state(const BlochPoint<Scalar> &point) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(point.theta >= Scalar(-1e-12) && point.theta <= pi + Scalar(1e-12))) {
    throw InvalidArgument("bloch_to_state: theta outside [0, pi]");
  }
  const Scalar theta = std::clamp(point.theta, Scalar(0), pi);
  const Scalar phi = std::sin(theta) < Scalar(1e-12) ? Scalar(0) : point.phi;
  CVector<Scalar> c(2);
  c << Complex<Scalar>(std::cos(theta / 2), 0), std::polar(std::sin(theta / 2), phi);
  return QuantumState<Scalar>(std::move(c));
}

/// Inverse of bloch_to_state after fixing the global phase so that c_0 >= 0.
/// Returns phi = 0 at the poles.
template <typename Scalar>
BlochPoint<Scalar> state_to_bloch(const QuantumState<Scalar> &state) {
  if (state.dim() != 2) throw DimensionMismatch("state_to_bloch: qubit state required");
  require_normalized(state, "state_to_bloch");
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  const auto &c = state.amplitudes();
  const Scalar r0 = std::abs(c[0]);
  const Scalar r1 = std::abs(c[1]);
  BlochPoint<Scalar> out;
  out.theta = 2 * std::atan2(r1, r0);
  if (std::sin(out.theta) < Scalar(1e-12)) {
    out.phi = 0;
    return out;
  }
  // Relative phase arg(c1) - arg(c0) is gauge invariant.
  Scalar phi = std::arg(c[1] * std::conj(c[0]));
  if (phi < 0) phi += two_pi;
  if (phi >= two_pi) phi -= two_pi;
  out.phi = phi;
  return out;
}

}  // namespace qsd

#endif  // QSDGEOM_QUANTUM_HPP
