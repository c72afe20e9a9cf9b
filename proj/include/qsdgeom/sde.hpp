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

// Quantum state diffusion:
//
//   d psi = f(psi) dt + sum_l (L_l - <L_l>) psi dW_l,
//   E[dW_l dW_l'*] = delta_ll' dt,  E[dW_l dW_l'] = 0,
//
// integrated with Euler-Maruyama, plus the real 2n-dimensional form of the
// same equation and the gradient form available for a Hermitian channel.

#ifndef QSDGEOM_SDE_HPP
#define QSDGEOM_SDE_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qsdgeom/parallel.hpp"
#include "qsdgeom/quantum.hpp"
#include "qsdgeom/types.hpp"

namespace qsd {

/// Drift normalization. `gisin_percival` uses the half factors that make the
/// ensemble of projectors obey the Lindblad equation; `doubled` keeps the
/// bracket 2<L^dag>L - L^dag L - <L^dag><L> with unit coefficients.
enum class DriftConvention { gisin_percival, doubled };

inline std::string_view to_string(DriftConvention c) {
  return c == DriftConvention::gisin_percival ? "gisin_percival" : "doubled";
}

inline DriftConvention parse_drift_convention(std::string_view name) {
  if (name == "gisin_percival") return DriftConvention::gisin_percival;
  if (name == "doubled") return DriftConvention::doubled;
  throw InvalidArgument("unknown drift convention '" + std::string(name) + "'");
}

template <typename Scalar>
constexpr Scalar dissipative_weight(DriftConvention c) {
  return c == DriftConvention::gisin_percival ? Scalar(0.5) : Scalar(1);
}

// ---------------------------------------------------------------------------
// Random numbers

/// Deterministic normal-variate stream. Stream (seed, substream) is seeded
/// from a SplitMix64 hash of both words, so trajectory k of an ensemble gets
/// the same numbers regardless of scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t substream = 0) : engine_(mix(seed, substream)) {}

  double normal() { return normal_(engine_); }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t substream) {
    return splitmix(splitmix(seed) ^ (substream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// m complex Wiener increments: (g_R + i g_I) sqrt(dt / 2) with g standard normal.
template <typename Scalar = double>
CVector<Scalar> sample_wiener(std::size_t m, Scalar dt, RandomStream &stream) {
  if (!(dt > Scalar(0))) throw InvalidArgument("sample_wiener: dt must be positive");
  const Scalar scale = std::sqrt(dt / Scalar(2));
  CVector<Scalar> dw(static_cast<Eigen::Index>(m));
  for (auto &w : dw) {
    const Scalar re = static_cast<Scalar>(stream.normal());
    const Scalar im = static_cast<Scalar>(stream.normal());
    w = Complex<Scalar>(re * scale, im * scale);
  }
  return dw;
}

// ---------------------------------------------------------------------------
// Drift and diffusion

namespace detail {

// Expectation normalized by psi^dag psi, so unnormalized iterates are handled.
template <typename Scalar>
Complex<Scalar> normalized_expectation(const CVector<Scalar> &psi, const CVector<Scalar> &op_psi) {
  return psi.dot(op_psi) / psi.squaredNorm();
}

template <typename Scalar>
CVector<Scalar> drift_of(const CVector<Scalar> &psi, const EnvironmentModel<Scalar> &model, DriftConvention conv) {
  const Scalar k = dissipative_weight<Scalar>(conv);
  CVector<Scalar> f = Complex<Scalar>(0, -1) * (model.hamiltonian() * psi);
  for (std::size_t l = 0; l < model.channels(); ++l) {
    const CVector<Scalar> lpsi = model.lindblads()[l] * psi;
    const Complex<Scalar> mean = normalized_expectation(psi, lpsi);
    f += (Scalar(2) * k * std::conj(mean)) * lpsi;
    f -= k * (model.lindblad_grams()[l] * psi);
    f -= (k * std::norm(mean)) * psi;
  }
  return f;
}

template <typename Scalar>
CMatrix<Scalar> diffusion_of(const CVector<Scalar> &psi, const EnvironmentModel<Scalar> &model) {
  CMatrix<Scalar> b(psi.size(), static_cast<Eigen::Index>(model.channels()));
  for (std::size_t l = 0; l < model.channels(); ++l) {
    const CVector<Scalar> lpsi = model.lindblads()[l] * psi;
    b.col(static_cast<Eigen::Index>(l)) = lpsi - normalized_expectation(psi, lpsi) * psi;
  }
  return b;
}

template <typename Scalar>
void require_dims(const QuantumState<Scalar> &s, const EnvironmentModel<Scalar> &m, std::string_view who) {
  if (s.dim() != m.dim()) throw DimensionMismatch(std::string(who) + ": state and model dimensions differ");
}

}  // namespace detail

/// -iH psi + sum_l k (2 <L^dag> L - L^dag L - <L^dag><L>) psi with k = 1/2
/// (gisin_percival) or 1 (doubled).
template <typename Scalar>
CVector<Scalar> drift(const QuantumState<Scalar> &state, const EnvironmentModel<Scalar> &model,
                      DriftConvention conv = DriftConvention::gisin_percival) {
  detail::require_dims(state, model, "drift");
  require_normalized(state, "drift");
  return detail::drift_of(state.amplitudes(), model, conv);
}

/// n x m matrix whose column l is (L_l - <L_l>) psi.
template <typename Scalar>
CMatrix<Scalar> diffusion_columns(const QuantumState<Scalar> &state, const EnvironmentModel<Scalar> &model) {
  detail::require_dims(state, model, "diffusion_columns");
  require_normalized(state, "diffusion_columns");
  return detail::diffusion_of(state.amplitudes(), model);
}

// ---------------------------------------------------------------------------
// Euler-Maruyama

struct SdeConfig {
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::uint64_t seed = 20260101;
  bool renormalize_each_step = true;
  std::size_t record_stride = 1;
  DriftConvention convention = DriftConvention::gisin_percival;

  void validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("SdeConfig: dt must be positive");
    if (steps < 1) throw InvalidArgument("SdeConfig: steps must be at least 1");
    if (record_stride < 1) throw InvalidArgument("SdeConfig: record_stride must be at least 1");
  }
};

/// One step psi + f dt + B dW with the supplied noise.
template <typename Scalar>
QuantumState<Scalar> em_step_with_noise(const QuantumState<Scalar> &state, const EnvironmentModel<Scalar> &model,
                                        Scalar dt, const CVector<Scalar> &dw, DriftConvention conv,
                                        bool renormalize = true) {
  detail::require_dims(state, model, "em_step");
  if (dw.size() != static_cast<Eigen::Index>(model.channels())) {
    throw DimensionMismatch("em_step: noise length differs from the channel count");
  }
  const auto &psi = state.amplitudes();
  CVector<Scalar> next = psi + dt * detail::drift_of(psi, model, conv);
  if (model.channels() > 0) next.noalias() += detail::diffusion_of(psi, model) * dw;
  const Scalar norm = next.norm();
  if (!(norm >= Scalar(1e-8))) throw StepFailure("em_step: norm underflow", 0);
  if (renormalize) next /= norm;
  return QuantumState<Scalar>(std::move(next));
}

template <typename Scalar>
QuantumState<Scalar> em_step(const QuantumState<Scalar> &state, const EnvironmentModel<Scalar> &model, Scalar dt,
                             RandomStream &stream, DriftConvention conv = DriftConvention::gisin_percival,
                             bool renormalize = true) {
  if (!(dt > Scalar(0))) throw InvalidArgument("em_step: dt must be positive");
  const CVector<Scalar> dw = sample_wiener<Scalar>(model.channels(), dt, stream);
  return em_step_with_noise(state, model, dt, dw, conv, renormalize);
}

template <typename Scalar>
struct TrajectoryRecord {
  std::vector<Scalar> times;
  std::vector<QuantumState<Scalar>> states;
  std::vector<Scalar> norms;
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
};

/// Iterates em_step `config.steps` times with stream (config.seed, trajectory)
/// and records every `record_stride`-th state, starting with the initial one.
template <typename Scalar>
TrajectoryRecord<Scalar> simulate_trajectory(const QuantumState<Scalar> &state0, const EnvironmentModel<Scalar> &model,
                                             const SdeConfig &config, std::uint64_t trajectory = 0) {
  config.validate();
  detail::require_dims(state0, model, "simulate_trajectory");
  require_normalized(state0, "simulate_trajectory");
  const Scalar dt = static_cast<Scalar>(config.dt);

  TrajectoryRecord<Scalar> rec;
  rec.seed = config.seed;
  rec.substream = trajectory;
  const std::size_t n_records = config.steps / config.record_stride + 1;
  rec.times.reserve(n_records);
  rec.states.reserve(n_records);
  rec.norms.reserve(n_records);
  auto record = [&](std::size_t step, const QuantumState<Scalar> &s) {
    rec.times.push_back(dt * static_cast<Scalar>(step));
    rec.states.push_back(s);
    rec.norms.push_back(s.norm());
  };

  RandomStream stream(config.seed, trajectory);
  QuantumState<Scalar> psi = state0;
  record(0, psi);
  for (std::size_t step = 1; step <= config.steps; ++step) {
    try {
      psi = em_step(psi, model, dt, stream, config.convention, config.renormalize_each_step);
    } catch (const StepFailure &e) {
      throw StepFailure("simulate_trajectory: norm underflow at step " + std::to_string(step), step);
    }
    if (step % config.record_stride == 0) record(step, psi);
  }
  return rec;
}

template <typename Scalar>
struct EnsembleDensity {
  std::vector<Scalar> times;
  std::vector<CMatrix<Scalar>> rho;
  /// Standard error of the mean per entry: real part holds SE(Re), imaginary part SE(Im).
  std::vector<CMatrix<Scalar>> stderr;
  std::size_t n_traj = 0;
};

/// E[|psi(t)><psi(t)|] over trajectories 0..n_traj-1 on the recording grid.
/// Trajectories are summed in fixed blocks merged in index order, so the
/// result does not depend on the thread count.
template <typename Scalar>
EnsembleDensity<Scalar> ensemble_density(const QuantumState<Scalar> &state0, const EnvironmentModel<Scalar> &model,
                                         const SdeConfig &config, std::size_t n_traj, unsigned threads = 0) {
  if (n_traj < 1) throw InvalidArgument("ensemble_density: n_traj must be at least 1");
  config.validate();
  detail::require_dims(state0, model, "ensemble_density");
  require_normalized(state0, "ensemble_density");

  constexpr std::size_t block = 64;
  const std::size_t n_blocks = (n_traj + block - 1) / block;
  const std::size_t n_times = config.steps / config.record_stride + 1;
  const Eigen::Index n = model.dim();

  struct Partial {
    std::vector<CMatrix<Scalar>> sum;
    std::vector<CMatrix<Scalar>> sum_sq;  // (Re^2, Im^2) packed as complex
    std::vector<Scalar> times;
    std::vector<std::size_t> failed;
  };

  auto partials = parallel_map(n_blocks, threads, [&](std::size_t b) {
    Partial p;
    p.sum.assign(n_times, CMatrix<Scalar>::Zero(n, n));
    p.sum_sq.assign(n_times, CMatrix<Scalar>::Zero(n, n));
    const std::size_t end = std::min(n_traj, (b + 1) * block);
    for (std::size_t k = b * block; k < end; ++k) {
      try {
        const auto rec = simulate_trajectory(state0, model, config, k);
        if (p.times.empty()) p.times = rec.times;
        for (std::size_t t = 0; t < n_times; ++t) {
          const CMatrix<Scalar> proj = rec.states[t].normalized().projector();
          p.sum[t] += proj;
          p.sum_sq[t] += proj.unaryExpr([](const Complex<Scalar> &z) {
            return Complex<Scalar>(z.real() * z.real(), z.imag() * z.imag());
          });
        }
      } catch (const StepFailure &) {
        p.failed.push_back(k);
      }
    }
    return p;
  });

  EnsembleDensity<Scalar> out;
  out.n_traj = n_traj;
  std::vector<std::size_t> failed;
  std::vector<CMatrix<Scalar>> sum(n_times, CMatrix<Scalar>::Zero(n, n));
  std::vector<CMatrix<Scalar>> sum_sq(n_times, CMatrix<Scalar>::Zero(n, n));
  for (auto &p : partials) {
    failed.insert(failed.end(), p.failed.begin(), p.failed.end());
    if (out.times.empty() && !p.times.empty()) out.times = p.times;
    for (std::size_t t = 0; t < n_times; ++t) {
      sum[t] += p.sum[t];
      sum_sq[t] += p.sum_sq[t];
    }
  }
  if (!failed.empty()) {
    throw EnsembleFailure("ensemble_density: " + std::to_string(failed.size()) + " trajectories failed",
                          std::move(failed));
  }

  const Scalar count = static_cast<Scalar>(n_traj);
  for (std::size_t t = 0; t < n_times; ++t) {
    const CMatrix<Scalar> mean = sum[t] / count;
    CMatrix<Scalar> se = CMatrix<Scalar>::Zero(n, n);
    if (n_traj > 1) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          auto se_of = [&](Scalar s, Scalar s2, Scalar m) {
            const Scalar var = std::max(Scalar(0), (s2 - s * m) / (count - 1));
            return std::sqrt(var / count);
          };
          se(i, j) = Complex<Scalar>(se_of(sum[t](i, j).real(), sum_sq[t](i, j).real(), mean(i, j).real()),
                                     se_of(sum[t](i, j).imag(), sum_sq[t](i, j).imag(), mean(i, j).imag()));
        }
      }
    }
    out.rho.push_back(mean);
    out.stderr.push_back(se);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Real representation

/// X = (sqrt2 Re psi, sqrt2 Im psi).
template <typename Scalar>
RealStateVector<Scalar> to_real(const QuantumState<Scalar> &state) {
  const auto &c = state.amplitudes();
  const Eigen::Index n = c.size();
  const Scalar s = std::numbers::sqrt2_v<Scalar>;
  RealStateVector<Scalar> x(2 * n);
  x.head(n) = s * c.real();
  x.tail(n) = s * c.imag();
  return x;
}

template <typename Derived>
QuantumState<typename Derived::Scalar> from_real(const Eigen::MatrixBase<Derived> &x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() % 2 != 0) throw DimensionMismatch("from_real: odd-length real vector");
  const Eigen::Index n = x.size() / 2;
  const Scalar inv = Scalar(1) / std::numbers::sqrt2_v<Scalar>;
  CVector<Scalar> c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = Complex<Scalar>(x[i] * inv, x[n + i] * inv);
  return QuantumState<Scalar>(std::move(c));
}

/// Real drift and diffusion: F = (f^R, f^I) and
/// B = (1/sqrt2) [[B^R, -B^I], [B^I, B^R]] (2n x 2m). These are the
/// coefficients of the equation for (Re psi, Im psi) = X / sqrt2 driven by
/// (dW^R, dW^I) with dW = (dW^R + i dW^I) / sqrt2, so that B B^T equals the
/// real diffusion matrix and an Euler step in the X chart reads
/// X' = X + sqrt2 (F dt + B (dW^R, dW^I)).
template <typename Scalar>
struct RealSde {
  RVector<Scalar> drift;
  RMatrix<Scalar> diffusion;
};

template <typename Scalar>
RealSde<Scalar> real_drift_diffusion(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                                     DriftConvention conv = DriftConvention::gisin_percival) {
  if (x.size() != 2 * model.dim()) throw DimensionMismatch("real_drift_diffusion: dimension mismatch");
  const auto state = from_real(x);
  require_normalized(state, "real_drift_diffusion");
  const Eigen::Index n = model.dim();
  const auto m = static_cast<Eigen::Index>(model.channels());
  const CVector<Scalar> f = detail::drift_of(state.amplitudes(), model, conv);
  const CMatrix<Scalar> b = detail::diffusion_of(state.amplitudes(), model);

  RealSde<Scalar> out;
  out.drift.resize(2 * n);
  out.drift << f.real(), f.imag();
  const Scalar inv = Scalar(1) / std::numbers::sqrt2_v<Scalar>;
  out.diffusion.resize(2 * n, 2 * m);
  out.diffusion.topLeftCorner(n, m) = inv * b.real();
  out.diffusion.topRightCorner(n, m) = -inv * b.imag();
  out.diffusion.bottomLeftCorner(n, m) = inv * b.imag();
  out.diffusion.bottomRightCorner(n, m) = inv * b.real();
  return out;
}

/// (dW^R_1..m, dW^I_1..m) with dW = (dW^R + i dW^I) / sqrt2.
template <typename Scalar>
RVector<Scalar> real_noise(const CVector<Scalar> &dw) {
  const Scalar s = std::numbers::sqrt2_v<Scalar>;
  RVector<Scalar> xi(2 * dw.size());
  xi << s * dw.real(), s * dw.imag();
  return xi;
}

// ---------------------------------------------------------------------------
// Gradient form for one Hermitian channel

template <typename Scalar>
struct GradientCheckReport {
  Scalar drift_residual = 0;             // full-space identity
  Scalar tangential_drift_residual = 0;  // identity projected on the unit sphere
  Scalar diffusion_residual = 0;
  Scalar max_residual() const {
    return std::max({drift_residual, tangential_drift_residual, diffusion_residual});
  }
};

namespace detail {

// Gradient of <A> = 1/2 (q.A^R q + p.A^R p) + p.A^I q for Hermitian A, from
// the real quadratic form directly.
template <typename Scalar>
RVector<Scalar> expectation_gradient(const Operator<Scalar> &a, const RVector<Scalar> &x) {
  const Eigen::Index n = a.rows();
  const RMatrix<Scalar> ar = a.real();
  const RMatrix<Scalar> ai = a.imag();
  const auto q = x.head(n);
  const auto p = x.tail(n);
  RVector<Scalar> g(2 * n);
  g.head(n) = ar * q - ai * p;
  g.tail(n) = ar * p + ai * q;
  return g;
}

template <typename Scalar>
Scalar expectation_value(const Operator<Scalar> &a, const RVector<Scalar> &x) {
  const Eigen::Index n = a.rows();
  const RMatrix<Scalar> ar = a.real();
  const RMatrix<Scalar> ai = a.imag();
  const auto q = x.head(n);
  const auto p = x.tail(n);
  return Scalar(0.5) * (q.dot(ar * q) + p.dot(ar * p)) + p.dot(ai * q);
}

// Omega (a, b) = (b, -a): Omega grad <H> is the Hamiltonian vector field.
template <typename Scalar>
RVector<Scalar> symplectic(const RVector<Scalar> &v) {
  const Eigen::Index n = v.size() / 2;
  RVector<Scalar> out(v.size());
  out << v.tail(n), -v.head(n);
  return out;
}

}  // namespace detail

/// Checks, for a single Hermitian Lindblad operator L and Hermitian H, that
/// the real-chart drift and diffusion are gradient fields:
///
///   sqrt2 F      = Omega grad<H> - k (grad Var L + <L>^2 X)
///   P_T sqrt2 F  = Omega grad<H> - k grad_T Var L          (on |X|^2 = 2)
///   sqrt2 B      = (1/sqrt2) [grad_T <L>, -Omega grad_T <L>]
///
/// with Var L = <L^2> - <L>^2, grad_T the projection tangent to the unit
/// sphere, and k = 1/2 (gisin_percival) or 1 (doubled). The gradients are
/// evaluated from the real quadratic forms, independently of the complex drift.
template <typename Scalar>
GradientCheckReport<Scalar> hermitian_gradient_check(const RealStateVector<Scalar> &x,
                                                     const EnvironmentModel<Scalar> &model,
                                                     DriftConvention conv = DriftConvention::doubled) {
  if (model.channels() != 1 || !is_hermitian(model.lindblads()[0])) {
    throw NotApplicable("hermitian_gradient_check: requires exactly one Hermitian Lindblad operator");
  }
  if (!is_hermitian(model.hamiltonian())) throw NotApplicable("hermitian_gradient_check: Hamiltonian is not Hermitian");

  const Scalar root2 = std::numbers::sqrt2_v<Scalar>;
  const Scalar k = dissipative_weight<Scalar>(conv);
  const auto sde = real_drift_diffusion(x, model, conv);
  const RVector<Scalar> drift_x = root2 * sde.drift;
  const RMatrix<Scalar> diffusion_x = root2 * sde.diffusion;

  const Operator<Scalar> &l = model.lindblads()[0];
  const Operator<Scalar> l2 = l * l;
  const Scalar mean_l = detail::expectation_value(l, x);
  const RVector<Scalar> grad_h = detail::expectation_gradient(model.hamiltonian(), x);
  const RVector<Scalar> grad_l = detail::expectation_gradient(l, x);
  const RVector<Scalar> grad_var = detail::expectation_gradient(l2, x) - Scalar(2) * mean_l * grad_l;

  const Scalar r2 = x.squaredNorm();
  auto tangential = [&](const RVector<Scalar> &v) -> RVector<Scalar> { return v - (x.dot(v) / r2) * x; };

  const RVector<Scalar> hamiltonian_flow = detail::symplectic(grad_h);
  const RVector<Scalar> full = hamiltonian_flow - k * (grad_var + mean_l * mean_l * x);
  const RVector<Scalar> tangent = hamiltonian_flow - k * tangential(grad_var);

  const RVector<Scalar> col_r = tangential(grad_l) / root2;
  const RVector<Scalar> col_i = -detail::symplectic(col_r);

  GradientCheckReport<Scalar> rep;
  rep.drift_residual = (drift_x - full).cwiseAbs().maxCoeff();
  rep.tangential_drift_residual = (tangential(drift_x) - tangent).cwiseAbs().maxCoeff();
  rep.diffusion_residual =
      std::max((diffusion_x.col(0) - col_r).cwiseAbs().maxCoeff(), (diffusion_x.col(1) - col_i).cwiseAbs().maxCoeff());
  return rep;
}

}  // namespace qsd

#endif  // QSDGEOM_SDE_HPP
