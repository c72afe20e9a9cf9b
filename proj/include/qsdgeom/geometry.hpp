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

// Diffusion metric g = 1/2 I + G_real on R^{2n} and its curvature.
//
// Index conventions:
//   Gamma^k_{mn}  = 1/2 g^{kl} (d_m g_{ln} + d_n g_{lm} - d_l g_{mn})
//   R^k_{lmn}     = d_m Gamma^k_{nl} - d_n Gamma^k_{ml}
//                   + Gamma^e_{nl} Gamma^k_{me} - Gamma^e_{ml} Gamma^k_{ne}
//   Ric_{mn}      = R^l_{mln},   R = g^{mn} Ric_{mn}
//
// With these conventions the round sphere has positive scalar curvature.

#ifndef QSDGEOM_GEOMETRY_HPP
#define QSDGEOM_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>

#include "qsdgeom/quantum.hpp"
#include "qsdgeom/sde.hpp"
#include "qsdgeom/types.hpp"

namespace qsd {

// ---------------------------------------------------------------------------
// Diffusion matrices

/// G = B B^dag with B from diffusion_columns.
template <typename Scalar>
CMatrix<Scalar> complex_diffusion_matrix(const QuantumState<Scalar> &state, const EnvironmentModel<Scalar> &model) {
  const CMatrix<Scalar> b = diffusion_columns(state, model);
  return b * b.adjoint();
}

/// 1/2 [[G^R, -G^I], [G^I, G^R]], the real image of a Hermitian G. Equals
/// B_real B_real^T for the block diffusion matrix of real_drift_diffusion.
template <typename Scalar>
RMatrix<Scalar> real_diffusion_matrix(const CMatrix<Scalar> &g) {
  if (g.rows() != g.cols()) throw DimensionMismatch("real_diffusion_matrix: matrix is not square");
  if (!is_hermitian(g, Scalar(1e-12))) throw InvalidArgument("real_diffusion_matrix: matrix is not Hermitian");
  const Eigen::Index n = g.rows();
  RMatrix<Scalar> out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = g.real() / 2;
  out.topRightCorner(n, n) = -g.imag() / 2;
  out.bottomLeftCorner(n, n) = g.imag() / 2;
  out.bottomRightCorner(n, n) = g.real() / 2;
  return out;
}

// ---------------------------------------------------------------------------
// Metric field

/// Which fluctuation vector builds the metric field.
///
/// `closed_form` uses (L + <L>) psi, the construction whose entries are the
/// tabulated qubit polynomials (closed_form_qubit_metric). `sde_diffusion`
/// uses the SDE diffusion column (L - <L>) psi, so that on the unit sphere
/// g = 1/2 I + real_diffusion_matrix(complex_diffusion_matrix).
enum class MetricConvention { closed_form, sde_diffusion };

inline std::string_view to_string(MetricConvention c) {
  return c == MetricConvention::closed_form ? "closed_form" : "sde_diffusion";
}

inline MetricConvention parse_metric_convention(std::string_view name) {
  if (name == "closed_form") return MetricConvention::closed_form;
  if (name == "sde_diffusion") return MetricConvention::sde_diffusion;
  throw InvalidArgument("unknown metric convention '" + std::string(name) + "'");
}

template <typename Scalar>
struct DiffusionMetric {
  RMatrix<Scalar> g;
  RealStateVector<Scalar> point;
};

/// x -> g(x) on all of R^{2n}. Expectations use the raw amplitudes
/// c = (q + i p) / sqrt2, without normalization, so every entry is a
/// polynomial in x.
template <typename Scalar>
class MetricField {
 public:
  MetricField(const EnvironmentModel<Scalar> &model, MetricConvention convention = MetricConvention::closed_form)
      : model_(&model), sign_(convention == MetricConvention::closed_form ? Scalar(1) : Scalar(-1)) {}

  Eigen::Index dim() const { return 2 * model_->dim(); }

  RMatrix<Scalar> operator()(const RVector<Scalar> &x) const {
    const Eigen::Index n = model_->dim();
    if (x.size() != 2 * n) throw DimensionMismatch("metric: point dimension differs from 2n");
    const Scalar inv = Scalar(1) / std::numbers::sqrt2_v<Scalar>;
    CVector<Scalar> c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = Complex<Scalar>(x[i] * inv, x[n + i] * inv);

    CMatrix<Scalar> g = CMatrix<Scalar>::Zero(n, n);
    CVector<Scalar> b(n);
    for (const auto &l : model_->lindblads()) {
      b.noalias() = l * c;
      const Complex<Scalar> mean = c.dot(b);
      b += (sign_ * mean) * c;
      g.noalias() += b * b.adjoint();
    }
    RMatrix<Scalar> out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = g.real() / 2;
    out.topRightCorner(n, n) = -g.imag() / 2;
    out.bottomLeftCorner(n, n) = g.imag() / 2;
    out.bottomRightCorner(n, n) = g.real() / 2;
    out.diagonal().array() += Scalar(0.5);
    return out;
  }

 private:
  const EnvironmentModel<Scalar> *model_;
  Scalar sign_;
};

template <typename Scalar>
DiffusionMetric<Scalar> metric_at(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                                  MetricConvention convention = MetricConvention::closed_form) {
  return {MetricField<Scalar>(model, convention)(x), x};
}

/// sqrt(x^T g(x) x). Equals 1 for a unit state whenever G vanishes there.
template <typename Scalar>
Scalar metric_norm(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                   MetricConvention convention = MetricConvention::closed_form) {
  const RMatrix<Scalar> g = MetricField<Scalar>(model, convention)(x);
  return std::sqrt(x.dot(g * x));
}

// ---------------------------------------------------------------------------
// Closed-form qubit metrics

template <typename Scalar>
struct QubitMetricAux {
  Scalar d1sq = 0;  // x1^2 + x3^2
  Scalar d2sq = 0;  // x2^2 + x4^2
  Scalar s = 0;     // x1 x2 + x3 x4
  Scalar a = 0;     // x1 x4 - x2 x3
};

template <typename Scalar>
QubitMetricAux<Scalar> qubit_metric_aux(const RealStateVector<Scalar> &x) {
  if (x.size() != 4) throw DimensionMismatch("qubit_metric_aux: qubit point required");
  return {x[0] * x[0] + x[2] * x[2], x[1] * x[1] + x[3] * x[3], x[0] * x[1] + x[2] * x[3],
          x[0] * x[3] - x[1] * x[2]};
}

namespace detail {

template <typename Scalar>
RMatrix<Scalar> fill_qubit_metric(Scalar g11, Scalar g12, Scalar g14, Scalar g22) {
  RMatrix<Scalar> g = RMatrix<Scalar>::Zero(4, 4);
  g(0, 0) = g(2, 2) = g11;
  g(1, 1) = g(3, 3) = g22;
  g(0, 1) = g(1, 0) = g(2, 3) = g(3, 2) = g12;
  g(0, 3) = g(3, 0) = g14;
  g(1, 2) = g(2, 1) = -g14;
  return g;
}

}  // namespace detail

/// Tabulated qubit metrics in the coordinates (x1, x2, x3, x4) = (q1, q2, p1, p2).
///
/// The dephasing and thermal entries are evaluated exactly as tabulated. For
/// the measurement preset g12 is the tabulated entry and g14 (= -g23) is the
/// entry of the generic construction, mu^2 a (d1^2 - d2^2 - 2)(d1^2 - d2^2 + 2) / 16.
template <typename Scalar>
DiffusionMetric<Scalar> closed_form_qubit_metric(const RealStateVector<Scalar> &x, EnvironmentKind kind,
                                                 const Couplings<Scalar> &couplings) {
  const auto aux = qubit_metric_aux(x);
  const Scalar d1 = aux.d1sq;
  const Scalar d2 = aux.d2sq;
  const Scalar s = aux.s;
  const Scalar a = aux.a;
  auto coupling = [&](const std::string &key) {
    auto it = couplings.find(key);
    if (it == couplings.end()) throw InvalidArgument("closed_form_qubit_metric: missing coupling '" + key + "'");
    return it->second;
  };
  switch (kind) {
    case EnvironmentKind::dephasing: {
      const Scalar k = coupling("mu") * coupling("mu") / 16;
      return {detail::fill_qubit_metric<Scalar>(Scalar(0.5) + k * d1 * (2 + d1) * (2 + d1), k * s * d1 * (2 + d1),
                                                k * a * d1 * (2 + d1), Scalar(0.5) + k * d1 * d1 * d2),
              x};
    }
    case EnvironmentKind::thermal: {
      const Scalar m1 = coupling("mu1");
      const Scalar m2 = coupling("mu2");
      const Scalar cross = d1 * (2 + d2) * m1 + (2 + d1) * d2 * m2;
      return {detail::fill_qubit_metric<Scalar>(
                  Scalar(0.5) + d2 * (d1 * m1 * m1 + (2 + d1) * (2 + d1) * m2 * m2) / 16, s * cross / 16,
                  a * cross / 16, Scalar(0.5) + d1 * (d2 * m2 * m2 + (2 + d2) * (2 + d2) * m1 * m1) / 16),
              x};
    }
    case EnvironmentKind::measurement: {
      const Scalar k = coupling("mu") * coupling("mu") / 16;
      return {detail::fill_qubit_metric<Scalar>(Scalar(0.5) + k * d1 * (2 + d1 - d2) * (2 + d1 - d2),
                                                k * s * (d2 - d1 - 2) * (d1 - d2 + 2),
                                                k * a * (d1 - d2 - 2) * (d1 - d2 + 2),
                                                Scalar(0.5) + k * d2 * (2 + d2 - d1) * (2 + d2 - d1)),
              x};
    }
    case EnvironmentKind::custom:
      break;
  }
  throw InvalidArgument("closed_form_qubit_metric: no closed form for custom environments");
}

// ---------------------------------------------------------------------------
// Tensors

/// Dense rank-3 array T(k, m, n), row-major, stored in an Eigen vector so that
/// finite differences act on it directly.
template <typename Scalar>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Eigen::Index dim) : dim_(dim), data_(RVector<Scalar>::Zero(dim * dim * dim)) {}
  Tensor3(Eigen::Index dim, RVector<Scalar> data) : dim_(dim), data_(std::move(data)) {}

  Eigen::Index dim() const { return dim_; }
  Scalar &operator()(Eigen::Index k, Eigen::Index m, Eigen::Index n) { return data_[(k * dim_ + m) * dim_ + n]; }
  Scalar operator()(Eigen::Index k, Eigen::Index m, Eigen::Index n) const {
    return data_[(k * dim_ + m) * dim_ + n];
  }
  const RVector<Scalar> &data() const { return data_; }

 private:
  Eigen::Index dim_ = 0;
  RVector<Scalar> data_;
};

/// Dense rank-4 array T(k, l, m, n), row-major.
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Eigen::Index dim) : dim_(dim), data_(RVector<Scalar>::Zero(dim * dim * dim * dim)) {}

  Eigen::Index dim() const { return dim_; }
  Scalar &operator()(Eigen::Index k, Eigen::Index l, Eigen::Index m, Eigen::Index n) {
    return data_[((k * dim_ + l) * dim_ + m) * dim_ + n];
  }
  Scalar operator()(Eigen::Index k, Eigen::Index l, Eigen::Index m, Eigen::Index n) const {
    return data_[((k * dim_ + l) * dim_ + m) * dim_ + n];
  }
  const RVector<Scalar> &data() const { return data_; }

 private:
  Eigen::Index dim_ = 0;
  RVector<Scalar> data_;
};

// ---------------------------------------------------------------------------
// Finite differences

/// Central differences with Richardson extrapolation over the step sequence
/// h, h/2, ..., h/2^levels. `levels` = 2 differentiates polynomials of degree
/// up to 6 exactly (the metric field is one), so a large step keeps roundoff
/// small.
struct FiniteDifference {
  double metric_step = 1e-2;
  int metric_levels = 2;
  double christoffel_step = 1e-3;
  int christoffel_levels = 1;
};

template <typename Fn, typename Scalar>
auto central_derivative(const Fn &fn, const RVector<Scalar> &x, Eigen::Index dir, Scalar h, int levels) {
  using Value = std::decay_t<decltype(fn(x))>;
  std::vector<Value> table;
  table.reserve(static_cast<std::size_t>(levels) + 1);
  RVector<Scalar> xp = x;
  RVector<Scalar> xm = x;
  Scalar step = h;
  for (int j = 0; j <= levels; ++j, step /= 2) {
    xp[dir] = x[dir] + step;
    xm[dir] = x[dir] - step;
    table.push_back(((fn(xp) - fn(xm)) / (2 * step)).eval());
  }
  for (int k = 1; k <= levels; ++k) {
    const Scalar f = std::pow(Scalar(4), k);
    for (int j = levels; j >= k; --j) table[j] = ((f * table[j] - table[j - 1]) / (f - 1)).eval();
  }
  return table.back();
}

// ---------------------------------------------------------------------------
// Curvature of an arbitrary metric field
//
// `Field` is any callable RVector -> symmetric positive-definite RMatrix.

template <typename Scalar, typename Field>
Tensor3<Scalar> christoffel_of(const Field &field, const RVector<Scalar> &x, const FiniteDifference &fd = {}) {
  const Eigen::Index dim = x.size();
  const RMatrix<Scalar> g = field(x);
  const RMatrix<Scalar> ginv = g.llt().solve(RMatrix<Scalar>::Identity(dim, dim));
  std::vector<RMatrix<Scalar>> dg;  // dg[m](a, b) = d_m g_ab
  dg.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index m = 0; m < dim; ++m) {
    dg.push_back(central_derivative(field, x, m, static_cast<Scalar>(fd.metric_step), fd.metric_levels));
  }
  // Lowered symbols Gamma_{l m n} = 1/2 (d_m g_ln + d_n g_lm - d_l g_mn).
  Tensor3<Scalar> lowered(dim);
  for (Eigen::Index l = 0; l < dim; ++l)
    for (Eigen::Index m = 0; m < dim; ++m)
      for (Eigen::Index n = m; n < dim; ++n) {
        const Scalar v = Scalar(0.5) * (dg[m](l, n) + dg[n](l, m) - dg[l](m, n));
        lowered(l, m, n) = v;
        lowered(l, n, m) = v;
      }
  Tensor3<Scalar> gamma(dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    for (Eigen::Index m = 0; m < dim; ++m)
      for (Eigen::Index n = m; n < dim; ++n) {
        Scalar v = 0;
        for (Eigen::Index l = 0; l < dim; ++l) v += ginv(k, l) * lowered(l, m, n);
        gamma(k, m, n) = v;
        gamma(k, n, m) = v;
      }
  return gamma;
}

template <typename Scalar>
struct CurvatureBundle {
  Tensor3<Scalar> christoffel;
  Tensor4<Scalar> riemann;
  RMatrix<Scalar> ricci;
  Scalar scalar = 0;
  RealStateVector<Scalar> point;
  FiniteDifference fd;
};

template <typename Scalar, typename Field>
CurvatureBundle<Scalar> curvature_of(const Field &field, const RVector<Scalar> &x, const FiniteDifference &fd = {}) {
  const Eigen::Index dim = x.size();
  CurvatureBundle<Scalar> out;
  out.point = x;
  out.fd = fd;
  out.christoffel = christoffel_of(field, x, fd);
  const auto &gam = out.christoffel;

  auto gamma_data = [&](const RVector<Scalar> &y) { return christoffel_of(field, y, fd).data(); };
  std::vector<Tensor3<Scalar>> dgam;  // dgam[p](k, m, n) = d_p Gamma^k_{mn}
  dgam.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index p = 0; p < dim; ++p) {
    dgam.emplace_back(dim, central_derivative(gamma_data, x, p, static_cast<Scalar>(fd.christoffel_step),
                                              fd.christoffel_levels));
  }

  out.riemann = Tensor4<Scalar>(dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    for (Eigen::Index l = 0; l < dim; ++l)
      for (Eigen::Index m = 0; m < dim; ++m)
        for (Eigen::Index n = 0; n < dim; ++n) {
          Scalar v = dgam[m](k, n, l) - dgam[n](k, m, l);
          for (Eigen::Index e = 0; e < dim; ++e) v += gam(e, n, l) * gam(k, m, e) - gam(e, m, l) * gam(k, n, e);
          out.riemann(k, l, m, n) = v;
        }

  out.ricci = RMatrix<Scalar>::Zero(dim, dim);
  for (Eigen::Index m = 0; m < dim; ++m)
    for (Eigen::Index n = 0; n < dim; ++n)
      for (Eigen::Index l = 0; l < dim; ++l) out.ricci(m, n) += out.riemann(l, m, l, n);

  const RMatrix<Scalar> g = field(x);
  const RMatrix<Scalar> ginv = g.llt().solve(RMatrix<Scalar>::Identity(dim, dim));
  out.scalar = ginv.cwiseProduct(out.ricci).sum();
  return out;
}

// ---------------------------------------------------------------------------
// Curvature of the diffusion metric

struct GeometryOptions {
  MetricConvention metric = MetricConvention::closed_form;
  FiniteDifference fd;
};

template <typename Scalar>
Tensor3<Scalar> christoffel(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                            const GeometryOptions &opts = {}) {
  return christoffel_of(MetricField<Scalar>(model, opts.metric), x, opts.fd);
}

template <typename Scalar>
CurvatureBundle<Scalar> curvature_bundle(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                                         const GeometryOptions &opts = {}) {
  if (x.size() != 2 * model.dim()) throw DimensionMismatch("curvature: point dimension differs from 2n");
  return curvature_of(MetricField<Scalar>(model, opts.metric), x, opts.fd);
}

template <typename Scalar>
Tensor4<Scalar> riemann(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                        const GeometryOptions &opts = {}) {
  return curvature_bundle(x, model, opts).riemann;
}

template <typename Scalar>
struct RicciScalar {
  RMatrix<Scalar> ricci;
  Scalar scalar = 0;
};

template <typename Scalar>
RicciScalar<Scalar> ricci_scalar(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                                 const GeometryOptions &opts = {}) {
  auto b = curvature_bundle(x, model, opts);
  return {std::move(b.ricci), b.scalar};
}

template <typename Scalar>
Scalar scalar_curvature(const RealStateVector<Scalar> &x, const EnvironmentModel<Scalar> &model,
                        const GeometryOptions &opts = {}) {
  return curvature_bundle(x, model, opts).scalar;
}

}  // namespace qsd

#endif  // QSDGEOM_GEOMETRY_HPP
