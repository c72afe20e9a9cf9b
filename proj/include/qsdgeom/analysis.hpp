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

// Bloch-sphere experiments for qubit environments: landscapes of the metric
// norm and scalar curvature, extrema, coupling sweeps, the critical coupling
// where the curvature maximum changes sign, and path-residency stability.

#ifndef QSDGEOM_ANALYSIS_HPP
#define QSDGEOM_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "qsdgeom/geometry.hpp"
#include "qsdgeom/parallel.hpp"
#include "qsdgeom/quantum.hpp"
#include "qsdgeom/sde.hpp"
#include "qsdgeom/types.hpp"

namespace qsd {

// ---------------------------------------------------------------------------
// Grids and fields

/// theta = linspace(0, pi, n_theta) (poles included), phi = 2 pi k / n_phi.
template <typename Scalar = double>
struct ScanGrid {
  std::vector<Scalar> thetas;
  std::vector<Scalar> phis;

  static ScanGrid uniform(std::size_t n_theta = 96, std::size_t n_phi = 96) {
    if (n_theta < 2 || n_phi < 1) throw InvalidArgument("ScanGrid: need at least 2 theta and 1 phi nodes");
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    ScanGrid g;
    for (std::size_t i = 0; i < n_theta; ++i) g.thetas.push_back(pi * Scalar(i) / Scalar(n_theta - 1));
    for (std::size_t j = 0; j < n_phi; ++j) g.phis.push_back(2 * pi * Scalar(j) / Scalar(n_phi));
    return g;
  }

  void validate() const {
    if (thetas.empty() || phis.empty()) throw InvalidArgument("ScanGrid: grid is empty");
    auto increasing = [](const std::vector<Scalar> &v) {
      return std::adjacent_find(v.begin(), v.end(), std::greater_equal<Scalar>()) == v.end();
    };
    if (!increasing(thetas) || !increasing(phis)) throw InvalidArgument("ScanGrid: grid must be strictly increasing");
  }
};

enum class FieldQuantity { norm, curvature };

inline std::string_view to_string(FieldQuantity q) { return q == FieldQuantity::norm ? "norm" : "curvature"; }

inline FieldQuantity parse_field_quantity(std::string_view name) {
  if (name == "norm") return FieldQuantity::norm;
  if (name == "curvature") return FieldQuantity::curvature;
  throw InvalidArgument("unknown field quantity '" + std::string(name) + "'");
}

template <typename Scalar = double>
struct ScalarField {
  std::vector<Scalar> thetas;
  std::vector<Scalar> phis;
  RMatrix<Scalar> values;  // [i_theta][i_phi]
  FieldQuantity quantity = FieldQuantity::curvature;
};

struct AnalysisOptions {
  GeometryOptions geometry;
  unsigned threads = 0;
};

template <typename Scalar>
Scalar field_value(const EnvironmentModel<Scalar> &model, const BlochPoint<Scalar> &point, FieldQuantity quantity,
                   const GeometryOptions &geometry = {}) {
  const RealStateVector<Scalar> x = to_real(bloch_to_state(point));
  return quantity == FieldQuantity::norm ? metric_norm(x, model, geometry.metric)
                                         : scalar_curvature(x, model, geometry);
}

/// Evaluates `quantity` at every grid node, one theta row per task.
template <typename Scalar>
ScalarField<Scalar> scan_field(const EnvironmentModel<Scalar> &model, const ScanGrid<Scalar> &grid,
                               FieldQuantity quantity, const AnalysisOptions &opts = {}) {
  grid.validate();
  if (model.dim() != 2) throw DimensionMismatch("scan_field: qubit model required");
  const std::size_t nt = grid.thetas.size();
  const std::size_t np = grid.phis.size();
  auto rows = parallel_map(nt, opts.threads, [&](std::size_t i) {
    std::vector<Scalar> row(np);
    for (std::size_t j = 0; j < np; ++j) {
      const BlochPoint<Scalar> pt{grid.thetas[i], grid.phis[j]};
      Scalar v;
      try {
        v = field_value(model, pt, quantity, opts.geometry);
      } catch (const Error &e) {
        throw Error("scan_field: node (" + std::to_string(pt.theta) + ", " + std::to_string(pt.phi) +
                    "): " + e.what());
      }
      if (!std::isfinite(v)) {
        throw Error("scan_field: non-finite value at node (" + std::to_string(pt.theta) + ", " +
                    std::to_string(pt.phi) + ")");
      }
      row[j] = v;
    }
    return row;
  });
  ScalarField<Scalar> out{grid.thetas, grid.phis, RMatrix<Scalar>(nt, np), quantity};
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < np; ++j) out.values(i, j) = rows[i][j];
  return out;
}

// ---------------------------------------------------------------------------
// Extrema

template <typename Scalar = double>
struct ExtremumReport {
  BlochPoint<Scalar> max_point;
  Scalar max_value = 0;
  BlochPoint<Scalar> min_point;
  Scalar min_value = 0;
  Scalar sharpness = 0;
  bool degenerate = false;
};

/// Great-circle angle between two Bloch points.
template <typename Scalar>
Scalar bloch_angle(const BlochPoint<Scalar> &a, const BlochPoint<Scalar> &b) {
  auto unit = [](const BlochPoint<Scalar> &p) {
    return Eigen::Matrix<Scalar, 3, 1>(std::sin(p.theta) * std::cos(p.phi), std::sin(p.theta) * std::sin(p.phi),
                                       std::cos(p.theta));
  };
  const auto u = unit(a);
  const auto v = unit(b);
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

namespace detail {

// Least-squares quadratic on the 3x3 stencil around (i, j), in cell units.
// Returns the refined point and value if the stencil is interior in theta
// and the fit has a definite stationary point within one cell.
template <typename Scalar>
bool refine_quadratic(const ScalarField<Scalar> &f, Eigen::Index i, Eigen::Index j, bool maximum,
                      BlochPoint<Scalar> &point, Scalar &value) {
  const Eigen::Index nt = f.values.rows();
  const Eigen::Index np = f.values.cols();
  if (i == 0 || i == nt - 1 || np < 3) return false;
  Eigen::Matrix<Scalar, 9, 6> a;
  Eigen::Matrix<Scalar, 9, 1> rhs;
  int r = 0;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj, ++r) {
      const Eigen::Index jj = (j + dj + np) % np;
      a.row(r) << 1, Scalar(di), Scalar(dj), Scalar(di * di), Scalar(di * dj), Scalar(dj * dj);
      rhs[r] = f.values(i + di, jj);
    }
  const Eigen::Matrix<Scalar, 6, 1> c = a.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix<Scalar, 2, 2> hess;
  hess << 2 * c[3], c[4], c[4], 2 * c[5];
  const Scalar det = hess.determinant();
  const bool definite = det > 0 && (maximum ? hess(0, 0) < 0 : hess(0, 0) > 0);
  if (!definite) return false;
  const Eigen::Matrix<Scalar, 2, 1> offset = -hess.inverse() * Eigen::Matrix<Scalar, 2, 1>(c[1], c[2]);
  if (offset.cwiseAbs().maxCoeff() > 1) return false;
  const Scalar dtheta = f.thetas[i + 1] - f.thetas[i];
  const Scalar dphi = np > 1 ? std::numbers::pi_v<Scalar> * 2 / Scalar(np) : Scalar(0);
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  point.theta = std::clamp(f.thetas[i] + offset[0] * dtheta, Scalar(0), std::numbers::pi_v<Scalar>);
  point.phi = std::fmod(f.phis[j] + offset[1] * dphi + two_pi, two_pi);
  value = c[0] + c[1] * offset[0] + c[2] * offset[1] + c[3] * offset[0] * offset[0] +
          c[4] * offset[0] * offset[1] + c[5] * offset[1] * offset[1];
  return true;
}

}  // namespace detail

/// Grid argmax/argmin refined by a quadratic fit on the 3x3 neighborhood.
///
/// sharpness = (max - mean of grid values within `radius` of the maximum)
///             / (max - min);
/// a constant field is flagged degenerate with sharpness 0.
template <typename Scalar>
ExtremumReport<Scalar> find_extrema(const ScalarField<Scalar> &field, Scalar radius = Scalar(0.5)) {
  if (field.values.size() == 0) throw InvalidArgument("find_extrema: empty field");
  if (!field.values.allFinite()) throw InvalidArgument("find_extrema: field has non-finite values");
  Eigen::Index imax, jmax, imin, jmin;
  const Scalar vmax = field.values.maxCoeff(&imax, &jmax);
  const Scalar vmin = field.values.minCoeff(&imin, &jmin);

  ExtremumReport<Scalar> rep;
  rep.max_point = {field.thetas[imax], field.phis[jmax]};
  rep.min_point = {field.thetas[imin], field.phis[jmin]};
  rep.max_value = vmax;
  rep.min_value = vmin;

  const Scalar span = vmax - vmin;
  if (!(span > Scalar(1e-12) * std::max(Scalar(1), std::abs(vmax)))) {
    rep.degenerate = true;
    rep.sharpness = 0;
    return rep;
  }

  Scalar sum = 0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < field.values.rows(); ++i)
    for (Eigen::Index j = 0; j < field.values.cols(); ++j) {
      if (bloch_angle(rep.max_point, BlochPoint<Scalar>{field.thetas[i], field.phis[j]}) <= radius) {
        sum += field.values(i, j);
        ++count;
      }
    }
  rep.sharpness = (vmax - sum / Scalar(count)) / span;

  BlochPoint<Scalar> p;
  Scalar v;
  if (detail::refine_quadratic(field, imax, jmax, true, p, v) && v >= vmax) {
    rep.max_point = p;
    rep.max_value = v;
  }
  if (detail::refine_quadratic(field, imin, jmin, false, p, v) && v <= vmin) {
    rep.min_point = p;
    rep.min_value = v;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Coupling sweeps

/// Preset at coupling mu. Thermal presets follow the ray mu1 = 2 mu, mu2 = mu.
template <typename Scalar>
EnvironmentModel<Scalar> preset_at(EnvironmentKind kind, Scalar mu,
                                   std::optional<Operator<Scalar>> hamiltonian = std::nullopt) {
  if (kind == EnvironmentKind::thermal) return make_thermal<Scalar>(2 * mu, mu, std::move(hamiltonian));
  return make_environment<Scalar>(kind, {{"mu", mu}}, std::move(hamiltonian));
}

template <typename Scalar = double>
struct SweepResult {
  std::vector<Scalar> couplings;
  std::vector<Scalar> max_curvature;
  std::vector<Scalar> min_curvature;
};

template <typename Scalar>
SweepResult<Scalar> coupling_sweep(EnvironmentKind kind, const std::vector<Scalar> &couplings,
                                   const ScanGrid<Scalar> &grid, const AnalysisOptions &opts = {}) {
  if (couplings.empty()) throw InvalidArgument("coupling_sweep: no couplings");
  for (std::size_t k = 1; k < couplings.size(); ++k) {
    if (!(couplings[k] > couplings[k - 1])) throw InvalidArgument("coupling_sweep: couplings must increase");
  }
  SweepResult<Scalar> out;
  for (Scalar mu : couplings) {
    const auto field = scan_field(preset_at(kind, mu), grid, FieldQuantity::curvature, opts);
    out.couplings.push_back(mu);
    out.max_curvature.push_back(field.values.maxCoeff());
    out.min_curvature.push_back(field.values.minCoeff());
  }
  return out;
}

template <typename Scalar>
Scalar max_curvature(EnvironmentKind kind, Scalar mu, const ScanGrid<Scalar> &grid, const AnalysisOptions &opts = {}) {
  return scan_field(preset_at(kind, mu), grid, FieldQuantity::curvature, opts).values.maxCoeff();
}

/// Bisection on sign(max curvature(mu)) until the bracket is narrower than
/// `tol`; returns the midpoint.
template <typename Scalar>
Scalar critical_coupling(EnvironmentKind kind, Scalar lo, Scalar hi, Scalar tol, const ScanGrid<Scalar> &grid,
                         const AnalysisOptions &opts = {}) {
  if (!(lo < hi)) throw InvalidArgument("critical_coupling: need lo < hi");
  if (!(tol > 0)) throw InvalidArgument("critical_coupling: tol must be positive");
  const bool sign_lo = max_curvature(kind, lo, grid, opts) > 0;
  const bool sign_hi = max_curvature(kind, hi, grid, opts) > 0;
  if (sign_lo == sign_hi) {
    throw BracketingError("critical_coupling: maximum curvature has the same sign at " + std::to_string(lo) +
                          " and " + std::to_string(hi));
  }
  while (hi - lo > tol) {
    const Scalar mid = (lo + hi) / 2;
    if ((max_curvature(kind, mid, grid, opts) > 0) == sign_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

// ---------------------------------------------------------------------------
// Paths

template <typename Scalar>
std::vector<Scalar> curvature_along_path(const TrajectoryRecord<Scalar> &record, const EnvironmentModel<Scalar> &model,
                                         const AnalysisOptions &opts = {}) {
  auto values = parallel_map(record.states.size(), opts.threads, [&](std::size_t k) {
    require_normalized(record.states[k], "curvature_along_path");
    return scalar_curvature(to_real(record.states[k]), model, opts.geometry);
  });
  return values;
}

// ---------------------------------------------------------------------------
// Stability

struct StabilityConfig {
  double delta = 0.5;       // residency radius (rad)
  double threshold = 0.8;   // stable iff mean residency >= threshold
  double t_final = 100.0;
  double dt = 1e-3;
  std::size_t n_paths = 100;
  std::size_t sample_stride = 10;  // residency is sampled every this many steps
  std::uint64_t seed = 7;
  std::size_t grid = 96;  // curvature scan used to locate the maximum

  void validate() const {
    if (!(delta > 0 && delta < std::numbers::pi)) throw InvalidArgument("StabilityConfig: delta must lie in (0, pi)");
    if (!(threshold >= 0 && threshold <= 1)) throw InvalidArgument("StabilityConfig: threshold must lie in [0, 1]");
    if (!(t_final > 0) || !(dt > 0)) throw InvalidArgument("StabilityConfig: t_final and dt must be positive");
    if (n_paths < 1) throw InvalidArgument("StabilityConfig: n_paths must be at least 1");
    if (sample_stride < 1) throw InvalidArgument("StabilityConfig: sample_stride must be at least 1");
    if (grid < 3) throw InvalidArgument("StabilityConfig: grid must be at least 3");
  }
};

enum class Verdict { stable, unstable };

inline std::string_view to_string(Verdict v) { return v == Verdict::stable ? "stable" : "unstable"; }

template <typename Scalar = double>
struct StabilityReport {
  EnvironmentKind kind = EnvironmentKind::custom;
  Couplings<Scalar> couplings;
  Operator<Scalar> perturbation;
  BlochPoint<Scalar> max_point;
  Scalar max_curvature = 0;
  std::size_t n_paths = 0;
  Scalar delta = 0;
  Scalar threshold = 0;
  Scalar fraction_resident = 0;
  std::vector<Scalar> path_fractions;
  Verdict verdict = Verdict::unstable;
};

/// Fraction of sampled times (t = 0 included) at which the Bloch point of
/// each path lies within great-circle angle delta of `target`.
template <typename Scalar>
std::vector<Scalar> residency_fractions(const QuantumState<Scalar> &target, const EnvironmentModel<Scalar> &model,
                                        const StabilityConfig &config, DriftConvention convention,
                                        unsigned threads = 0) {
  config.validate();
  const auto steps = static_cast<std::size_t>(std::llround(config.t_final / config.dt));
  const Eigen::Matrix<Scalar, 3, 1> axis = bloch_vector(target);
  const Scalar cos_delta = std::cos(static_cast<Scalar>(config.delta));
  const Scalar dt = static_cast<Scalar>(config.dt);
  return parallel_map(config.n_paths, threads, [&](std::size_t k) {
    RandomStream stream(config.seed, k);
    QuantumState<Scalar> psi = target;
    std::size_t inside = 0;
    std::size_t samples = 0;
    for (std::size_t s = 0;; ++s) {
      if (s % config.sample_stride == 0) {
        inside += bloch_vector(psi).dot(axis) >= cos_delta ? 1 : 0;
        ++samples;
      }
      if (s == steps) break;
      try {
        psi = em_step(psi, model, dt, stream, convention, true);
      } catch (const StepFailure &) {
        throw StepFailure("stability: norm underflow on path " + std::to_string(k) + " at step " +
                              std::to_string(s + 1),
                          s + 1);
      }
    }
    return Scalar(inside) / Scalar(samples);
  });
}

/// Launches paths from the curvature maximum of the preset with Hamiltonian
/// `perturbation` and reports how long they stay near it.
template <typename Scalar>
StabilityReport<Scalar> stability_experiment(EnvironmentKind kind, const Couplings<Scalar> &couplings,
                                             const Operator<Scalar> &perturbation, const StabilityConfig &config,
                                             const AnalysisOptions &opts = {},
                                             DriftConvention convention = DriftConvention::gisin_percival) {
  config.validate();
  const auto model = make_environment<Scalar>(kind, couplings, perturbation);
  // The landscape depends only on the Lindblad operators.
  const auto field = scan_field(model, ScanGrid<Scalar>::uniform(config.grid, config.grid), FieldQuantity::curvature,
                                opts);
  const auto ext = find_extrema(field);
  if (ext.degenerate) throw IllPosed("stability_experiment: curvature field has no distinguished maximum");

  StabilityReport<Scalar> rep;
  rep.kind = kind;
  rep.couplings = couplings;
  rep.perturbation = perturbation;
  rep.max_point = ext.max_point;
  rep.max_curvature = ext.max_value;
  rep.n_paths = config.n_paths;
  rep.delta = static_cast<Scalar>(config.delta);
  rep.threshold = static_cast<Scalar>(config.threshold);
  rep.path_fractions = residency_fractions(bloch_to_state(ext.max_point), model, config, convention, opts.threads);
  Scalar sum = 0;
  for (Scalar f : rep.path_fractions) sum += f;
  rep.fraction_resident = sum / Scalar(rep.path_fractions.size());
  rep.verdict = rep.fraction_resident >= rep.threshold ? Verdict::stable : Verdict::unstable;
  return rep;
}

}  // namespace qsd

#endif  // QSDGEOM_ANALYSIS_HPP
