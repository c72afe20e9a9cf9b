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

#include "qsdgeom/verification.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "qsdgeom/analysis.hpp"
#include "qsdgeom/geometry.hpp"
#include "qsdgeom/quantum.hpp"
#include "qsdgeom/sde.hpp"

namespace qsd {

namespace {

using Vec = RVector<double>;

QuantumState<double> random_state(std::mt19937_64 &rng) {
  std::normal_distribution<double> n;
  CVector<double> c(2);
  c << Complex<double>(n(rng), n(rng)), Complex<double>(n(rng), n(rng));
  return QuantumState<double>(c / c.norm());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

CheckResult bound(std::string name, double value, double tol) {
  return {std::move(name), value < tol, "max error " + fmt(value) + " (tol " + fmt(tol) + ")"};
}

std::vector<EnvironmentModel<double>> presets() {
  return {make_dephasing(0.6), make_measurement(1.0), make_thermal(2.0, 1.0)};
}

}  // namespace

std::vector<CheckResult> run_verification(unsigned threads) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(12345);

  auto guarded = [&](const std::string &name, const std::function<CheckResult()> &fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception &e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };

  guarded("lindblad_rhs hermitian and traceless", [&] {
    double worst = 0;
    for (const auto &m : presets()) {
      for (int k = 0; k < 20; ++k) {
        const auto d = lindblad_rhs(random_state(rng).projector(), m);
        worst = std::max({worst, (d - d.adjoint()).cwiseAbs().maxCoeff(), std::abs(d.trace())});
      }
    }
    return bound("lindblad_rhs hermitian and traceless", worst, 1e-12);
  });

  guarded("bloch roundtrip", [&] {
    std::uniform_real_distribution<double> th(1e-3, std::numbers::pi - 1e-3), ph(0, 2 * std::numbers::pi);
    double worst = 0;
    for (int k = 0; k < 200; ++k) {
      const BlochPoint<double> p{th(rng), ph(rng)};
      const auto q = state_to_bloch(bloch_to_state(p));
      worst = std::max(worst, bloch_angle(p, q));
    }
    return bound("bloch roundtrip", worst, 1e-10);
  });

  guarded("real and complex steps agree", [&] {
    double worst = 0;
    for (const auto &m : presets()) {
      RandomStream stream(99, 0);
      for (int k = 0; k < 20; ++k) {
        const auto psi = random_state(rng);
        const CVector<double> dw = sample_wiener<double>(m.channels(), 1e-3, stream);
        const auto next = em_step_with_noise(psi, m, 1e-3, dw, DriftConvention::gisin_percival, false);
        const Vec x = to_real(psi);
        const auto sde = real_drift_diffusion(x, m);
        const Vec pred = x + std::numbers::sqrt2 * (sde.drift * 1e-3 + sde.diffusion * real_noise(dw));
        worst = std::max(worst, (to_real(next) - pred).cwiseAbs().maxCoeff());
      }
    }
    return bound("real and complex steps agree", worst, 1e-13);
  });

  guarded("B B^T equals real diffusion matrix", [&] {
    double worst = 0;
    for (const auto &m : presets()) {
      const auto psi = random_state(rng);
      const auto sde = real_drift_diffusion(to_real(psi), m);
      const auto gr = real_diffusion_matrix(complex_diffusion_matrix(psi, m));
      worst = std::max(worst, (sde.diffusion * sde.diffusion.transpose() - gr).cwiseAbs().maxCoeff());
    }
    return bound("B B^T equals real diffusion matrix", worst, 1e-13);
  });

  guarded("dephasing metric matches closed form", [&] {
    const auto m = make_dephasing(0.6);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
      const Vec x = to_real(random_state(rng));
      worst = std::max(worst, (metric_at(x, m).g - closed_form_qubit_metric(x, m.kind(), m.couplings()).g)
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    return bound("dephasing metric matches closed form", worst, 1e-12);
  });

  guarded("gradient form for Hermitian channels", [&] {
    double worst = 0;
    for (const auto &m : {make_dephasing(0.6, Operator<double>(0.01 * sigma_x())),
                          make_measurement(1.0, Operator<double>(sigma_z()))}) {
      for (int k = 0; k < 20; ++k) {
        worst = std::max(worst, hermitian_gradient_check(to_real(random_state(rng)), m).max_residual());
      }
    }
    return bound("gradient form for Hermitian channels", worst, 1e-12);
  });

  guarded("flat metric has zero curvature", [&] {
    const EnvironmentModel<double> flat(Operator<double>::Zero(2, 2), {});
    double worst = 0;
    for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(scalar_curvature(to_real(random_state(rng)), flat)));
    return bound("flat metric has zero curvature", worst, 1e-6);
  });

  guarded("dephasing curvature maximum changes sign", [&] {
    AnalysisOptions opts;
    opts.threads = threads;
    const auto grid = ScanGrid<double>::uniform(24, 24);
    const double lo = max_curvature(EnvironmentKind::dephasing, 0.3, grid, opts);
    const double hi = max_curvature(EnvironmentKind::dephasing, 0.5, grid, opts);
    return CheckResult{"dephasing curvature maximum changes sign", lo < 0 && hi > 0,
                       "max R(0.3) = " + fmt(lo) + ", max R(0.5) = " + fmt(hi)};
  });

  guarded("measurement curvature maxima at the poles", [&] {
    AnalysisOptions opts;
    opts.threads = threads;
    const auto grid = ScanGrid<double>::uniform(25, 8);
    const auto ext = find_extrema(scan_field(make_measurement(1.0), grid, FieldQuantity::curvature, opts));
    const double cell = grid.thetas[1];
    const double off = std::min(ext.max_point.theta, std::numbers::pi - ext.max_point.theta);
    return CheckResult{"measurement curvature maxima at the poles", off <= cell,
                       "max at theta = " + fmt(ext.max_point.theta)};
  });

  return out;
}

}  // namespace qsd
