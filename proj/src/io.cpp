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

#include <iomanip>
#include <limits>
#include <ostream>

#include "qsdgeom/io.hpp"

namespace qsd {

namespace {

struct PrecisionGuard {
  explicit PrecisionGuard(std::ostream &os) : os_(os), old_(os.precision(std::numeric_limits<double>::max_digits10)) {}
  ~PrecisionGuard() { os_.precision(old_); }
  std::ostream &os_;
  std::streamsize old_;
};

}  // namespace

void write_trajectory_csv(std::ostream &os, const TrajectoryRecord<double> &record) {
  PrecisionGuard guard(os);
  const Eigen::Index n = record.states.empty() ? 0 : record.states.front().dim();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",re_c" << i << ",im_c" << i;
  os << ",norm";
  if (n == 2) os << ",sx,sy,sz";
  os << "\n";
  for (std::size_t k = 0; k < record.states.size(); ++k) {
    const auto &c = record.states[k].amplitudes();
    os << record.times[k];
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << c[i].real() << ',' << c[i].imag();
    os << ',' << record.norms[k];
    if (n == 2) {
      const auto v = bloch_vector(record.states[k].normalized());
      os << ',' << v[0] << ',' << v[1] << ',' << v[2];
    }
    os << "\n";
  }
}

json ensemble_to_json(const EnsembleDensity<double> &ensemble) {
  json rho = json::array();
  json se = json::array();
  for (std::size_t t = 0; t < ensemble.rho.size(); ++t) {
    rho.push_back(matrix_to_json(ensemble.rho[t]));
    se.push_back(matrix_to_json(ensemble.stderr[t]));
  }
  return {{"times", ensemble.times}, {"rho", rho}, {"stderr", se}, {"n_traj", ensemble.n_traj}};
}

void write_field_csv(std::ostream &os, const ScalarField<double> &field) {
  PrecisionGuard guard(os);
  os << "theta,phi,value\n";
  for (std::size_t i = 0; i < field.thetas.size(); ++i)
    for (std::size_t j = 0; j < field.phis.size(); ++j) {
      os << field.thetas[i] << ',' << field.phis[j] << ',' << field.values(i, j) << "\n";
    }
}

void write_curvature_dump_csv(std::ostream &os, const ScalarField<double> &norm, const ScalarField<double> &curvature) {
  if (norm.thetas != curvature.thetas || norm.phis != curvature.phis) {
    throw InvalidArgument("write_curvature_dump_csv: fields use different grids");
  }
  PrecisionGuard guard(os);
  os << "theta,phi,norm,scalar_curvature\n";
  for (std::size_t i = 0; i < norm.thetas.size(); ++i)
    for (std::size_t j = 0; j < norm.phis.size(); ++j) {
      os << norm.thetas[i] << ',' << norm.phis[j] << ',' << norm.values(i, j) << ',' << curvature.values(i, j)
         << "\n";
    }
}

void write_sweep_csv(std::ostream &os, const SweepResult<double> &sweep) {
  PrecisionGuard guard(os);
  os << "coupling,max_curvature,min_curvature\n";
  for (std::size_t k = 0; k < sweep.couplings.size(); ++k) {
    os << sweep.couplings[k] << ',' << sweep.max_curvature[k] << ',' << sweep.min_curvature[k] << "\n";
  }
}

void write_path_curvature_csv(std::ostream &os, const std::vector<double> &times, const std::vector<double> &values) {
  PrecisionGuard guard(os);
  os << "t,scalar_curvature\n";
  for (std::size_t k = 0; k < times.size(); ++k) os << times[k] << ',' << values[k] << "\n";
}

json stability_to_json(const StabilityReport<double> &report) {
  json couplings = json::object();
  for (const auto &[k, v] : report.couplings) couplings[k] = v;
  return {{"model", {{"kind", std::string(to_string(report.kind))}, {"couplings", couplings}}},
          {"perturbation", matrix_to_json(report.perturbation)},
          {"max_point", {{"theta", report.max_point.theta}, {"phi", report.max_point.phi}}},
          {"max_curvature", report.max_curvature},
          {"n_paths", report.n_paths},
          {"delta", report.delta},
          {"threshold", report.threshold},
          {"fraction_resident", report.fraction_resident},
          {"path_fractions", report.path_fractions},
          {"verdict", std::string(to_string(report.verdict))}};
}

json tensor_to_json(const Tensor3<double> &t) {
  json out = json::array();
  for (Eigen::Index k = 0; k < t.dim(); ++k) {
    json a = json::array();
    for (Eigen::Index m = 0; m < t.dim(); ++m) {
      json b = json::array();
      for (Eigen::Index n = 0; n < t.dim(); ++n) b.push_back(t(k, m, n));
      a.push_back(b);
    }
    out.push_back(a);
  }
  return out;
}

json tensor_to_json(const Tensor4<double> &t) {
  json out = json::array();
  for (Eigen::Index k = 0; k < t.dim(); ++k) {
    json a = json::array();
    for (Eigen::Index l = 0; l < t.dim(); ++l) {
      json b = json::array();
      for (Eigen::Index m = 0; m < t.dim(); ++m) {
        json c = json::array();
        for (Eigen::Index n = 0; n < t.dim(); ++n) c.push_back(t(k, l, m, n));
        b.push_back(c);
      }
      a.push_back(b);
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace qsd
