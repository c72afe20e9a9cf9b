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

// CSV and JSON artifacts. Complex numbers are [re, im] pairs and matrices are
// row-major lists of them. Floating point values are written with 17
// significant digits so that files round-trip exactly.

#ifndef QSDGEOM_IO_HPP
#define QSDGEOM_IO_HPP

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "qsdgeom/analysis.hpp"
#include "qsdgeom/geometry.hpp"
#include "qsdgeom/quantum.hpp"
#include "qsdgeom/sde.hpp"

namespace qsd {

using json = nlohmann::json;

json matrix_to_json(const CMatrix<double> &m);
CMatrix<double> matrix_from_json(const json &j, Eigen::Index n);

/// {"kind", "couplings", "hamiltonian", "lindblads"}.
json environment_to_json(const EnvironmentModel<double> &model);

/// Inverse of environment_to_json. Preset kinds are rebuilt through
/// make_environment and must agree with the stored operators.
EnvironmentModel<double> environment_from_json(const json &j);

/// t,re_c0,im_c0,...,norm[,sx,sy,sz]
void write_trajectory_csv(std::ostream &os, const TrajectoryRecord<double> &record);

/// {"times", "rho", "stderr", "n_traj"}.
json ensemble_to_json(const EnsembleDensity<double> &ensemble);

/// theta,phi,value
void write_field_csv(std::ostream &os, const ScalarField<double> &field);

/// theta,phi,norm,scalar_curvature; both fields must share one grid.
void write_curvature_dump_csv(std::ostream &os, const ScalarField<double> &norm, const ScalarField<double> &curvature);

/// coupling,max_curvature,min_curvature
void write_sweep_csv(std::ostream &os, const SweepResult<double> &sweep);

/// t,scalar_curvature
void write_path_curvature_csv(std::ostream &os, const std::vector<double> &times, const std::vector<double> &values);

json stability_to_json(const StabilityReport<double> &report);

/// Nested arrays indexed [k][m][n] and [k][l][m][n].
json tensor_to_json(const Tensor3<double> &t);
json tensor_to_json(const Tensor4<double> &t);

}  // namespace qsd

#endif  // QSDGEOM_IO_HPP
