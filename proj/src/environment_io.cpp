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

#include <cmath>
#include <string>

#include "qsdgeom/io.hpp"

namespace qsd {

json matrix_to_json(const CMatrix<double> &m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back({m(i, j).real(), m(i, j).imag()});
  return out;
}

CMatrix<double> matrix_from_json(const json &j, Eigen::Index n) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n * n) {
    throw InvalidArgument("matrix_from_json: expected " + std::to_string(n * n) + " [re, im] entries");
  }
  CMatrix<double> m(n, n);
  for (Eigen::Index k = 0; k < n * n; ++k) {
    const json &z = j[static_cast<std::size_t>(k)];
    if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
      throw InvalidArgument("matrix_from_json: entries must be [re, im] number pairs");
    }
    m(k / n, k % n) = {z[0].get<double>(), z[1].get<double>()};
  }
  return m;
}

json environment_to_json(const EnvironmentModel<double> &model) {
  json couplings = json::object();
  for (const auto &[k, v] : model.couplings()) couplings[k] = v;
  json lindblads = json::array();
  for (const auto &l : model.lindblads()) lindblads.push_back(matrix_to_json(l));
  return {{"kind", std::string(to_string(model.kind()))},
          {"couplings", couplings},
          {"hamiltonian", matrix_to_json(model.hamiltonian())},
          {"lindblads", lindblads}};
}

EnvironmentModel<double> environment_from_json(const json &j) {
  if (!j.is_object()) throw InvalidArgument("environment: expected a JSON object");
  for (const auto &[key, value] : j.items()) {
    if (key != "kind" && key != "couplings" && key != "hamiltonian" && key != "lindblads") {
      throw InvalidArgument("environment: unknown key '" + key + "'");
    }
  }
  if (!j.contains("kind") || !j.contains("hamiltonian")) {
    throw InvalidArgument("environment: 'kind' and 'hamiltonian' are required");
  }
  const EnvironmentKind kind = parse_environment_kind(j.at("kind").get<std::string>());

  const json &h = j.at("hamiltonian");
  if (!h.is_array()) throw InvalidArgument("environment: 'hamiltonian' must be an array");
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(h.size()))));
  CMatrix<double> hamiltonian = matrix_from_json(h, n);

  Couplings<double> couplings;
  if (j.contains("couplings")) {
    for (const auto &[key, value] : j.at("couplings").items()) {
      if (!value.is_number()) throw InvalidArgument("environment: coupling '" + key + "' is not a number");
      couplings[key] = value.get<double>();
    }
  }
  std::vector<Operator<double>> lindblads;
  if (j.contains("lindblads")) {
    for (const json &l : j.at("lindblads")) lindblads.push_back(matrix_from_json(l, n));
  }

  if (kind == EnvironmentKind::custom) return EnvironmentModel<double>(hamiltonian, lindblads, kind, couplings);

  auto model = make_environment<double>(kind, couplings, hamiltonian);
  if (j.contains("lindblads")) {
    bool same = lindblads.size() == model.channels();
    for (std::size_t k = 0; same && k < lindblads.size(); ++k) {
      same = (lindblads[k] - model.lindblads()[k]).cwiseAbs().maxCoeff() <= 1e-12;
    }
    if (!same) throw InvalidArgument("environment: stored Lindblad operators disagree with the preset couplings");
  }
  return model;
}

}  // namespace qsd
