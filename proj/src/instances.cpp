// Copyright 2026 The rlfa Authors
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

#include "rlfa/instances.hpp"

#include <cmath>

namespace rlfa {

std::vector<std::string> DefaultLabels(const std::string& prefix, int n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Eigen::VectorXd RandomSimplex(int n, RngStream& rng) {
  Eigen::VectorXd v(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    v(i) = -std::log(1.0 - rng.Uniform());
    sum += v(i);
  }
  return v / sum;
}

FiniteMDP RandomMDP(int num_states, int num_actions, int horizon,
                    RngStream& rng) {
  FiniteMDP m;
  m.horizon = horizon;
  m.states = DefaultLabels("s", num_states);
  m.actions = DefaultLabels("a", num_actions);
  const int rows = num_states * num_actions;
  for (int h = 0; h < horizon; ++h) {
    Eigen::MatrixXd p(rows, num_states);
    Eigen::VectorXd r(rows);
    for (int row = 0; row < rows; ++row) {
      p.row(row) = RandomSimplex(num_states, rng).transpose();
      r(row) = rng.Uniform();
    }
    m.transition.push_back(std::move(p));
    m.reward.push_back(std::move(r));
  }
  m.initial = RandomSimplex(num_states, rng);
  m.Validate();
  return m;
}

LinearMDPSpec RandomLinearSpec(int num_states, int num_actions, int horizon,
                               int dim, RngStream& rng) {
  LinearMDPSpec spec;
  spec.features.num_states = num_states;
  spec.features.num_actions = num_actions;
  const int rows = num_states * num_actions;
  spec.features.values.resize(rows, dim);
  for (int row = 0; row < rows; ++row) {
    spec.features.values.row(row) = RandomSimplex(dim, rng).transpose();
  }
  for (int h = 0; h < horizon; ++h) {
    Eigen::MatrixXd measure(dim, num_states);
    for (int i = 0; i < dim; ++i) {
      measure.row(i) = RandomSimplex(num_states, rng).transpose();
    }
    spec.measure.push_back(std::move(measure));
    Eigen::VectorXd theta(dim);
    for (int i = 0; i < dim; ++i) theta(i) = rng.Uniform();
    spec.theta.push_back(std::move(theta));
  }
  return spec;
}

std::vector<Eigen::VectorXd> SphereSamples(int dim, int count,
                                           RngStream& rng) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::vector<double> u = rng.UnitSphere(dim);
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x(j) = u[j];
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace rlfa
