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

#ifndef RLFA_INSTANCES_HPP_
#define RLFA_INSTANCES_HPP_

#include <string>
#include <vector>

#include "rlfa/linear.hpp"
#include "rlfa/mdp.hpp"
#include "rlfa/rng.hpp"

namespace rlfa {

std::vector<std::string> DefaultLabels(const std::string& prefix, int n);

// Flat Dirichlet point in the n-simplex.
Eigen::VectorXd RandomSimplex(int n, RngStream& rng);

// Dense random MDP: every transition row and the start distribution are
// flat Dirichlet draws, rewards are uniform on [0, 1].
FiniteMDP RandomMDP(int num_states, int num_actions, int horizon,
                    RngStream& rng);

// Random factored description whose induced MDP is exactly linear: feature
// rows are simplex points and measure rows are distributions, so induced
// transition rows are convex combinations of distributions; theta entries
// are uniform on [0, 1], keeping rewards in [0, 1].
LinearMDPSpec RandomLinearSpec(int num_states, int num_actions, int horizon,
                               int dim, RngStream& rng);

// Uniform samples on the unit sphere in R^dim.
std::vector<Eigen::VectorXd> SphereSamples(int dim, int count, RngStream& rng);

}  // namespace rlfa

#endif  // RLFA_INSTANCES_HPP_
