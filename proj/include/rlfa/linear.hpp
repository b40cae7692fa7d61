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

#ifndef RLFA_LINEAR_HPP_
#define RLFA_LINEAR_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlfa/mdp.hpp"
#include "rlfa/rng.hpp"

namespace rlfa {

// Feature map on a finite (state, action) grid: one d-vector per pair,
// stored as the row s * |A| + a of `values`.
struct FeatureMap {
  int num_states = 0;
  int num_actions = 0;
  Eigen::MatrixXd values;  // (S*A) x d

  int dim() const { return static_cast<int>(values.cols()); }
  Eigen::VectorXd at(int s, int a) const {
    return values.row(s * num_actions + a).transpose();
  }
  double MaxNorm() const { return values.rowwise().norm().maxCoeff(); }

  // Canonical one-hot embedding with d = S * A.
  static FeatureMap TabularOnehot(int num_states, int num_actions);

  nlohmann::json ToJson() const;
  static FeatureMap FromJson(const nlohmann::json& j);
};

// Factored MDP description: P_h(s'|s,a) = phi(s,a)^T measure[h] col s',
// r_h(s,a) = phi(s,a)^T theta[h].
struct LinearMDPSpec {
  FeatureMap features;
  std::vector<Eigen::VectorXd> theta;    // H x d
  std::vector<Eigen::MatrixXd> measure;  // H x (d x S)

  int horizon() const { return static_cast<int>(theta.size()); }
};

// Assembles the explicit MDP induced by a factored description and checks
// that every induced transition row is a distribution. The reward range of
// the result covers whatever values phi^T theta produces.
FiniteMDP BuildLinearMDP(const LinearMDPSpec& spec,
                         const std::vector<std::string>& states,
                         const std::vector<std::string>& actions,
                         const Eigen::VectorXd& initial);

// Every finite MDP is linear under the one-hot embedding; this returns that
// exact factorization (d = S * A).
LinearMDPSpec TabularEmbedding(const FiniteMDP& mdp);

// Accumulator for ridge regression with the n-scaled regularizer
// Lambda = X^T X + n lambda I, n being the number of added rows. Rows can
// be retargeted in place, which refits against new labels without touching
// the design.
class RidgeDesign {
 public:
  RidgeDesign(int dim, double lambda);

  void Add(const Eigen::VectorXd& phi, double target);
  void SetTarget(int row, double target) { targets_(row) = target; }

  int count() const { return count_; }
  int dim() const { return static_cast<int>(xtx_.rows()); }
  double lambda() const { return lambda_; }
  const Eigen::VectorXd& row_targets() const { return targets_; }
  Eigen::VectorXd RowFeatures(int row) const {
    return rows_.row(row).transpose();
  }

  // X^T X + n lambda I. With no rows this is lambda I, so the solve stays
  // defined.
  Eigen::MatrixXd RegularizedGram() const;
  Eigen::VectorXd Solve() const;

 private:
  Eigen::MatrixXd rows_;    // capacity-grown storage, first count_ rows live
  Eigen::VectorXd targets_;
  Eigen::MatrixXd xtx_;
  double lambda_;
  int count_ = 0;
};

// Exploration bonus beta * sqrt(phi^T Gram^{-1} phi). The factored overload
// reuses one factorization across many probe points.
double UcbBonus(const Eigen::VectorXd& phi, const Eigen::MatrixXd& gram,
                double beta);
double UcbBonus(const Eigen::VectorXd& phi,
                const Eigen::LDLT<Eigen::MatrixXd>& gram_solver, double beta);

struct ClosureReport {
  // Worst least-squares residual (sup norm over the grid) across all probes.
  double max_residual = 0.0;
  std::vector<double> residuals;  // one entry per probe
};

// Probes whether the Bellman image of arbitrary bounded functions stays in
// the span of the features: for random f draws, regresses
// r_h + P_h max_a f(., a) onto the feature rows and records the residual.
// Exactly zero (up to arithmetic) iff the MDP factors through the features.
ClosureReport CheckBellmanClosure(const FiniteMDP& mdp,
                                  const FeatureMap& features,
                                  int num_functions, RngStream& rng);

// Same probe for the value functions of random stochastic policies: each
// Q^pi_h must be representable as phi^T w.
ClosureReport CheckPolicyValueClosure(const FiniteMDP& mdp,
                                      const FeatureMap& features,
                                      int num_policies, RngStream& rng);

}  // namespace rlfa

#endif  // RLFA_LINEAR_HPP_
