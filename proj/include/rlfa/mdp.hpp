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

#ifndef RLFA_MDP_HPP_
#define RLFA_MDP_HPP_

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlfa/errors.hpp"

namespace rlfa {

// Finite-horizon MDP with time-dependent transitions and rewards.
// Steps are indexed 0..horizon-1 internally. transition[h] has one row per
// (state, action) pair in row-major order (row = s * |A| + a) and one
// column per successor state; reward[h] follows the same row indexing.
struct FiniteMDP {
  int horizon = 0;
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<Eigen::MatrixXd> transition;  // horizon x (SA x S)
  std::vector<Eigen::VectorXd> reward;      // horizon x SA
  Eigen::VectorXd initial;                  // S

  // Rewards are checked against this closed range at validation time.
  // The default matches the common normalization; instances built from
  // function-class samples may widen it.
  double reward_min = 0.0;
  double reward_max = 1.0;

  int num_states() const { return static_cast<int>(states.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }
  int sa_index(int s, int a) const { return s * num_actions() + a; }

  // Throws ValidationError naming the first offending entry. Row-sum and
  // nonnegativity tolerance is 1e-9.
  void Validate() const;

  nlohmann::json ToJson() const;
  static FiniteMDP FromJson(const nlohmann::json& j);
};

// Markov policy: one row-stochastic S x A matrix per step.
struct Policy {
  std::vector<Eigen::MatrixXd> table;

  int horizon() const { return static_cast<int>(table.size()); }
  double prob(int h, int s, int a) const { return table[h](s, a); }

  void Validate(const FiniteMDP& mdp) const;

  // Deterministic policy from an action index per (h, s).
  static Policy Deterministic(const std::vector<std::vector<int>>& choice,
                              int num_actions);
};

// State-action value function materialized on the finite grid, one S x A
// table per step. Producers that fit a parametric representation keep
// their parameters in ValueModel (see below); the table here is the
// evaluated view that every consumer reads.
struct QFunction {
  std::vector<Eigen::MatrixXd> table;

  int horizon() const { return static_cast<int>(table.size()); }
  double value(int h, int s, int a) const { return table[h](s, a); }

  // State values V(s) = max_a Q(s, a). State values are always derived
  // from Q, never stored on their own.
  Eigen::VectorXd MaxValues(int h) const;
  // State values V(s) = sum_a pi(a|s) Q(s, a).
  Eigen::VectorXd ValuesUnder(const Policy& pi, int h) const;
};

// Optional parametric payload attached to a QFunction by the producing
// algorithm: per-step weight vectors against a feature map, or per-step
// coefficients of a kernel expansion. Consumers that only need values use
// QFunction::table; tests inspect this to check representations.
struct ValueModel {
  enum class Kind { kTable, kLinear, kKernelExpansion };
  Kind kind = Kind::kTable;
  std::vector<Eigen::VectorXd> weights;   // kLinear: one d-vector per step
  std::vector<Eigen::VectorXd> coefs;     // kKernelExpansion
  std::vector<Eigen::MatrixXd> centers;   // kKernelExpansion: rows are points
};

// Distribution over (state, action) pairs visited at one step, stored as a
// length-SA vector in the same row order as FiniteMDP::transition.
struct OccupancyMeasure {
  int step = 0;
  Eigen::VectorXd probs;  // SA, sums to one
};

struct ExactSolution {
  QFunction q_star;
  Policy pi_star;   // greedy, lowest action index on ties
  double j_star = 0.0;
};

// Backward-induction solution of the Bellman optimality equations.
ExactSolution SolveExact(const FiniteMDP& mdp);

struct PolicyEvaluation {
  QFunction q;
  double j = 0.0;
};

// Backward-induction solution of the Bellman equations for a fixed policy.
PolicyEvaluation EvaluatePolicy(const FiniteMDP& mdp, const Policy& pi);

// Occupancy measures rho_1..rho_H by forward chaining from the initial
// distribution. Each returned vector sums to one up to accumulated
// rounding.
std::vector<OccupancyMeasure> ComputeOccupancy(const FiniteMDP& mdp,
                                               const Policy& pi);

// One application of the Bellman operator at step h: given state values
// v_next for step h+1 (length S, zero vector at the terminal step), returns
// the SA vector r_h + P_h v_next.
Eigen::VectorXd ApplyBellman(const FiniteMDP& mdp, int h,
                             const Eigen::VectorXd& v_next);

// Optimality variant: consumes the full successor Q table (S x A) and
// maximizes over actions inside.
Eigen::VectorXd ApplyBellmanOptimal(const FiniteMDP& mdp, int h,
                                    const Eigen::MatrixXd& q_next);

// Softmax policy pi(a|s) proportional to exp(beta * Q_h(s, a)). beta = 0
// gives the uniform policy. Shifted by the row max before exponentiation.
Policy SoftmaxPolicy(const QFunction& q, double beta);

// Two-sided certificate for the softmax suboptimality gap: the realized
// gap J* - J(softmax_beta(Q)) together with the certified upper bound
//   H log|A| / beta + 2 beta H sum_h E[max_a |Q*_h(S_h,a) - Q_h(S_h,a)|],
// the expectation taken over the state marginal of the occupancy of the
// softmax policy built from Q* itself.
struct SoftmaxGapCertificate {
  double gap = 0.0;        // J* - J(pi^{Q,beta}), nonnegative up to rounding
  double bound = 0.0;      // certified upper bound on the gap
  double entropy_term = 0.0;
  double error_term = 0.0;
};
SoftmaxGapCertificate SoftmaxGapBound(const FiniteMDP& mdp, const QFunction& q,
                                      double beta);

}  // namespace rlfa

#endif  // RLFA_MDP_HPP_
