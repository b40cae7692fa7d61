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

#ifndef RLFA_ALGORITHMS_HPP_
#define RLFA_ALGORITHMS_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rlfa/kernel.hpp"
#include "rlfa/linear.hpp"
#include "rlfa/mdp.hpp"
#include "rlfa/simulator.hpp"

namespace rlfa {

// Hypothesis space for value fitting: weights against a fixed feature map,
// or a kernel machine over embedded grid points (one point per (s, a) row).
// `ridge_lambda` scales with the sample count inside the fitters, matching
// the 1/n empirical loss convention.
struct FunctionClass {
  enum class Kind { kLinear, kKernel };
  Kind kind = Kind::kLinear;
  FeatureMap features;                       // kLinear
  std::optional<Kernel> kernel;              // kKernel
  std::vector<Eigen::VectorXd> grid_points;  // kKernel: embedding per row
  double ridge_lambda = 0.0;

  static FunctionClass Linear(FeatureMap features, double ridge_lambda);
  static FunctionClass KernelOnGrid(Kernel kernel,
                                    std::vector<Eigen::VectorXd> grid_points,
                                    double ridge_lambda);
};

// Common result shape for the learners below. Fields that a particular
// learner does not produce stay at their defaults.
struct AlgorithmReport {
  Policy policy;
  QFunction q;
  ValueModel model;
  std::vector<double> losses;          // per fitted step (value learners)
  std::vector<double> learning_curve;  // exact J per iteration
  RegretLedger ledger;
  std::vector<double> bonus_trace;     // largest bonus seen per episode
  long long clip_events = 0;
  double optimism_fraction = -1.0;     // fraction of optimistic grid values
  std::uint64_t queries_used = 0;
  nlohmann::json details;
};

// Draws per-step (state, action) query pairs from a distribution over the
// flattened grid.
std::vector<std::vector<std::pair<int, int>>> SamplePairs(
    int horizon, int samples_per_step, const Eigen::VectorXd& weights,
    int num_actions, RngStream& rng);

// Backward fitted Q-iteration against a generative model: at each step the
// given pairs are queried once, regression targets are r + max_a Q_next,
// fits are clipped to [0, H]. Exactly sum_h |pairs[h]| queries are spent.
// The returned policy is greedy in the clipped tables.
AlgorithmReport FittedQIteration(
    GenerativeModel& gm, const FunctionClass& fc,
    const std::vector<std::vector<std::pair<int, int>>>& pairs);

// Which sample count multiplies the ridge multiplier in the regularized
// Gram X^T X + n lambda I: the declared episode budget, or the number of
// episodes finished so far.
enum class RegularizerMode { kDeclaredBudget, kCurrentCount };

struct LsviUcbConfig {
  int episodes = 0;          // K
  double lambda = 1.0;       // ridge multiplier
  double bonus_beta = 1.0;   // bonus scale
  RegularizerMode regularizer = RegularizerMode::kDeclaredBudget;
};

// Optimistic least-squares value iteration in the episodic setting with
// linear features: each episode acts greedily in the current optimistic Q,
// then refits all steps backward on the full history and adds the
// elliptical bonus before clipping to [0, H]. The ledger holds the exact
// per-episode regret of the acted policies.
AlgorithmReport LsviUcb(EpisodicSimulator& sim, const FeatureMap& features,
                        const LsviUcbConfig& cfg);

// Per-(h, s, a) features for parameterized softmax policies:
// pi(a | s) at step h proportional to exp(theta . psi(h, s, a)).
struct PolicyFeatures {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  Eigen::MatrixXd values;  // (H*S*A) x d

  int dim() const { return static_cast<int>(values.cols()); }
  Eigen::VectorXd at(int h, int s, int a) const {
    return values.row((h * num_states + s) * num_actions + a).transpose();
  }
  static PolicyFeatures OneHot(int horizon, int num_states, int num_actions);
};

Policy SoftmaxFromParams(const PolicyFeatures& psi,
                         const Eigen::VectorXd& theta);

// Monte Carlo gradient: batch rollouts, score function times reward-to-go.
Eigen::VectorXd EstimatePolicyGradient(EpisodicSimulator& sim,
                                       const PolicyFeatures& psi,
                                       const Eigen::VectorXd& theta,
                                       int batch);

struct PolicyGradientConfig {
  int iterations = 0;    // K
  int batch = 0;         // N
  double step_size = 0;  // eta
  // Ascent is declared divergent past this parameter norm.
  double divergence_norm = 1e6;
};

// Vanilla ascent theta += eta * g with g from EstimatePolicyGradient. The
// learning curve holds the exact J of the iterate after each update.
// Throws NumericalError on divergence.
AlgorithmReport PolicyGradient(const FiniteMDP& mdp, const PolicyFeatures& psi,
                               const Eigen::VectorXd& theta0,
                               const PolicyGradientConfig& cfg,
                               std::uint64_t seed);

struct FittedRewardConfig {
  int samples_per_step = 0;  // n
  double norm_bound = 1.0;
  std::uint64_t pair_seed = 0;
  // Query every grid pair once per step instead of sampling from nu_hat.
  bool exhaustive = false;
};

// Reward-learning pipeline for known transitions: per step, noisy reward
// queries at pairs drawn from nu_hat are fit by kernel least squares
// constrained to the norm_bound ball (multiplier found by bisection until
// the fitted norm lands in [0.99, 1] of the bound, or zero if the
// interpolant is already inside). The fitted rewards are assembled with the
// true transitions and solved exactly; the report carries that optimal
// policy and the assembled model's Q. details["fitted_rewards"] holds the
// per-step fitted grid values.
AlgorithmReport FittedReward(GenerativeModel& gm, const Kernel& kernel,
                             const std::vector<Eigen::VectorXd>& grid_points,
                             const Eigen::VectorXd& nu_hat,
                             const FittedRewardConfig& cfg);

}  // namespace rlfa

#endif  // RLFA_ALGORITHMS_HPP_
