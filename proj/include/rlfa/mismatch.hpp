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

#ifndef RLFA_MISMATCH_HPP_
#define RLFA_MISMATCH_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <vector>

#include "rlfa/kernel.hpp"
#include "rlfa/mdp.hpp"
#include "rlfa/simulator.hpp"

namespace rlfa {

// Finite collection of probability vectors over a shared support grid.
struct DistributionSet {
  std::vector<Eigen::VectorXd> members;

  int size() const { return static_cast<int>(members.size()); }
  int support_size() const {
    return members.empty() ? 0 : static_cast<int>(members[0].size());
  }
  void Validate() const;
};

// Seminorm sup_{rho in Pi} |<g, rho>| for g given by values on the grid.
double PiNorm(const Eigen::VectorXd& g, const DistributionSet& pi);

// Worst-case inner product of distributions in Pi with functions that have
// unit native norm and L2(nu) norm at most epsilon, everything restricted
// to a common finite support.
struct PerturbationInstance {
  std::vector<Eigen::VectorXd> support;
  Eigen::MatrixXd gram;   // kernel on the support
  Eigen::VectorXd nu;     // probability vector, zeros allowed
  double epsilon = 0.0;
  DistributionSet pi;

  static PerturbationInstance Make(const Kernel& kernel,
                                   std::vector<Eigen::VectorXd> support,
                                   Eigen::VectorXd nu, double epsilon,
                                   DistributionSet pi);
  void Validate() const;
};

struct ResponseResult {
  double value = 0.0;             // certified optimum (dual side)
  int argmax_member = -1;         // which rho attains it
  Eigen::VectorXd witness;        // values of the maximizing g on the grid
  double witness_value = 0.0;     // <witness, argmax rho>, feasible side
  double dual_gap = 0.0;          // value - witness_value, >= 0
  std::vector<double> per_member;
  std::vector<double> per_member_gap;
};

// Exact solve: for each rho the maximization of <g, rho> over the
// intersection of the two ellipsoid constraints reduces by duality to a
// one-dimensional convex minimization over the multiplier split, handled by
// golden-section search. The witness is rescaled into the feasible set so
// value - witness_value brackets the truth.
ResponseResult PerturbationResponse(const PerturbationInstance& instance);

struct DeltaResult {
  double value = 0.0;  // smallest response over the sampling candidates
  int argmin_candidate = -1;
  std::vector<double> per_candidate;
};

// Minimizes the response over a finite list of sampling distributions.
// Because the true minimum ranges over all of P(support), the returned
// value is an upper bound that tightens as the candidate list grows.
DeltaResult DeltaComplexity(const Kernel& kernel,
                            const std::vector<Eigen::VectorXd>& support,
                            const DistributionSet& pi, double epsilon,
                            const std::vector<Eigen::VectorXd>& nu_candidates);

// Uniform, every member of Pi, pairwise member midpoints, and member
// mixtures with uniform. Cheap and covers the minimizers seen in practice.
std::vector<Eigen::VectorXd> DefaultNuCandidates(const DistributionSet& pi);

// Every probability vector with entries that are multiples of
// 1/resolution. Size grows as binom(resolution + support_size - 1,
// support_size - 1); throws once that exceeds 200000.
std::vector<Eigen::VectorXd> SimplexMeshCandidates(int support_size,
                                                   int resolution);

// Deterministic local descent on nu -> max_rho response(nu, rho): moves
// mass between atom pairs with a shrinking step, keeping the best
// improvement each round. Returns a distribution whose response is no
// worse than the start's.
Eigen::VectorXd RefineNuCandidate(const Kernel& kernel,
                                  const std::vector<Eigen::VectorXd>& support,
                                  const DistributionSet& pi, double epsilon,
                                  Eigen::VectorXd start, int rounds = 60);

enum class ReachableMode { kEnumerate, kSample };

// State-action distributions reachable at each step: exact vertex
// enumeration over deterministic policies (deduplicated), or occupancies of
// randomly drawn stochastic policies.
struct ReachableSet {
  std::vector<DistributionSet> per_step;  // index h
  DistributionSet United() const;
};

ReachableSet ComputeReachable(const FiniteMDP& mdp, ReachableMode mode,
                              int num_samples = 0, std::uint64_t seed = 0);

struct ConcentrationResult {
  double value = 1.0;  // +inf when some rho puts mass outside supp(nu)
  int worst_step = -1;
  int worst_member = -1;
  int offending_atom = -1;  // grid index with rho > 0, nu = 0
};

// max over steps and members of ||d rho / d nu||_{L2(nu)} =
// sqrt(sum_x rho(x)^2 / nu(x)). At least 1 for any pair of distributions.
ConcentrationResult ConcentrationCoefficient(
    const std::vector<Eigen::VectorXd>& nu_per_step,
    const std::vector<DistributionSet>& rho_per_step);

// Deterministic sphere-walk family: states are spherical coordinates of
// S^{d-1} (d-1 angles, polar entries in [0, pi], azimuth in [0, 2 pi)), two
// actions nudge the angle indexed by h mod (d-1) by +delta or -delta with
// wraparound, the start is uniform on the sphere. Rewards are attached
// separately as kernel expansions over embedded sphere points.
struct CurseFamily {
  ContinuousMDP dynamics;  // reward callback starts at identically zero
  int sphere_dim = 0;      // d
  double delta = 0.0;

  // Cartesian embedding of an angle state, unit norm.
  static Eigen::VectorXd Embed(const Eigen::VectorXd& angles);
  // Inverse of Embed up to angle wrapping.
  static Eigen::VectorXd ToAngles(const Eigen::VectorXd& unit_point);
};

CurseFamily MakeCurseFamily(int sphere_dim, int horizon, double delta);

// Kernel expansion with coefficients scaled to unit native norm:
// g = sum_i c_i k(centers_i, .) with c^T K c = 1.
struct KernelExpansion {
  Kernel kernel;
  std::vector<Eigen::VectorXd> centers;
  Eigen::VectorXd coef;

  double Evaluate(const Eigen::VectorXd& x) const;
};

KernelExpansion RandomUnitBallFunction(const Kernel& kernel,
                                       std::vector<Eigen::VectorXd> centers,
                                       RngStream& rng);

// Installs per-step rewards r(h, s, a) = expansions[h](Embed(s)); the
// action does not enter, matching a kernel that only sees the state.
void AttachRewards(CurseFamily& family,
                   std::vector<KernelExpansion> expansions);

struct MismatchRecord {
  double epsilon;
  int nu_id;
  int rho_id;
  double response;
  double dual_gap;
};

// Columns: epsilon,nu_id,rho_id,response,dual_gap.
void WriteMismatchCsv(std::ostream& out,
                      const std::vector<MismatchRecord>& records);

}  // namespace rlfa

#endif  // RLFA_MISMATCH_HPP_
