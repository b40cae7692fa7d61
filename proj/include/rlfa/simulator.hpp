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

#ifndef RLFA_SIMULATOR_HPP_
#define RLFA_SIMULATOR_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "rlfa/mdp.hpp"
#include "rlfa/rng.hpp"

namespace rlfa {

enum class RewardNoise { kExact, kUnitGaussian };

// Generative-model access: the caller picks any (h, s, a) and receives a
// sampled successor and the reward, optionally corrupted by unit gaussian
// noise. Every call counts against the budget when one is declared.
class GenerativeModel {
 public:
  GenerativeModel(FiniteMDP mdp, std::uint64_t seed,
                  RewardNoise noise = RewardNoise::kExact,
                  std::optional<std::uint64_t> budget = std::nullopt);

  // Returns (next state, observed reward). Throws BudgetExhausted once the
  // declared budget is spent.
  std::pair<int, double> Query(int h, int s, int a);

  std::uint64_t query_count() const { return query_count_; }
  std::optional<std::uint64_t> budget() const { return budget_; }
  const FiniteMDP& mdp() const { return mdp_; }

 private:
  FiniteMDP mdp_;
  RngStream transition_rng_;
  RngStream noise_rng_;
  RewardNoise noise_;
  std::optional<std::uint64_t> budget_;
  std::uint64_t query_count_ = 0;
};

struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<int> next_states;
};

// Episodic access: episodes start from the initial distribution (or from a
// chosen state when the simulator was built to allow it) and must be
// stepped in order.
class EpisodicSimulator {
 public:
  EpisodicSimulator(FiniteMDP mdp, std::uint64_t seed,
                    bool allow_chosen_start = false);

  int BeginEpisode();
  // Only available when allow_chosen_start was set at construction.
  int BeginEpisodeAt(int s);

  // Returns (reward, next state). Throws ValidationError if no episode is
  // active.
  std::pair<double, int> Step(int a);

  Trajectory Rollout(const Policy& pi);

  bool episode_active() const { return active_; }
  int current_step() const { return step_; }
  int current_state() const { return state_; }
  std::uint64_t episodes_started() const { return episodes_; }
  const FiniteMDP& mdp() const { return mdp_; }

 private:
  FiniteMDP mdp_;
  RngStream rng_;
  bool allow_chosen_start_;
  bool active_ = false;
  int step_ = 0;
  int state_ = 0;
  std::uint64_t episodes_ = 0;
};

// Per-episode regret record against the exact optimum of the environment.
// The optimum is solved once per ledger and cached.
struct RegretLedger {
  struct Entry {
    std::uint64_t episode;
    double j_star;
    double j_policy;
    double regret;      // j_star - j_policy
    double cumulative;  // running sum including this entry
  };
  std::vector<Entry> entries;
  double cumulative = 0.0;
  std::optional<double> cached_j_star;
};

// Evaluates the behavior policy of one episode exactly and appends the
// instantaneous regret.
void RecordRegret(RegretLedger& ledger, const FiniteMDP& mdp,
                  const Policy& pi);

// Deterministic continuous-state MDP over vector states with finitely many
// actions. Dynamics and rewards are callbacks; only the initial state is
// random.
struct ContinuousMDP {
  int horizon = 0;
  int num_actions = 0;
  int state_dim = 0;
  std::function<Eigen::VectorXd(RngStream&)> sample_initial;
  std::function<Eigen::VectorXd(int h, const Eigen::VectorXd& s, int a)> step;
  std::function<double(int h, const Eigen::VectorXd& s, int a)> reward;
};

struct ContinuousTrajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<int> actions;
  std::vector<double> rewards;
};

using ContinuousPolicy =
    std::function<int(int h, const Eigen::VectorXd& s, RngStream&)>;

ContinuousTrajectory RolloutContinuous(const ContinuousMDP& mdp,
                                       const ContinuousPolicy& pi,
                                       RngStream& rng);

// Columns: episode,h,s,a,r,s_next with 1-based episode and step indices.
// Comment rows (# key=value) carry the seed so files regenerate bit-for-bit.
void WriteTrajectoriesCsv(std::ostream& out,
                          const std::vector<Trajectory>& trajectories,
                          std::uint64_t seed);

// Columns: episode,j_star,j_policy,regret,cumulative_regret.
void WriteRegretCsv(std::ostream& out, const RegretLedger& ledger,
                    std::uint64_t seed);

}  // namespace rlfa

#endif  // RLFA_SIMULATOR_HPP_
