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

#include "rlfa/simulator.hpp"

#include <sstream>

#include "rlfa/format.hpp"

namespace rlfa {
namespace {

// Stream ids inside a simulator seed. Keeping transition and noise draws on
// separate streams means turning reward noise on or off cannot shift which
// successors get sampled.
constexpr std::uint64_t kTransitionStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kEpisodeStream = 3;

int SampleRow(const Eigen::MatrixXd& transition, int row, RngStream& rng) {
  const Eigen::VectorXd p = transition.row(row).transpose();
  return rng.Categorical(std::span<const double>(p.data(), p.size()));
}

}  // namespace

GenerativeModel::GenerativeModel(FiniteMDP mdp, std::uint64_t seed,
                                 RewardNoise noise,
                                 std::optional<std::uint64_t> budget)
    : mdp_(std::move(mdp)),
      transition_rng_(seed, kTransitionStream),
      noise_rng_(seed, kNoiseStream),
      noise_(noise),
      budget_(budget) {
  mdp_.Validate();
}

std::pair<int, double> GenerativeModel::Query(int h, int s, int a) {
  if (h < 0 || h >= mdp_.horizon || s < 0 || s >= mdp_.num_states() || a < 0 ||
      a >= mdp_.num_actions()) {
    std::ostringstream msg;
    msg << "query out of range: (h=" << h << ", s=" << s << ", a=" << a << ")";
    throw ValidationError(msg.str());
  }
  if (budget_ && query_count_ >= *budget_) {
    throw BudgetExhausted("generative model budget of " +
                          std::to_string(*budget_) + " queries spent");
  }
  ++query_count_;
  const int next = SampleRow(mdp_.transition[h], mdp_.sa_index(s, a),
                             transition_rng_);
  double r = mdp_.reward[h](mdp_.sa_index(s, a));
  if (noise_ == RewardNoise::kUnitGaussian) r += noise_rng_.Normal();
  return {next, r};
}

EpisodicSimulator::EpisodicSimulator(FiniteMDP mdp, std::uint64_t seed,
                                     bool allow_chosen_start)
    : mdp_(std::move(mdp)),
      rng_(seed, kEpisodeStream),
      allow_chosen_start_(allow_chosen_start) {
  mdp_.Validate();
}

int EpisodicSimulator::BeginEpisode() {
  const Eigen::VectorXd& mu = mdp_.initial;
  state_ = rng_.Categorical(std::span<const double>(mu.data(), mu.size()));
  step_ = 0;
  active_ = true;
  ++episodes_;
  return state_;
}

int EpisodicSimulator::BeginEpisodeAt(int s) {
  if (!allow_chosen_start_) {
    throw ValidationError(
        "this simulator only starts episodes from the initial distribution");
  }
  if (s < 0 || s >= mdp_.num_states()) {
    throw ValidationError("start state out of range");
  }
  state_ = s;
  step_ = 0;
  active_ = true;
  ++episodes_;
  return state_;
}

std::pair<double, int> EpisodicSimulator::Step(int a) {
  if (!active_) {
    throw ValidationError("Step called with no active episode");
  }
  if (a < 0 || a >= mdp_.num_actions()) {
    throw ValidationError("action out of range");
  }
  const int row = mdp_.sa_index(state_, a);
  const double r = mdp_.reward[step_](row);
  const int next = SampleRow(mdp_.transition[step_], row, rng_);
  ++step_;
  if (step_ >= mdp_.horizon) {
    active_ = false;
  }
  state_ = next;
  return {r, next};
}

Trajectory EpisodicSimulator::Rollout(const Policy& pi) {
  Trajectory t;
  int s = BeginEpisode();
  for (int h = 0; h < mdp_.horizon; ++h) {
    const Eigen::VectorXd row = pi.table[h].row(s).transpose();
    const int a =
        rng_.Categorical(std::span<const double>(row.data(), row.size()));
    const auto [r, next] = Step(a);
    t.states.push_back(s);
    t.actions.push_back(a);
    t.rewards.push_back(r);
    t.next_states.push_back(next);
    s = next;
  }
  return t;
}

void RecordRegret(RegretLedger& ledger, const FiniteMDP& mdp,
                  const Policy& pi) {
  if (!ledger.cached_j_star) {
    ledger.cached_j_star = SolveExact(mdp).j_star;
  }
  const double j = EvaluatePolicy(mdp, pi).j;
  RegretLedger::Entry e;
  e.episode = ledger.entries.size() + 1;
  e.j_star = *ledger.cached_j_star;
  e.j_policy = j;
  e.regret = e.j_star - j;
  ledger.cumulative += e.regret;
  e.cumulative = ledger.cumulative;
  ledger.entries.push_back(e);
}

ContinuousTrajectory RolloutContinuous(const ContinuousMDP& mdp,
                                       const ContinuousPolicy& pi,
                                       RngStream& rng) {
  ContinuousTrajectory t;
  Eigen::VectorXd s = mdp.sample_initial(rng);
  for (int h = 0; h < mdp.horizon; ++h) {
    const int a = pi(h, s, rng);
    t.states.push_back(s);
    t.actions.push_back(a);
    t.rewards.push_back(mdp.reward(h, s, a));
    s = mdp.step(h, s, a);
  }
  return t;
}

void WriteTrajectoriesCsv(std::ostream& out,
                          const std::vector<Trajectory>& trajectories,
                          std::uint64_t seed) {
  out << "# seed=" << seed << "\n";
  out << "episode,h,s,a,r,s_next\n";
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& t = trajectories[i];
    for (std::size_t h = 0; h < t.states.size(); ++h) {
      out << (i + 1) << "," << (h + 1) << "," << t.states[h] << ","
          << t.actions[h] << "," << FormatDouble(t.rewards[h]) << ","
          << t.next_states[h] << "\n";
    }
  }
}

void WriteRegretCsv(std::ostream& out, const RegretLedger& ledger,
                    std::uint64_t seed) {
  out << "# seed=" << seed << "\n";
  out << "episode,j_star,j_policy,regret,cumulative_regret\n";
  for (const auto& e : ledger.entries) {
    out << e.episode << "," << FormatDouble(e.j_star) << ","
        << FormatDouble(e.j_policy) << "," << FormatDouble(e.regret) << ","
        << FormatDouble(e.cumulative) << "\n";
  }
}

}  // namespace rlfa
