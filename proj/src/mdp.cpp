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

#include "rlfa/mdp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rlfa {
namespace {

constexpr double kStochasticTol = 1e-9;

void CheckDistribution(const Eigen::VectorXd& p, const std::string& what) {
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) < -kStochasticTol) {
      std::ostringstream msg;
      msg << what << ": negative probability " << p(i) << " at index " << i;
      throw ValidationError(msg.str());
    }
    sum += p(i);
  }
  if (std::abs(sum - 1.0) > kStochasticTol) {
    std::ostringstream msg;
    msg << what << ": probabilities sum to " << sum;
    throw ValidationError(msg.str());
  }
}

}  // namespace

void FiniteMDP::Validate() const {
  const int S = num_states();
  const int A = num_actions();
  if (horizon <= 0) throw ValidationError("horizon must be positive");
  if (S <= 0) throw ValidationError("state list is empty");
  if (A <= 0) throw ValidationError("action list is empty");
  if (static_cast<int>(transition.size()) != horizon) {
    throw ValidationError("transition tensor does not cover every step");
  }
  if (static_cast<int>(reward.size()) != horizon) {
    throw ValidationError("reward tensor does not cover every step");
  }
  if (!(reward_min <= reward_max)) {
    throw ValidationError("reward range is empty");
  }
  for (int h = 0; h < horizon; ++h) {
    if (transition[h].rows() != S * A || transition[h].cols() != S) {
      std::ostringstream msg;
      msg << "transition matrix at step " << h << " has shape "
          << transition[h].rows() << "x" << transition[h].cols()
          << ", expected " << S * A << "x" << S;
      throw ValidationError(msg.str());
    }
    if (reward[h].size() != S * A) {
      std::ostringstream msg;
      msg << "reward vector at step " << h << " has length "
          << reward[h].size() << ", expected " << S * A;
      throw ValidationError(msg.str());
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const int row = sa_index(s, a);
        std::ostringstream what;
        what << "transition row (h=" << h << ", s=" << s << ", a=" << a << ")";
        CheckDistribution(transition[h].row(row).transpose(), what.str());
        const double r = reward[h](row);
        if (r < reward_min - kStochasticTol || r > reward_max + kStochasticTol) {
          std::ostringstream msg;
          msg << "reward " << r << " at (h=" << h << ", s=" << s << ", a=" << a
              << ") outside [" << reward_min << ", " << reward_max << "]";
          throw ValidationError(msg.str());
        }
      }
    }
  }
  if (initial.size() != S) {
    throw ValidationError("initial distribution length does not match states");
  }
  CheckDistribution(initial, "initial distribution");
}

nlohmann::json FiniteMDP::ToJson() const {
  nlohmann::json j;
  j["H"] = horizon;
  j["states"] = states;
  j["actions"] = actions;
  const int S = num_states();
  const int A = num_actions();
  nlohmann::json p = nlohmann::json::array();
  nlohmann::json r = nlohmann::json::array();
  for (int h = 0; h < horizon; ++h) {
    nlohmann::json ph = nlohmann::json::array();
    nlohmann::json rh = nlohmann::json::array();
    for (int s = 0; s < S; ++s) {
      nlohmann::json ps = nlohmann::json::array();
      nlohmann::json rs = nlohmann::json::array();
      for (int a = 0; a < A; ++a) {
        const int row = sa_index(s, a);
        nlohmann::json pa = nlohmann::json::array();
        for (int sn = 0; sn < S; ++sn) pa.push_back(transition[h](row, sn));
        ps.push_back(pa);
        rs.push_back(reward[h](row));
      }
      ph.push_back(ps);
      rh.push_back(rs);
    }
    p.push_back(ph);
    r.push_back(rh);
  }
  j["P"] = p;
  j["r"] = r;
  nlohmann::json mu = nlohmann::json::array();
  for (int s = 0; s < S; ++s) mu.push_back(initial(s));
  j["mu"] = mu;
  if (reward_min != 0.0 || reward_max != 1.0) {
    j["reward_range"] = {reward_min, reward_max};
  }
  return j;
}

FiniteMDP FiniteMDP::FromJson(const nlohmann::json& j) {
  FiniteMDP m;
  try {
    m.horizon = j.at("H").get<int>();
    m.states = j.at("states").get<std::vector<std::string>>();
    m.actions = j.at("actions").get<std::vector<std::string>>();
    const int S = m.num_states();
    const int A = m.num_actions();
    const auto& p = j.at("P");
    const auto& r = j.at("r");
    if (static_cast<int>(p.size()) != m.horizon ||
        static_cast<int>(r.size()) != m.horizon) {
      throw ValidationError("P and r must have one entry per step");
    }
    for (int h = 0; h < m.horizon; ++h) {
      Eigen::MatrixXd ph(S * A, S);
      Eigen::VectorXd rh(S * A);
      if (static_cast<int>(p[h].size()) != S ||
          static_cast<int>(r[h].size()) != S) {
        throw ValidationError("P[h] and r[h] must have one entry per state");
      }
      for (int s = 0; s < S; ++s) {
        if (static_cast<int>(p[h][s].size()) != A ||
            static_cast<int>(r[h][s].size()) != A) {
          throw ValidationError("P[h][s] and r[h][s] must have one entry per action");
        }
        for (int a = 0; a < A; ++a) {
          if (static_cast<int>(p[h][s][a].size()) != S) {
            throw ValidationError("P[h][s][a] must have one entry per successor state");
          }
          for (int sn = 0; sn < S; ++sn) {
            ph(m.sa_index(s, a), sn) = p[h][s][a][sn].get<double>();
          }
          rh(m.sa_index(s, a)) = r[h][s][a].get<double>();
        }
      }
      m.transition.push_back(std::move(ph));
      m.reward.push_back(std::move(rh));
    }
    const auto& mu = j.at("mu");
    if (static_cast<int>(mu.size()) != S) {
      throw ValidationError("mu must have one entry per state");
    }
    m.initial.resize(S);
    for (int s = 0; s < S; ++s) m.initial(s) = mu[s].get<double>();
    if (j.contains("reward_range")) {
      m.reward_min = j["reward_range"][0].get<double>();
      m.reward_max = j["reward_range"][1].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed MDP document: ") + e.what());
  }
  m.Validate();
  return m;
}

void Policy::Validate(const FiniteMDP& mdp) const {
  if (horizon() != mdp.horizon) {
    throw ValidationError("policy does not cover every step");
  }
  for (int h = 0; h < mdp.horizon; ++h) {
    if (table[h].rows() != mdp.num_states() ||
        table[h].cols() != mdp.num_actions()) {
      throw ValidationError("policy table shape mismatch at step " +
                            std::to_string(h));
    }
    for (int s = 0; s < mdp.num_states(); ++s) {
      std::ostringstream what;
      what << "policy row (h=" << h << ", s=" << s << ")";
      CheckDistribution(table[h].row(s).transpose(), what.str());
    }
  }
}

Policy Policy::Deterministic(const std::vector<std::vector<int>>& choice,
                             int num_actions) {
  Policy pi;
  for (const auto& per_state : choice) {
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(per_state.size()), num_actions);
    for (std::size_t s = 0; s < per_state.size(); ++s) {
      row(static_cast<Eigen::Index>(s), per_state[s]) = 1.0;
    }
    pi.table.push_back(std::move(row));
  }
  return pi;
}

Eigen::VectorXd QFunction::MaxValues(int h) const {
  return table[h].rowwise().maxCoeff();
}

Eigen::VectorXd QFunction::ValuesUnder(const Policy& pi, int h) const {
  return (table[h].array() * pi.table[h].array()).rowwise().sum();
}

Eigen::VectorXd ApplyBellman(const FiniteMDP& mdp, int h,
                             const Eigen::VectorXd& v_next) {
  return mdp.reward[h] + mdp.transition[h] * v_next;
}

Eigen::VectorXd ApplyBellmanOptimal(const FiniteMDP& mdp, int h,
                                    const Eigen::MatrixXd& q_next) {
  return ApplyBellman(mdp, h, q_next.rowwise().maxCoeff());
}

ExactSolution SolveExact(const FiniteMDP& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  ExactSolution sol;
  sol.q_star.table.assign(mdp.horizon, Eigen::MatrixXd::Zero(S, A));
  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(S);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const Eigen::VectorXd q = ApplyBellman(mdp, h, v_next);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        sol.q_star.table[h](s, a) = q(mdp.sa_index(s, a));
      }
    }
    v_next = sol.q_star.MaxValues(h);
  }
  std::vector<std::vector<int>> greedy(mdp.horizon, std::vector<int>(S, 0));
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < S; ++s) {
      int best = 0;
      for (int a = 1; a < A; ++a) {
        // Strict improvement only, so ties keep the lowest action index.
        if (sol.q_star.table[h](s, a) > sol.q_star.table[h](s, best)) best = a;
      }
      greedy[h][s] = best;
    }
  }
  sol.pi_star = Policy::Deterministic(greedy, A);
  sol.j_star = mdp.initial.dot(sol.q_star.MaxValues(0));
  return sol;
}

PolicyEvaluation EvaluatePolicy(const FiniteMDP& mdp, const Policy& pi) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  PolicyEvaluation out;
  out.q.table.assign(mdp.horizon, Eigen::MatrixXd::Zero(S, A));
  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(S);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const Eigen::VectorXd q = ApplyBellman(mdp, h, v_next);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        out.q.table[h](s, a) = q(mdp.sa_index(s, a));
      }
    }
    v_next = out.q.ValuesUnder(pi, h);
  }
  out.j = mdp.initial.dot(v_next);
  return out;
}

std::vector<OccupancyMeasure> ComputeOccupancy(const FiniteMDP& mdp,
                                               const Policy& pi) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<OccupancyMeasure> occ(mdp.horizon);
  Eigen::VectorXd state_marginal = mdp.initial;
  for (int h = 0; h < mdp.horizon; ++h) {
    occ[h].step = h;
    occ[h].probs.resize(S * A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        occ[h].probs(mdp.sa_index(s, a)) = state_marginal(s) * pi.prob(h, s, a);
      }
    }
    if (h + 1 < mdp.horizon) {
      state_marginal = mdp.transition[h].transpose() * occ[h].probs;
    }
  }
  return occ;
}

Policy SoftmaxPolicy(const QFunction& q, double beta) {
  Policy pi;
  for (int h = 0; h < q.horizon(); ++h) {
    const Eigen::MatrixXd& t = q.table[h];
    Eigen::MatrixXd rows(t.rows(), t.cols());
    for (int s = 0; s < t.rows(); ++s) {
      const double m = t.row(s).maxCoeff();
      Eigen::ArrayXd e = (beta * (t.row(s).transpose().array() - m)).exp();
      rows.row(s) = (e / e.sum()).transpose();
    }
    pi.table.push_back(std::move(rows));
  }
  return pi;
}

SoftmaxGapCertificate SoftmaxGapBound(const FiniteMDP& mdp, const QFunction& q,
                                      double beta) {
  const ExactSolution exact = SolveExact(mdp);
  const Policy pi_q = SoftmaxPolicy(q, beta);
  const double j_q = EvaluatePolicy(mdp, pi_q).j;

  SoftmaxGapCertificate cert;
  cert.gap = exact.j_star - j_q;
  if (beta <= 0.0) {
    cert.entropy_term = std::numeric_limits<double>::infinity();
    cert.bound = cert.entropy_term;
    return cert;
  }
  cert.entropy_term =
      mdp.horizon * std::log(static_cast<double>(mdp.num_actions())) / beta;

  // The expectation is taken along trajectories of the softmax policy built
  // from the exact Q, not from the approximate one.
  const Policy pi_ref = SoftmaxPolicy(exact.q_star, beta);
  const auto occ = ComputeOccupancy(mdp, pi_ref);
  double total = 0.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.num_states(); ++s) {
      double marginal = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        marginal += occ[h].probs(mdp.sa_index(s, a));
      }
      const double dev =
          (exact.q_star.table[h].row(s) - q.table[h].row(s)).cwiseAbs().maxCoeff();
      total += marginal * dev;
    }
  }
  cert.error_term = 2.0 * beta * mdp.horizon * total;
  cert.bound = cert.entropy_term + cert.error_term;
  return cert;
}

}  // namespace rlfa
