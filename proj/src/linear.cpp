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

#include "rlfa/linear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rlfa {

FeatureMap FeatureMap::TabularOnehot(int num_states, int num_actions) {
  FeatureMap f;
  f.num_states = num_states;
  f.num_actions = num_actions;
  f.values = Eigen::MatrixXd::Identity(num_states * num_actions,
                                       num_states * num_actions);
  return f;
}

nlohmann::json FeatureMap::ToJson() const {
  nlohmann::json j;
  const bool onehot =
      values.rows() == values.cols() &&
      values.isApprox(Eigen::MatrixXd::Identity(values.rows(), values.cols()));
  j["kind"] = onehot ? "tabular-onehot" : "custom-grid";
  j["d"] = dim();
  j["num_states"] = num_states;
  j["num_actions"] = num_actions;
  if (!onehot) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < values.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < values.cols(); ++c) row.push_back(values(r, c));
      rows.push_back(row);
    }
    j["values"] = rows;
  }
  return j;
}

FeatureMap FeatureMap::FromJson(const nlohmann::json& j) {
  FeatureMap f;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    f.num_states = j.at("num_states").get<int>();
    f.num_actions = j.at("num_actions").get<int>();
    const int d = j.at("d").get<int>();
    const int rows = f.num_states * f.num_actions;
    if (kind == "tabular-onehot") {
      if (d != rows) {
        throw ValidationError("tabular-onehot features require d = |S||A|");
      }
      f.values = Eigen::MatrixXd::Identity(rows, rows);
    } else if (kind == "custom-grid") {
      const auto& vals = j.at("values");
      if (static_cast<int>(vals.size()) != rows) {
        throw ValidationError("feature map must provide one row per (s, a)");
      }
      f.values.resize(rows, d);
      for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(vals[r].size()) != d) {
          throw ValidationError("feature row length does not match d");
        }
        for (int c = 0; c < d; ++c) f.values(r, c) = vals[r][c].get<double>();
      }
    } else {
      throw ValidationError("unknown feature map kind: " + kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed feature map document: ") +
                          e.what());
  }
  return f;
}

FiniteMDP BuildLinearMDP(const LinearMDPSpec& spec,
                         const std::vector<std::string>& states,
                         const std::vector<std::string>& actions,
                         const Eigen::VectorXd& initial) {
  const int S = static_cast<int>(states.size());
  const int A = static_cast<int>(actions.size());
  const int H = spec.horizon();
  if (spec.features.num_states != S || spec.features.num_actions != A) {
    throw ValidationError("feature grid does not match the state-action sets");
  }
  if (static_cast<int>(spec.measure.size()) != H) {
    throw ValidationError("factored description needs one measure per step");
  }
  FiniteMDP m;
  m.horizon = H;
  m.states = states;
  m.actions = actions;
  m.initial = initial;
  const int d = spec.features.dim();
  for (int h = 0; h < H; ++h) {
    if (spec.theta[h].size() != d || spec.measure[h].rows() != d ||
        spec.measure[h].cols() != S) {
      std::ostringstream msg;
      msg << "factored parameter shapes at step " << h
          << " do not match the feature dimension";
      throw ValidationError(msg.str());
    }
    m.transition.push_back(spec.features.values * spec.measure[h]);
    m.reward.push_back(spec.features.values * spec.theta[h]);
  }
  // Induced rewards live wherever phi^T theta puts them; record the actual
  // range so validation checks coherence rather than a fixed normalization.
  double lo = 0.0, hi = 1.0;
  for (int h = 0; h < H; ++h) {
    lo = std::min(lo, m.reward[h].minCoeff());
    hi = std::max(hi, m.reward[h].maxCoeff());
  }
  m.reward_min = lo;
  m.reward_max = hi;
  m.Validate();
  return m;
}

LinearMDPSpec TabularEmbedding(const FiniteMDP& mdp) {
  LinearMDPSpec spec;
  spec.features = FeatureMap::TabularOnehot(mdp.num_states(), mdp.num_actions());
  for (int h = 0; h < mdp.horizon; ++h) {
    spec.theta.push_back(mdp.reward[h]);
    spec.measure.push_back(mdp.transition[h]);
  }
  return spec;
}

RidgeDesign::RidgeDesign(int dim, double lambda)
    : rows_(0, dim),
      targets_(0),
      xtx_(Eigen::MatrixXd::Zero(dim, dim)),
      lambda_(lambda) {
  if (dim <= 0) throw ValidationError("feature dimension must be positive");
  if (lambda < 0.0) throw ValidationError("ridge multiplier must be nonnegative");
}

void RidgeDesign::Add(const Eigen::VectorXd& phi, double target) {
  if (phi.size() != xtx_.rows()) {
    throw ValidationError("feature length does not match the design dimension");
  }
  if (count_ == rows_.rows()) {
    const Eigen::Index grown = std::max<Eigen::Index>(16, rows_.rows() * 2);
    rows_.conservativeResize(grown, Eigen::NoChange);
    targets_.conservativeResize(grown);
  }
  rows_.row(count_) = phi.transpose();
  targets_(count_) = target;
  ++count_;
  xtx_.selfadjointView<Eigen::Lower>().rankUpdate(phi);
}

Eigen::MatrixXd RidgeDesign::RegularizedGram() const {
  Eigen::MatrixXd gram = xtx_.selfadjointView<Eigen::Lower>();
  const double n = std::max(count_, 1);
  gram.diagonal().array() += n * lambda_;
  return gram;
}

Eigen::VectorXd RidgeDesign::Solve() const {
  const Eigen::VectorXd moment =
      rows_.topRows(count_).transpose() * targets_.head(count_);
  return RegularizedGram().ldlt().solve(moment);
}

double UcbBonus(const Eigen::VectorXd& phi, const Eigen::MatrixXd& gram,
                double beta) {
  return UcbBonus(phi, gram.ldlt(), beta);
}

double UcbBonus(const Eigen::VectorXd& phi,
                const Eigen::LDLT<Eigen::MatrixXd>& gram_solver, double beta) {
  const double quad = phi.dot(gram_solver.solve(phi));
  return beta * std::sqrt(std::max(0.0, quad));
}

namespace {

// Sup-norm residual of the least-squares fit of y onto the feature rows.
double FitResidual(const Eigen::MatrixXd& features, const Eigen::VectorXd& y) {
  const Eigen::VectorXd w =
      features.colPivHouseholderQr().solve(y);
  return (features * w - y).cwiseAbs().maxCoeff();
}

}  // namespace

ClosureReport CheckBellmanClosure(const FiniteMDP& mdp,
                                  const FeatureMap& features,
                                  int num_functions, RngStream& rng) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  ClosureReport report;
  for (int trial = 0; trial < num_functions; ++trial) {
    Eigen::MatrixXd f(S, A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        f(s, a) = mdp.horizon * rng.Uniform();
      }
    }
    double worst = 0.0;
    const Eigen::VectorXd v = f.rowwise().maxCoeff();
    for (int h = 0; h < mdp.horizon; ++h) {
      worst = std::max(worst,
                       FitResidual(features.values, ApplyBellman(mdp, h, v)));
    }
    report.residuals.push_back(worst);
    report.max_residual = std::max(report.max_residual, worst);
  }
  return report;
}

ClosureReport CheckPolicyValueClosure(const FiniteMDP& mdp,
                                      const FeatureMap& features,
                                      int num_policies, RngStream& rng) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  ClosureReport report;
  for (int trial = 0; trial < num_policies; ++trial) {
    Policy pi;
    for (int h = 0; h < mdp.horizon; ++h) {
      Eigen::MatrixXd t(S, A);
      for (int s = 0; s < S; ++s) {
        double sum = 0.0;
        for (int a = 0; a < A; ++a) {
          // Exponential weights give a dense random point in the simplex.
          t(s, a) = -std::log(1.0 - rng.Uniform());
          sum += t(s, a);
        }
        t.row(s) /= sum;
      }
      pi.table.push_back(std::move(t));
    }
    const PolicyEvaluation eval = EvaluatePolicy(mdp, pi);
    double worst = 0.0;
    for (int h = 0; h < mdp.horizon; ++h) {
      Eigen::VectorXd q(S * A);
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) q(mdp.sa_index(s, a)) = eval.q.table[h](s, a);
      }
      worst = std::max(worst, FitResidual(features.values, q));
    }
    report.residuals.push_back(worst);
    report.max_residual = std::max(report.max_residual, worst);
  }
  return report;
}

}  // namespace rlfa
