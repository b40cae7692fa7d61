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

#include "rlfa/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rlfa {
namespace {

// Greedy policy over Q tables, lowest action index on ties.
Policy GreedyFromTables(const QFunction& q) {
  std::vector<std::vector<int>> choice(q.horizon());
  for (int h = 0; h < q.horizon(); ++h) {
    choice[h].resize(q.table[h].rows());
    for (int s = 0; s < q.table[h].rows(); ++s) {
      int best = 0;
      for (int a = 1; a < q.table[h].cols(); ++a) {
        if (q.table[h](s, a) > q.table[h](s, best)) best = a;
      }
      choice[h][s] = best;
    }
  }
  return Policy::Deterministic(choice,
                               static_cast<int>(q.table[0].cols()));
}

double ClipTo(double v, double lo, double hi, long long* events) {
  if (v < lo) {
    ++*events;
    return lo;
  }
  if (v > hi) {
    ++*events;
    return hi;
  }
  return v;
}

}  // namespace

FunctionClass FunctionClass::Linear(FeatureMap features, double ridge_lambda) {
  FunctionClass fc;
  fc.kind = Kind::kLinear;
  fc.features = std::move(features);
  fc.ridge_lambda = ridge_lambda;
  return fc;
}

FunctionClass FunctionClass::KernelOnGrid(
    Kernel kernel, std::vector<Eigen::VectorXd> grid_points,
    double ridge_lambda) {
  FunctionClass fc;
  fc.kind = Kind::kKernel;
  fc.kernel = std::move(kernel);
  fc.grid_points = std::move(grid_points);
  fc.ridge_lambda = ridge_lambda;
  return fc;
}

std::vector<std::vector<std::pair<int, int>>> SamplePairs(
    int horizon, int samples_per_step, const Eigen::VectorXd& weights,
    int num_actions, RngStream& rng) {
  if (horizon <= 0 || samples_per_step <= 0) {
    throw ValidationError("pair sampling needs positive horizon and count");
  }
  std::vector<std::vector<std::pair<int, int>>> out(horizon);
  const std::span<const double> w(weights.data(),
                                  static_cast<std::size_t>(weights.size()));
  for (int h = 0; h < horizon; ++h) {
    out[h].reserve(samples_per_step);
    for (int i = 0; i < samples_per_step; ++i) {
      const int idx = rng.Categorical(w);
      out[h].emplace_back(idx / num_actions, idx % num_actions);
    }
  }
  return out;
}

AlgorithmReport FittedQIteration(
    GenerativeModel& gm, const FunctionClass& fc,
    const std::vector<std::vector<std::pair<int, int>>>& pairs) {
  const FiniteMDP& mdp = gm.mdp();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int H = mdp.horizon;
  if (static_cast<int>(pairs.size()) != H) {
    throw ValidationError("need one pair list per step");
  }
  if (fc.kind == FunctionClass::Kind::kKernel &&
      static_cast<int>(fc.grid_points.size()) != S * A) {
    throw ValidationError("kernel class needs one grid point per (s, a)");
  }

  AlgorithmReport report;
  report.q.table.assign(H, Eigen::MatrixXd::Zero(S, A));
  report.losses.assign(H, 0.0);
  report.model.kind = fc.kind == FunctionClass::Kind::kLinear
                          ? ValueModel::Kind::kLinear
                          : ValueModel::Kind::kKernelExpansion;
  report.model.weights.assign(H, Eigen::VectorXd());
  report.model.coefs.assign(H, Eigen::VectorXd());
  report.model.centers.assign(H, Eigen::MatrixXd());
  const std::uint64_t queries_before = gm.query_count();

  for (int h = H - 1; h >= 0; --h) {
    const int n = static_cast<int>(pairs[h].size());
    if (n == 0) throw ValidationError("empty pair list");
    Eigen::VectorXd targets(n);
    std::vector<int> rows(n);
    for (int i = 0; i < n; ++i) {
      const auto [s, a] = pairs[h][i];
      const auto [next, r] = gm.Query(h, s, a);
      double y = r;
      if (h + 1 < H) y += report.q.table[h + 1].row(next).maxCoeff();
      targets(i) = y;
      rows[i] = mdp.sa_index(s, a);
    }

    // Fitted values on the whole grid before clipping.
    Eigen::VectorXd fitted(S * A);
    if (fc.kind == FunctionClass::Kind::kLinear) {
      RidgeDesign design(fc.features.dim(), fc.ridge_lambda);
      for (int i = 0; i < n; ++i) {
        design.Add(fc.features.values.row(rows[i]).transpose(), targets(i));
      }
      const Eigen::VectorXd w = design.Solve();
      fitted = fc.features.values * w;
      report.model.weights[h] = w;
      double mse = 0.0;
      for (int i = 0; i < n; ++i) {
        const double e = fitted(rows[i]) - targets(i);
        mse += e * e;
      }
      report.losses[h] = mse / n;
    } else {
      std::vector<Eigen::VectorXd> xs(n);
      for (int i = 0; i < n; ++i) xs[i] = fc.grid_points[rows[i]];
      const KrrModel krr =
          KrrFit(*fc.kernel, std::move(xs), targets, fc.ridge_lambda);
      for (int row = 0; row < S * A; ++row) {
        fitted(row) = krr.Predict(fc.grid_points[row]);
      }
      report.model.coefs[h] = krr.coef;
      Eigen::MatrixXd centers(n, fc.grid_points[0].size());
      for (int i = 0; i < n; ++i) centers.row(i) = krr.points[i].transpose();
      report.model.centers[h] = std::move(centers);
      double mse = 0.0;
      for (int i = 0; i < n; ++i) {
        const double e = fitted(rows[i]) - targets(i);
        mse += e * e;
      }
      report.losses[h] = mse / n;
    }

    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        report.q.table[h](s, a) = ClipTo(fitted(mdp.sa_index(s, a)), 0.0,
                                         static_cast<double>(H),
                                         &report.clip_events);
      }
    }
  }

  report.policy = GreedyFromTables(report.q);
  report.queries_used = gm.query_count() - queries_before;
  report.details["queries"] = report.queries_used;
  return report;
}

AlgorithmReport LsviUcb(EpisodicSimulator& sim, const FeatureMap& features,
                        const LsviUcbConfig& cfg) {
  const FiniteMDP& mdp = sim.mdp();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int H = mdp.horizon;
  const int d = features.dim();
  if (cfg.episodes <= 0) throw ValidationError("episode budget must be positive");
  if (cfg.lambda < 0.0 || cfg.bonus_beta < 0.0) {
    throw ValidationError("lambda and bonus scale must be nonnegative");
  }
  if (features.num_states != S || features.num_actions != A) {
    throw ValidationError("feature grid does not match the environment");
  }

  const ExactSolution exact = SolveExact(mdp);

  // Full history per step: flattened grid row, reward, successor.
  struct Sample {
    int row;
    double reward;
    int next;
  };
  std::vector<std::vector<Sample>> history(H);
  std::vector<Eigen::MatrixXd> gram(
      H, Eigen::MatrixXd::Zero(d, d));  // running sum of phi phi^T

  AlgorithmReport report;
  report.q.table.assign(H, Eigen::MatrixXd::Zero(S, A));
  report.model.kind = ValueModel::Kind::kLinear;
  report.model.weights.assign(H, Eigen::VectorXd::Zero(d));
  long long optimistic = 0;
  long long compared = 0;

  for (int k = 1; k <= cfg.episodes; ++k) {
    const Policy acted = GreedyFromTables(report.q);
    RecordRegret(report.ledger, mdp, acted);

    int s = sim.BeginEpisode();
    for (int h = 0; h < H; ++h) {
      int a = 0;
      for (int c = 1; c < A; ++c) {
        if (report.q.table[h](s, c) > report.q.table[h](s, a)) a = c;
      }
      const auto [r, next] = sim.Step(a);
      const int row = mdp.sa_index(s, a);
      history[h].push_back({row, r, next});
      const Eigen::VectorXd phi = features.values.row(row).transpose();
      gram[h].selfadjointView<Eigen::Lower>().rankUpdate(phi);
      s = next;
    }

    if (k == cfg.episodes) break;

    const double n_eff = cfg.regularizer == RegularizerMode::kDeclaredBudget
                             ? static_cast<double>(cfg.episodes)
                             : static_cast<double>(k);
    double episode_max_bonus = 0.0;
    Eigen::VectorXd v_next = Eigen::VectorXd::Zero(S);
    for (int h = H - 1; h >= 0; --h) {
      Eigen::MatrixXd reg = gram[h].selfadjointView<Eigen::Lower>();
      reg.diagonal().array() += n_eff * cfg.lambda;
      const Eigen::LDLT<Eigen::MatrixXd> solver(reg);

      Eigen::VectorXd moment = Eigen::VectorXd::Zero(d);
      for (const Sample& smp : history[h]) {
        const double y = smp.reward + v_next(smp.next);
        moment += features.values.row(smp.row).transpose() * y;
      }
      const Eigen::VectorXd w = solver.solve(moment);
      report.model.weights[h] = w;

      for (int si = 0; si < S; ++si) {
        for (int ai = 0; ai < A; ++ai) {
          const Eigen::VectorXd phi =
              features.values.row(mdp.sa_index(si, ai)).transpose();
          const double bonus = UcbBonus(phi, solver, cfg.bonus_beta);
          episode_max_bonus = std::max(episode_max_bonus, bonus);
          report.q.table[h](si, ai) =
              ClipTo(w.dot(phi) + bonus, 0.0, static_cast<double>(H),
                     &report.clip_events);
          if (report.q.table[h](si, ai) >=
              exact.q_star.table[h](si, ai) - 1e-12) {
            ++optimistic;
          }
          ++compared;
        }
      }
      v_next = report.q.MaxValues(h);
    }
    report.bonus_trace.push_back(episode_max_bonus);
  }

  report.policy = GreedyFromTables(report.q);
  report.optimism_fraction =
      compared > 0 ? static_cast<double>(optimistic) / compared : -1.0;
  report.details["episodes"] = cfg.episodes;
  report.details["lambda"] = cfg.lambda;
  report.details["bonus_beta"] = cfg.bonus_beta;
  report.details["regularizer"] =
      cfg.regularizer == RegularizerMode::kDeclaredBudget ? "declared-budget"
                                                          : "current-count";
  return report;
}

PolicyFeatures PolicyFeatures::OneHot(int horizon, int num_states,
                                      int num_actions) {
  PolicyFeatures psi;
  psi.horizon = horizon;
  psi.num_states = num_states;
  psi.num_actions = num_actions;
  const int n = horizon * num_states * num_actions;
  psi.values = Eigen::MatrixXd::Identity(n, n);
  return psi;
}

Policy SoftmaxFromParams(const PolicyFeatures& psi,
                         const Eigen::VectorXd& theta) {
  Policy pi;
  for (int h = 0; h < psi.horizon; ++h) {
    Eigen::MatrixXd t(psi.num_states, psi.num_actions);
    for (int s = 0; s < psi.num_states; ++s) {
      Eigen::VectorXd logits(psi.num_actions);
      for (int a = 0; a < psi.num_actions; ++a) {
        logits(a) = theta.dot(psi.at(h, s, a));
      }
      const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
      t.row(s) = (e / e.sum()).matrix().transpose();
    }
    pi.table.push_back(std::move(t));
  }
  return pi;
}

Eigen::VectorXd EstimatePolicyGradient(EpisodicSimulator& sim,
                                       const PolicyFeatures& psi,
                                       const Eigen::VectorXd& theta,
                                       int batch) {
  if (batch <= 0) throw ValidationError("batch size must be positive");
  const Policy pi = SoftmaxFromParams(psi, theta);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  for (int i = 0; i < batch; ++i) {
    const Trajectory traj = sim.Rollout(pi);
    const int H = static_cast<int>(traj.states.size());
    double to_go = 0.0;
    for (int h = H - 1; h >= 0; --h) {
      to_go += traj.rewards[h];
      const int s = traj.states[h];
      const int a = traj.actions[h];
      // Score of the softmax: psi(h,s,a) minus its policy average over a.
      Eigen::VectorXd score = psi.at(h, s, a);
      for (int c = 0; c < psi.num_actions; ++c) {
        score -= pi.table[h](s, c) * psi.at(h, s, c);
      }
      grad += to_go * score;
    }
  }
  return grad / static_cast<double>(batch);
}

AlgorithmReport PolicyGradient(const FiniteMDP& mdp, const PolicyFeatures& psi,
                               const Eigen::VectorXd& theta0,
                               const PolicyGradientConfig& cfg,
                               std::uint64_t seed) {
  if (cfg.iterations <= 0) throw ValidationError("iteration count must be positive");
  if (psi.horizon != mdp.horizon || psi.num_states != mdp.num_states() ||
      psi.num_actions != mdp.num_actions()) {
    throw ValidationError("policy features do not match the environment");
  }
  EpisodicSimulator sim(mdp, seed);
  AlgorithmReport report;
  Eigen::VectorXd theta = theta0;
  for (int k = 0; k < cfg.iterations; ++k) {
    const Eigen::VectorXd g =
        EstimatePolicyGradient(sim, psi, theta, cfg.batch);
    theta += cfg.step_size * g;
    if (!theta.allFinite() || theta.norm() > cfg.divergence_norm) {
      throw NumericalError("policy ascent diverged at iteration " +
                           std::to_string(k + 1));
    }
    report.learning_curve.push_back(
        EvaluatePolicy(mdp, SoftmaxFromParams(psi, theta)).j);
    report.losses.push_back(g.norm());
  }
  report.policy = SoftmaxFromParams(psi, theta);
  report.model.kind = ValueModel::Kind::kLinear;
  report.model.weights = {theta};
  report.details["iterations"] = cfg.iterations;
  report.details["batch"] = cfg.batch;
  report.details["step_size"] = cfg.step_size;
  return report;
}

namespace {

// Least squares over the kernel ball of the given radius: the multiplier of
// the active norm constraint is located by bisection.
Eigen::VectorXd BallConstrainedFit(const Eigen::MatrixXd& gram,
                                   const Eigen::VectorXd& y, double radius) {
  const auto norm_of = [&](const Eigen::VectorXd& c) {
    return std::sqrt(std::max(0.0, c.dot(gram * c)));
  };
  // Multiplier zero: minimum-norm interpolant.
  Eigen::VectorXd c = PsdPinvSolve(gram, y);
  if (norm_of(c) <= radius) return c;

  const auto fit_at = [&](double lam) {
    Eigen::MatrixXd sys = gram;
    sys.diagonal().array() += lam;
    return Eigen::VectorXd(sys.ldlt().solve(y));
  };
  double hi = 1.0;
  while (norm_of(fit_at(hi)) > radius) {
    hi *= 2.0;
    if (hi > 1e18) throw NumericalError("norm constraint bisection failed");
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    c = fit_at(mid);
    const double norm = norm_of(c);
    if (norm > radius) {
      lo = mid;
    } else if (norm < 0.99 * radius) {
      hi = mid;
    } else {
      return c;
    }
  }
  // The norm map can jump across [0.99 r, r] when the Gram spectrum is
  // extreme; the last feasible iterate is still inside the ball.
  c = fit_at(hi);
  if (norm_of(c) > radius + 1e-9) {
    throw NumericalError("norm constraint bisection failed to land in the ball");
  }
  return c;
}

}  // namespace

AlgorithmReport FittedReward(GenerativeModel& gm, const Kernel& kernel,
                             const std::vector<Eigen::VectorXd>& grid_points,
                             const Eigen::VectorXd& nu_hat,
                             const FittedRewardConfig& cfg) {
  const FiniteMDP& mdp = gm.mdp();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int H = mdp.horizon;
  if (static_cast<int>(grid_points.size()) != S * A) {
    throw ValidationError("need one grid point per (s, a)");
  }
  if (!cfg.exhaustive) {
    if (nu_hat.size() != S * A) {
      throw ValidationError("sampling distribution does not match the grid");
    }
    if (cfg.samples_per_step <= 0) {
      throw ValidationError("sample count must be positive");
    }
  }
  if (cfg.norm_bound <= 0.0) {
    throw ValidationError("norm bound must be positive");
  }

  RngStream pair_rng(cfg.pair_seed, 5);
  const std::uint64_t queries_before = gm.query_count();

  AlgorithmReport report;
  nlohmann::json fitted_json = nlohmann::json::array();
  FiniteMDP assembled;
  assembled.horizon = H;
  assembled.states = mdp.states;
  assembled.actions = mdp.actions;
  assembled.initial = mdp.initial;
  assembled.transition = mdp.transition;
  double lo = 0.0, hi = 1.0;

  for (int h = 0; h < H; ++h) {
    std::vector<int> rows;
    if (cfg.exhaustive) {
      rows.resize(S * A);
      for (int i = 0; i < S * A; ++i) rows[i] = i;
    } else {
      const std::span<const double> w(nu_hat.data(),
                                      static_cast<std::size_t>(nu_hat.size()));
      rows.reserve(cfg.samples_per_step);
      for (int i = 0; i < cfg.samples_per_step; ++i) {
        rows.push_back(pair_rng.Categorical(w));
      }
    }
    const int n = static_cast<int>(rows.size());
    Eigen::VectorXd y(n);
    std::vector<Eigen::VectorXd> xs(n);
    for (int i = 0; i < n; ++i) {
      const int s = rows[i] / A;
      const int a = rows[i] % A;
      y(i) = gm.Query(h, s, a).second;
      xs[i] = grid_points[rows[i]];
    }

    const Eigen::MatrixXd gram = BuildGram(kernel, xs);
    const Eigen::VectorXd coef = BallConstrainedFit(gram, y, cfg.norm_bound);

    Eigen::VectorXd fitted(S * A);
    for (int row = 0; row < S * A; ++row) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += coef(i) * kernel(xs[i], grid_points[row]);
      }
      fitted(row) = acc;
    }
    lo = std::min(lo, fitted.minCoeff());
    hi = std::max(hi, fitted.maxCoeff());
    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
      double pred = 0.0;
      for (int j = 0; j < n; ++j) pred += coef(j) * gram(i, j);
      const double e = pred - y(i);
      mse += e * e;
    }
    report.losses.push_back(mse / n);
    nlohmann::json col = nlohmann::json::array();
    for (int row = 0; row < S * A; ++row) col.push_back(fitted(row));
    fitted_json.push_back(col);
    assembled.reward.push_back(std::move(fitted));
  }

  assembled.reward_min = lo;
  assembled.reward_max = hi;
  assembled.Validate();
  const ExactSolution sol = SolveExact(assembled);
  report.policy = sol.pi_star;
  report.q = sol.q_star;
  report.queries_used = gm.query_count() - queries_before;
  report.details["fitted_rewards"] = std::move(fitted_json);
  report.details["assembled_j_star"] = sol.j_star;
  report.details["queries"] = report.queries_used;
  return report;
}

}  // namespace rlfa
