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

#include "rlfa/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rlfa/algorithms.hpp"
#include "rlfa/format.hpp"
#include "rlfa/instances.hpp"
#include "rlfa/kernel.hpp"
#include "rlfa/linear.hpp"
#include "rlfa/mdp.hpp"
#include "rlfa/mismatch.hpp"
#include "rlfa/rng.hpp"
#include "rlfa/simulator.hpp"

namespace rlfa {
namespace {

constexpr const char* kVersion = "0.1.0";

// Strict config access: every key must be read exactly through this reader
// so leftovers can be rejected, and every resolved value (defaults
// included) lands in the metadata echo.
class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& j) : j_(j) {
    if (!j.is_object()) {
      throw ValidationError("config must be a JSON object");
    }
  }

  template <typename T>
  T Require(const std::string& key) {
    MarkSeen(key);
    if (!j_.contains(key)) {
      throw ValidationError("missing config key: " + key);
    }
    return Read<T>(key);
  }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    MarkSeen(key);
    if (!j_.contains(key)) {
      resolved_[key] = fallback;
      return fallback;
    }
    return Read<T>(key);
  }

  nlohmann::json GetJson(const std::string& key, nlohmann::json fallback) {
    MarkSeen(key);
    if (!j_.contains(key)) {
      resolved_[key] = fallback;
      return fallback;
    }
    resolved_[key] = j_.at(key);
    return j_.at(key);
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  void Finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ValidationError("unknown config key: " + item.key());
      }
    }
  }

  const nlohmann::json& resolved() const { return resolved_; }

 private:
  template <typename T>
  T Read(const std::string& key) {
    try {
      T v = j_.at(key).get<T>();
      resolved_[key] = v;
      return v;
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("config key has the wrong type: " + key);
    }
  }

  void MarkSeen(const std::string& key) { seen_.insert(key); }

  const nlohmann::json& j_;
  std::set<std::string> seen_;
  nlohmann::json resolved_ = nlohmann::json::object();
};

std::vector<Eigen::VectorXd> OnehotGridPoints(int rows) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(rows);
  for (int i = 0; i < rows; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rows);
    e(i) = 1.0;
    pts.push_back(std::move(e));
  }
  return pts;
}

void FinishArtifact(RunArtifact& art, const ConfigReader& cfg,
                    const std::string& scenario, std::uint64_t seed) {
  art.metadata["scenario"] = scenario;
  art.metadata["seed"] = seed;
  art.metadata["version"] = kVersion;
  art.metadata["config"] = cfg.resolved();
  art.metadata["headline"] = art.headline;
  art.metadata["summary"] = art.summary;
  if (art.has_assertions) {
    art.metadata["assertions_passed"] = art.assertions_passed;
  }
}

RunArtifact RunExactDp(ConfigReader& cfg, std::uint64_t seed) {
  const int S = cfg.Get<int>("num_states", 2);
  const int A = cfg.Get<int>("num_actions", 2);
  const int H = cfg.Get<int>("horizon", 3);
  const int trials = cfg.Get<int>("trials", 1);
  const bool fixed_reward = cfg.Has("constant_reward");
  const double constant_reward = cfg.Get<double>("constant_reward", 1.0);
  cfg.Finish();
  if (trials <= 0) throw ValidationError("trials must be positive");

  RunArtifact art;
  std::ostringstream csv;
  csv << "trial,j_star\n";
  RngStream seeder(seed, 0);
  double first = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = seeder.Split(t);
    FiniteMDP mdp = RandomMDP(S, A, H, rng);
    if (fixed_reward) {
      for (auto& r : mdp.reward) r.setConstant(constant_reward);
      mdp.reward_min = std::min(0.0, constant_reward);
      mdp.reward_max = std::max(1.0, constant_reward);
    }
    const ExactSolution sol = SolveExact(mdp);
    if (t == 0) first = sol.j_star;
    csv << (t + 1) << "," << FormatDouble(sol.j_star) << "\n";
  }
  art.tables.emplace_back("exact_dp.csv", csv.str());
  art.headline = first;
  art.summary = "jstar=" + FormatDouble(first) +
                " over trials=" + std::to_string(trials);
  return art;
}

RunArtifact RunSoftmaxGap(ConfigReader& cfg, std::uint64_t seed) {
  const int trials = cfg.Get<int>("trials", 200);
  const int S = cfg.Get<int>("num_states", 3);
  const int A = cfg.Get<int>("num_actions", 3);
  const int H = cfg.Get<int>("horizon", 3);
  const double scale = cfg.Get<double>("perturbation", 0.25);
  const std::vector<double> betas =
      cfg.Get<std::vector<double>>("betas", {0.5, 1.0, 2.0, 8.0});
  cfg.Finish();
  if (trials <= 0) throw ValidationError("trials must be positive");
  if (betas.empty()) throw ValidationError("betas must be nonempty");

  RunArtifact art;
  art.has_assertions = true;
  std::ostringstream csv;
  csv << "trial,beta,gap,bound,slack,pass\n";
  RngStream seeder(seed, 0);
  double min_slack = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = seeder.Split(t);
    const FiniteMDP mdp = RandomMDP(S, A, H, rng);
    const ExactSolution sol = SolveExact(mdp);
    QFunction q = sol.q_star;
    for (auto& table : q.table) {
      for (int r = 0; r < table.rows(); ++r) {
        for (int c = 0; c < table.cols(); ++c) {
          table(r, c) += scale * (2.0 * rng.Uniform() - 1.0);
        }
      }
    }
    const double beta = betas[t % betas.size()];
    const SoftmaxGapCertificate cert = SoftmaxGapBound(mdp, q, beta);
    const double slack = cert.bound - cert.gap;
    const bool pass = cert.gap >= -1e-8 && slack >= -1e-8;
    if (!pass) ++failures;
    min_slack = std::min(min_slack, slack);
    csv << (t + 1) << "," << FormatDouble(beta) << ","
        << FormatDouble(cert.gap) << "," << FormatDouble(cert.bound) << ","
        << FormatDouble(slack) << "," << (pass ? 1 : 0) << "\n";
  }
  art.tables.emplace_back("softmax_gap.csv", csv.str());
  art.assertions_passed = failures == 0;
  art.headline = min_slack;
  art.summary = "min_slack=" + FormatDouble(min_slack) + ", failures=" +
                std::to_string(failures) + "/" + std::to_string(trials);
  return art;
}

RunArtifact RunFqi(ConfigReader& cfg, std::uint64_t seed) {
  const int S = cfg.Get<int>("num_states", 4);
  const int A = cfg.Get<int>("num_actions", 3);
  const int H = cfg.Get<int>("horizon", 3);
  const int n = cfg.Get<int>("samples_per_step", 256);
  const double lambda = cfg.Get<double>("lambda", 1e-6);
  const std::string kind = cfg.Get<std::string>("function_class", "linear");
  nlohmann::json kernel_json = cfg.GetJson(
      "kernel", {{"kind", "gaussian"}, {"alpha", 1.0}, {"d", S * A}});
  cfg.Finish();

  RngStream rng(seed, 0);
  const FiniteMDP mdp = RandomMDP(S, A, H, rng);
  GenerativeModel gm(mdp, seed);
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(S * A, 1.0 / (S * A));
  RngStream pair_rng(seed, 1);
  const auto pairs = SamplePairs(H, n, uniform, A, pair_rng);

  FunctionClass fc;
  if (kind == "linear") {
    fc = FunctionClass::Linear(FeatureMap::TabularOnehot(S, A), lambda);
  } else if (kind == "kernel") {
    fc = FunctionClass::KernelOnGrid(Kernel::FromJson(kernel_json),
                                     OnehotGridPoints(S * A), lambda);
  } else {
    throw ValidationError("function_class must be linear or kernel");
  }

  const AlgorithmReport report = FittedQIteration(gm, fc, pairs);
  const double j_star = SolveExact(mdp).j_star;
  const double j_hat = EvaluatePolicy(mdp, report.policy).j;

  RunArtifact art;
  std::ostringstream csv;
  csv << "step,loss\n";
  for (int h = 0; h < H; ++h) {
    csv << (h + 1) << "," << FormatDouble(report.losses[h]) << "\n";
  }
  art.tables.emplace_back("fqi.csv", csv.str());
  art.headline = j_star - j_hat;
  art.summary = "gap=" + FormatDouble(art.headline) +
                ", queries=" + std::to_string(report.queries_used);
  art.metadata["queries"] = report.queries_used;
  return art;
}

RunArtifact RunLsviUcb(ConfigReader& cfg, std::uint64_t seed) {
  const int S = cfg.Get<int>("num_states", 5);
  const int A = cfg.Get<int>("num_actions", 2);
  const int H = cfg.Get<int>("horizon", 3);
  const int d = cfg.Get<int>("dim", 30);
  const int episodes = cfg.Get<int>("episodes", 2000);
  const double lambda = cfg.Get<double>("lambda", 1.0 / std::max(1, episodes));
  const double bonus_beta = cfg.Get<double>("bonus_beta", 0.5);
  const std::string reg = cfg.Get<std::string>("regularizer", "declared-budget");
  cfg.Finish();

  LsviUcbConfig algo_cfg;
  algo_cfg.episodes = episodes;
  algo_cfg.lambda = lambda;
  algo_cfg.bonus_beta = bonus_beta;
  if (reg == "declared-budget") {
    algo_cfg.regularizer = RegularizerMode::kDeclaredBudget;
  } else if (reg == "current-count") {
    algo_cfg.regularizer = RegularizerMode::kCurrentCount;
  } else {
    throw ValidationError("regularizer must be declared-budget or current-count");
  }

  RngStream rng(seed, 0);
  const LinearMDPSpec spec = RandomLinearSpec(S, A, H, d, rng);
  const FiniteMDP mdp =
      BuildLinearMDP(spec, DefaultLabels("s", S), DefaultLabels("a", A),
                     RandomSimplex(S, rng));
  EpisodicSimulator sim(mdp, seed);
  const AlgorithmReport report = LsviUcb(sim, spec.features, algo_cfg);

  RunArtifact art;
  std::ostringstream csv;
  WriteRegretCsv(csv, report.ledger, seed);
  art.tables.emplace_back("regret.csv", csv.str());
  art.headline = report.ledger.cumulative;
  art.summary = "cumulative_regret=" + FormatDouble(art.headline) +
                ", optimism_fraction=" +
                FormatDouble(report.optimism_fraction);
  art.metadata["optimism_fraction"] = report.optimism_fraction;
  art.metadata["clip_events"] = report.clip_events;
  return art;
}

RunArtifact RunPolicyGradient(ConfigReader& cfg, std::uint64_t seed) {
  const int S = cfg.Get<int>("num_states", 2);
  const int A = cfg.Get<int>("num_actions", 2);
  const int H = cfg.Get<int>("horizon", 2);
  const int iterations = cfg.Get<int>("iterations", 50);
  const int batch = cfg.Get<int>("batch", 500);
  const double step_size = cfg.Get<double>("step_size", 0.5);
  cfg.Finish();

  RngStream rng(seed, 0);
  const FiniteMDP mdp = RandomMDP(S, A, H, rng);
  const PolicyFeatures psi = PolicyFeatures::OneHot(H, S, A);
  PolicyGradientConfig pg_cfg;
  pg_cfg.iterations = iterations;
  pg_cfg.batch = batch;
  pg_cfg.step_size = step_size;
  const AlgorithmReport report = PolicyGradient(
      mdp, psi, Eigen::VectorXd::Zero(psi.dim()), pg_cfg, seed);
  const double j_star = SolveExact(mdp).j_star;

  RunArtifact art;
  std::ostringstream csv;
  csv << "iteration,j,grad_norm\n";
  for (int k = 0; k < iterations; ++k) {
    csv << (k + 1) << "," << FormatDouble(report.learning_curve[k]) << ","
        << FormatDouble(report.losses[k]) << "\n";
  }
  art.tables.emplace_back("policy_gradient.csv", csv.str());
  art.headline = report.learning_curve.back();
  art.summary = "final_j=" + FormatDouble(art.headline) +
                ", j_star=" + FormatDouble(j_star);
  art.metadata["j_star"] = j_star;
  return art;
}

RunArtifact RunFittedReward(ConfigReader& cfg, std::uint64_t seed) {
  const int S = cfg.Get<int>("num_states", 3);
  const int A = cfg.Get<int>("num_actions", 2);
  const int H = cfg.Get<int>("horizon", 2);
  const int n = cfg.Get<int>("samples_per_step", 64);
  const bool exhaustive = cfg.Get<bool>("exhaustive", false);
  const std::string noise = cfg.Get<std::string>("noise", "unit-gaussian");
  nlohmann::json kernel_json = cfg.GetJson(
      "kernel", {{"kind", "gaussian"}, {"alpha", 0.5}, {"d", S * A}});
  cfg.Finish();

  const Kernel kernel = Kernel::FromJson(kernel_json);
  RngStream rng(seed, 0);
  FiniteMDP mdp = RandomMDP(S, A, H, rng);
  const auto grid = OnehotGridPoints(S * A);
  double lo = 0.0, hi = 1.0;
  for (int h = 0; h < H; ++h) {
    const KernelExpansion g = RandomUnitBallFunction(kernel, grid, rng);
    for (int row = 0; row < S * A; ++row) {
      mdp.reward[h](row) = g.Evaluate(grid[row]);
    }
    lo = std::min(lo, mdp.reward[h].minCoeff());
    hi = std::max(hi, mdp.reward[h].maxCoeff());
  }
  mdp.reward_min = lo;
  mdp.reward_max = hi;
  mdp.Validate();

  RewardNoise mode;
  if (noise == "unit-gaussian") {
    mode = RewardNoise::kUnitGaussian;
  } else if (noise == "exact") {
    mode = RewardNoise::kExact;
  } else {
    throw ValidationError("noise must be unit-gaussian or exact");
  }
  GenerativeModel gm(mdp, seed, mode);
  FittedRewardConfig fr_cfg;
  fr_cfg.samples_per_step = n;
  fr_cfg.pair_seed = seed;
  fr_cfg.exhaustive = exhaustive;
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(S * A, 1.0 / (S * A));
  const AlgorithmReport report =
      FittedReward(gm, kernel, grid, uniform, fr_cfg);
  const double j_star = SolveExact(mdp).j_star;
  const double j_hat = EvaluatePolicy(mdp, report.policy).j;

  RunArtifact art;
  std::ostringstream csv;
  csv << "step,loss\n";
  for (int h = 0; h < H; ++h) {
    csv << (h + 1) << "," << FormatDouble(report.losses[h]) << "\n";
  }
  art.tables.emplace_back("fitted_reward.csv", csv.str());
  art.headline = j_star - j_hat;
  art.summary = "gap=" + FormatDouble(art.headline) +
                ", queries=" + std::to_string(report.queries_used);
  art.metadata["queries"] = report.queries_used;
  return art;
}

RunArtifact RunSpectrum(ConfigReader& cfg, std::uint64_t seed) {
  const int dim = cfg.Get<int>("dim", 3);
  const int count = cfg.Get<int>("count", 64);
  // An eighth of the support, capped: deep enough into the spectrum to
  // sort decay rates, never the full support (whose tail is exactly zero).
  const int tail_index = cfg.Get<int>("tail_index", std::min(count / 8, 64));
  nlohmann::json kernel_json =
      cfg.GetJson("kernel", {{"kind", "laplacian"}, {"alpha", 1.0}, {"d", dim}});
  cfg.Finish();
  if (tail_index < 0 || tail_index > count) {
    throw ValidationError("tail_index must lie in [0, count]");
  }

  const Kernel kernel = Kernel::FromJson(kernel_json);
  RngStream rng(seed, 0);
  const auto support = SphereSamples(dim, count, rng);
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(count, 1.0 / count);
  const Spectrum sp = MercerSpectrum(kernel, support, rho);

  RunArtifact art;
  std::ostringstream csv;
  WriteSpectrumCsv(csv, sp);
  art.tables.emplace_back("spectrum.csv", csv.str());
  art.headline = sp.TailSum(tail_index);
  art.summary = "tail_sum(" + std::to_string(tail_index) +
                ")=" + FormatDouble(art.headline) +
                ", trace=" + FormatDouble(sp.TailSum(0));
  return art;
}

RunArtifact RunPowerFunction(ConfigReader& cfg, std::uint64_t seed) {
  const int dim = cfg.Get<int>("dim", 3);
  const int count = cfg.Get<int>("count", 48);
  const int centers = cfg.Get<int>("centers", 8);
  nlohmann::json kernel_json =
      cfg.GetJson("kernel", {{"kind", "gaussian"}, {"alpha", 1.0}, {"d", dim}});
  cfg.Finish();
  if (centers <= 0 || centers > count) {
    throw ValidationError("centers must lie in [1, count]");
  }

  const Kernel kernel = Kernel::FromJson(kernel_json);
  RngStream rng(seed, 0);
  const auto support = SphereSamples(dim, count, rng);
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(count, 1.0 / count);
  const Spectrum sp = MercerSpectrum(kernel, support, rho);
  const std::vector<Eigen::VectorXd> cs(support.begin(),
                                        support.begin() + centers);

  double mean_power_sq = 0.0;
  std::ostringstream csv;
  csv << "index,power\n";
  for (int i = 0; i < count; ++i) {
    const double p = PowerFunction(kernel, cs, support[i]);
    mean_power_sq += rho(i) * p * p;
    csv << (i + 1) << "," << FormatDouble(p) << "\n";
  }
  const Eigen::MatrixXd basis = OrthonormalBasisValues(kernel, cs, support);
  double basis_mass = 0.0;
  for (int i = 0; i < basis.rows(); ++i) {
    for (int j = 0; j < count; ++j) {
      basis_mass += rho(j) * basis(i, j) * basis(i, j);
    }
  }
  const double tail = sp.TailSum(centers);
  const double head = sp.TailSum(0) - tail;

  RunArtifact art;
  art.tables.emplace_back("power.csv", csv.str());
  art.has_assertions = true;
  art.assertions_passed =
      mean_power_sq >= tail - 1e-8 && basis_mass <= head + 1e-8;
  art.headline = mean_power_sq - tail;
  art.summary = "mean_power_sq=" + FormatDouble(mean_power_sq) +
                ", tail=" + FormatDouble(tail) +
                ", basis_mass=" + FormatDouble(basis_mass) +
                ", head=" + FormatDouble(head);
  return art;
}

RunArtifact RunPerturbation(ConfigReader& cfg, std::uint64_t seed) {
  const int dim = cfg.Get<int>("dim", 3);
  const int support_count = cfg.Get<int>("support_count", 12);
  const int num_members = cfg.Get<int>("num_members", 4);
  const std::vector<double> epsilons =
      cfg.Get<std::vector<double>>("epsilons", {0.0, 0.05, 0.1, 0.2, 0.4});
  nlohmann::json kernel_json =
      cfg.GetJson("kernel", {{"kind", "gaussian"}, {"alpha", 1.0}, {"d", dim}});
  cfg.Finish();
  if (num_members <= 0) throw ValidationError("num_members must be positive");
  if (epsilons.empty()) throw ValidationError("epsilons must be nonempty");

  const Kernel kernel = Kernel::FromJson(kernel_json);
  RngStream rng(seed, 0);
  const auto support = SphereSamples(dim, support_count, rng);
  DistributionSet pi;
  for (int i = 0; i < num_members; ++i) {
    pi.members.push_back(RandomSimplex(support_count, rng));
  }
  const auto candidates = DefaultNuCandidates(pi);

  std::vector<MismatchRecord> records;
  std::vector<double> deltas;
  for (const double eps : epsilons) {
    if (eps < 0.0) throw ValidationError("epsilons must be nonnegative");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      PerturbationInstance inst;
      inst.support = support;
      inst.gram = BuildGram(kernel, support);
      inst.nu = candidates[c];
      inst.epsilon = eps;
      inst.pi = pi;
      const ResponseResult rr = PerturbationResponse(inst);
      for (int m = 0; m < pi.size(); ++m) {
        records.push_back({eps, static_cast<int>(c), m, rr.per_member[m],
                           rr.per_member_gap[m]});
      }
      best = std::min(best, rr.value);
    }
    deltas.push_back(best);
  }

  bool monotone = true;
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (epsilons[i] >= epsilons[i - 1] && deltas[i] < deltas[i - 1] - 1e-9) {
      monotone = false;
    }
  }

  RunArtifact art;
  std::ostringstream csv;
  WriteMismatchCsv(csv, records);
  art.tables.emplace_back("mismatch.csv", csv.str());
  art.has_assertions = true;
  art.assertions_passed = monotone;
  art.headline = deltas.back();
  std::ostringstream sum;
  sum << "delta(" << FormatDouble(epsilons.back())
      << ")=" << FormatDouble(deltas.back())
      << ", monotone=" << (monotone ? "yes" : "no");
  art.summary = sum.str();
  return art;
}

RunArtifact RunCurseDemo(ConfigReader& cfg, std::uint64_t seed) {
  const int dim = cfg.Get<int>("dim", 4);
  const int H = cfg.Get<int>("horizon", 6);
  const double delta = cfg.Get<double>("delta", 0.3);
  const int rollouts = cfg.Get<int>("rollouts", 100);
  const int reward_centers = cfg.Get<int>("reward_centers", 16);
  const double alpha = cfg.Get<double>("alpha", 1.0);
  cfg.Finish();
  if (rollouts <= 0) throw ValidationError("rollouts must be positive");

  CurseFamily family = MakeCurseFamily(dim, H, delta);
  const Kernel kernel = Kernel::Laplacian(alpha);
  RngStream rng(seed, 0);
  std::vector<KernelExpansion> rewards;
  for (int h = 0; h < H; ++h) {
    rewards.push_back(
        RandomUnitBallFunction(kernel, SphereSamples(dim, reward_centers, rng),
                               rng));
  }
  AttachRewards(family, rewards);

  const ContinuousPolicy uniform_policy =
      [](int, const Eigen::VectorXd&, RngStream& r) {
        return r.Uniform() < 0.5 ? 0 : 1;
      };
  RngStream rollout_rng(seed, 1);
  std::ostringstream csv;
  csv << "# seed=" << seed << "\n";
  csv << "episode,h,a,r,embed_norm_error\n";
  double total = 0.0;
  double worst_norm_err = 0.0;
  for (int e = 0; e < rollouts; ++e) {
    const ContinuousTrajectory traj =
        RolloutContinuous(family.dynamics, uniform_policy, rollout_rng);
    for (int h = 0; h < H; ++h) {
      const double err =
          std::abs(CurseFamily::Embed(traj.states[h]).norm() - 1.0);
      worst_norm_err = std::max(worst_norm_err, err);
      total += traj.rewards[h];
      csv << (e + 1) << "," << (h + 1) << "," << traj.actions[h] << ","
          << FormatDouble(traj.rewards[h]) << "," << FormatDouble(err) << "\n";
    }
  }

  RunArtifact art;
  art.tables.emplace_back("curse.csv", csv.str());
  art.has_assertions = true;
  art.assertions_passed = worst_norm_err <= 1e-10;
  art.headline = total / rollouts;
  art.summary = "mean_return=" + FormatDouble(art.headline) +
                ", worst_embed_norm_error=" + FormatDouble(worst_norm_err);
  return art;
}

RunArtifact RunClosureCheck(ConfigReader& cfg, std::uint64_t seed) {
  const int S = cfg.Get<int>("num_states", 3);
  const int A = cfg.Get<int>("num_actions", 2);
  const int H = cfg.Get<int>("horizon", 3);
  const int d = cfg.Get<int>("dim", 6);
  const int functions = cfg.Get<int>("functions", 50);
  const int policies = cfg.Get<int>("policies", 20);
  cfg.Finish();

  RngStream rng(seed, 0);
  const LinearMDPSpec spec = RandomLinearSpec(S, A, H, d, rng);
  const FiniteMDP mdp =
      BuildLinearMDP(spec, DefaultLabels("s", S), DefaultLabels("a", A),
                     RandomSimplex(S, rng));
  const ClosureReport bellman =
      CheckBellmanClosure(mdp, spec.features, functions, rng);
  const ClosureReport value =
      CheckPolicyValueClosure(mdp, spec.features, policies, rng);

  RunArtifact art;
  std::ostringstream csv;
  csv << "probe,kind,residual\n";
  for (std::size_t i = 0; i < bellman.residuals.size(); ++i) {
    csv << (i + 1) << ",bellman," << FormatDouble(bellman.residuals[i]) << "\n";
  }
  for (std::size_t i = 0; i < value.residuals.size(); ++i) {
    csv << (i + 1) << ",policy-value," << FormatDouble(value.residuals[i])
        << "\n";
  }
  art.tables.emplace_back("closure.csv", csv.str());
  art.has_assertions = true;
  art.assertions_passed =
      bellman.max_residual <= 1e-8 && value.max_residual <= 1e-10;
  art.headline = std::max(bellman.max_residual, value.max_residual);
  art.summary = "bellman_max=" + FormatDouble(bellman.max_residual) +
                ", policy_value_max=" + FormatDouble(value.max_residual);
  return art;
}

}  // namespace

void RunArtifact::Write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metadata.json");
    out << metadata.dump(2) << "\n";
  }
  for (const auto& [name, body] : tables) {
    std::ofstream out(dir / name);
    out << body;
  }
  std::ofstream out(dir / "summary.txt");
  out << summary << "\n";
  if (has_assertions) {
    out << (assertions_passed ? "PASS" : "FAIL") << "\n";
  }
}

RunArtifact RunScenario(const nlohmann::json& config) {
  ConfigReader cfg(config);
  const std::string scenario = cfg.Require<std::string>("scenario");
  const std::uint64_t seed = cfg.Get<std::uint64_t>("seed", 1);
  cfg.Get<std::string>("out", "");  // consumed by the CLI, part of the echo

  const auto start = std::chrono::steady_clock::now();
  RunArtifact art;
  if (scenario == "exact-dp") {
    art = RunExactDp(cfg, seed);
  } else if (scenario == "softmax-gap") {
    art = RunSoftmaxGap(cfg, seed);
  } else if (scenario == "fqi") {
    art = RunFqi(cfg, seed);
  } else if (scenario == "lsvi-ucb") {
    art = RunLsviUcb(cfg, seed);
  } else if (scenario == "policy-gradient") {
    art = RunPolicyGradient(cfg, seed);
  } else if (scenario == "fitted-reward") {
    art = RunFittedReward(cfg, seed);
  } else if (scenario == "spectrum") {
    art = RunSpectrum(cfg, seed);
  } else if (scenario == "power-function") {
    art = RunPowerFunction(cfg, seed);
  } else if (scenario == "perturbation") {
    art = RunPerturbation(cfg, seed);
  } else if (scenario == "curse-demo") {
    art = RunCurseDemo(cfg, seed);
  } else if (scenario == "closure-check") {
    art = RunClosureCheck(cfg, seed);
  } else {
    throw ValidationError("unknown scenario: " + scenario);
  }
  const auto end = std::chrono::steady_clock::now();
  FinishArtifact(art, cfg, scenario, seed);
  art.metadata["wall_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(end - start)
          .count();
  return art;
}

namespace {

double Percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double idx = p * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(idx));
  const double frac = idx - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

SweepResult Sweep(const nlohmann::json& base_config,
                  const std::string& axis_name,
                  const std::vector<nlohmann::json>& axis_values) {
  if (axis_values.empty()) {
    throw ValidationError("sweep axis has no values");
  }
  if (!base_config.is_object()) {
    throw ValidationError("config must be a JSON object");
  }
  std::vector<std::uint64_t> seeds;
  nlohmann::json tmpl = base_config;
  if (tmpl.contains("seeds")) {
    seeds = tmpl["seeds"].get<std::vector<std::uint64_t>>();
    tmpl.erase("seeds");
    if (seeds.empty()) throw ValidationError("seed list is empty");
  } else {
    seeds.push_back(tmpl.value("seed", std::uint64_t{1}));
  }

  SweepResult result;
  for (const auto& value : axis_values) {
    for (const std::uint64_t s : seeds) {
      SweepPoint pt;
      pt.axis_value = value;
      pt.seed = s;
      result.points.push_back(std::move(pt));
    }
  }

  // Points are independent; fan out across cores, results land by index.
  std::mutex mu;
  std::size_t next = 0;
  const auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= result.points.size()) return;
        idx = next++;
      }
      SweepPoint& pt = result.points[idx];
      nlohmann::json cfg = tmpl;
      cfg[axis_name] = pt.axis_value;
      cfg["seed"] = pt.seed;
      try {
        pt.artifact = RunScenario(cfg);
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.ok = false;
        pt.error = e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nthreads =
      std::min<std::size_t>(hw, result.points.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream agg;
  agg << "axis,count,median,q25,q75,loglog_slope,status\n";
  double prev_median = std::numeric_limits<double>::quiet_NaN();
  double prev_axis = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t vi = 0; vi < axis_values.size(); ++vi) {
    std::vector<double> headlines;
    bool any_failed = false;
    bool any_assert_failed = false;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const SweepPoint& pt = result.points[vi * seeds.size() + si];
      if (!pt.ok) {
        any_failed = true;
        continue;
      }
      if (pt.artifact.has_assertions && !pt.artifact.assertions_passed) {
        any_assert_failed = true;
      }
      headlines.push_back(pt.artifact.headline);
    }
    const double med = headlines.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : Percentile(headlines, 0.5);
    const double q25 = headlines.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : Percentile(headlines, 0.25);
    const double q75 = headlines.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : Percentile(headlines, 0.75);
    std::string slope;
    const double axis_num = axis_values[vi].is_number()
                                ? axis_values[vi].get<double>()
                                : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(prev_median) && prev_median > 0.0 && med > 0.0 &&
        std::isfinite(prev_axis) && prev_axis > 0.0 && axis_num > 0.0 &&
        axis_num != prev_axis) {
      slope = FormatDouble(std::log(med / prev_median) /
                           std::log(axis_num / prev_axis));
    }
    std::string status = "ok";
    if (headlines.empty()) {
      status = "failed";
    } else if (any_failed) {
      status = "partial";
    } else if (any_assert_failed) {
      status = "assert-failed";
    }
    agg << axis_values[vi].dump() << "," << headlines.size() << ","
        << FormatDouble(med) << "," << FormatDouble(q25) << ","
        << FormatDouble(q75) << "," << slope << "," << status << "\n";
    prev_median = med;
    prev_axis = axis_num;
  }
  result.aggregate_csv = agg.str();
  return result;
}

std::filesystem::path OutputRoot() {
  if (const char* root = std::getenv("RLFA_OUTPUT_ROOT")) {
    return std::filesystem::path(root);
  }
  return std::filesystem::current_path();
}

}  // namespace rlfa
