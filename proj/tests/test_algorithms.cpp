#include <doctest.h>

#include <cmath>

#include "rlfa/algorithms.hpp"
#include "rlfa/instances.hpp"
#include "rlfa/mdp.hpp"
#include "rlfa/rng.hpp"
#include "support/oracles.hpp"

using namespace rlfa;

namespace {

std::vector<std::vector<std::pair<int, int>>> UniformPairs(int horizon,
                                                           int per_step,
                                                           int S, int A,
                                                           std::uint64_t seed) {
  RngStream rng(seed, 0);
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(S * A, 1.0 / (S * A));
  return SamplePairs(horizon, per_step, w, A, rng);
}

}  // namespace

TEST_SUITE("algorithms") {

TEST_CASE("sample pairs covers the grid with valid coordinates") {
  RngStream rng(60, 0);
  Eigen::VectorXd w(6);
  w << 0.5, 0.5, 0.0, 0.0, 0.0, 0.0;
  const auto pairs = SamplePairs(2, 5000, w, 2, rng);
  REQUIRE(pairs.size() == 2);
  REQUIRE(pairs[0].size() == 5000);
  int first_row = 0;
  for (const auto& [s, a] : pairs[0]) {
    CHECK(s == 0);  // only rows 0 and 1 have mass, both map to state 0
    CHECK((a == 0 || a == 1));
    if (a == 0) ++first_row;
  }
  CHECK(std::abs(first_row / 5000.0 - 0.5) < 0.05);
}

TEST_CASE("fitted q iteration recovers the optimum with tabular features") {
  RngStream rng(61, 0);
  const FiniteMDP mdp = RandomMDP(3, 2, 3, rng);
  const ExactSolution sol = SolveExact(mdp);
  GenerativeModel gm(mdp, 555);
  const auto pairs = UniformPairs(3, 2000, 3, 2, 91);
  const FunctionClass fc =
      FunctionClass::Linear(FeatureMap::TabularOnehot(3, 2), 1e-8);
  const AlgorithmReport rep = FittedQIteration(gm, fc, pairs);

  CHECK(rep.queries_used == 3u * 2000u);
  CHECK(gm.query_count() == 3u * 2000u);
  const double j_hat = EvaluatePolicy(mdp, rep.policy).j;
  CHECK(sol.j_star - j_hat >= -1e-10);
  CHECK(sol.j_star - j_hat < 0.05);
  for (const auto& table : rep.q.table) {
    CHECK(table.minCoeff() >= 0.0);
    CHECK(table.maxCoeff() <= 3.0);
  }
  CHECK(rep.model.kind == ValueModel::Kind::kLinear);
  REQUIRE(rep.model.weights.size() == 3);
  CHECK(rep.losses.size() == 3);
}

TEST_CASE("fitted q iteration with a kernel class matches the linear fit") {
  RngStream rng(62, 0);
  const FiniteMDP mdp = RandomMDP(2, 2, 2, rng);
  const ExactSolution sol = SolveExact(mdp);
  const auto pairs = UniformPairs(2, 1500, 2, 2, 92);

  std::vector<Eigen::VectorXd> grid;
  for (int i = 0; i < 4; ++i) {
    grid.push_back(Eigen::VectorXd::Zero(4));
    grid.back()(i) = 1.0;
  }
  GenerativeModel gm(mdp, 777);
  const FunctionClass fc =
      FunctionClass::KernelOnGrid(Kernel::Gaussian(0.5), grid, 1e-8);
  const AlgorithmReport rep = FittedQIteration(gm, fc, pairs);
  const double j_hat = EvaluatePolicy(mdp, rep.policy).j;
  CHECK(sol.j_star - j_hat < 0.08);
  CHECK(rep.model.kind == ValueModel::Kind::kKernelExpansion);
}

TEST_CASE("fitted q iteration respects a tight query budget") {
  RngStream rng(63, 0);
  const FiniteMDP mdp = RandomMDP(2, 2, 2, rng);
  const auto pairs = UniformPairs(2, 50, 2, 2, 93);
  const FunctionClass fc =
      FunctionClass::Linear(FeatureMap::TabularOnehot(2, 2), 1e-8);

  GenerativeModel enough(mdp, 1, RewardNoise::kExact, 100);
  CHECK_NOTHROW(FittedQIteration(enough, fc, pairs));

  GenerativeModel short_one(mdp, 1, RewardNoise::kExact, 99);
  CHECK_THROWS_AS(FittedQIteration(short_one, fc, pairs), BudgetExhausted);
}

TEST_CASE("lsvi ucb fills the ledger and explores optimistically") {
  RngStream rng(64, 0);
  const FiniteMDP mdp = RandomMDP(3, 2, 2, rng);
  const LinearMDPSpec spec = TabularEmbedding(mdp);
  EpisodicSimulator sim(mdp, 2222);
  LsviUcbConfig cfg;
  cfg.episodes = 150;
  cfg.lambda = 1.0 / 150;
  cfg.bonus_beta = 2.0;
  const AlgorithmReport rep = LsviUcb(sim, spec.features, cfg);

  REQUIRE(rep.ledger.entries.size() == 150);
  CHECK(sim.episodes_started() == 150);
  // No refit happens after the final episode, so one fewer trace entry.
  CHECK(rep.bonus_trace.size() == 149);
  // Bonuses shrink as the design matrix accumulates mass.
  CHECK(rep.bonus_trace.back() < rep.bonus_trace.front());
  // With a generous bonus the fitted Q dominates Q* almost everywhere.
  CHECK(rep.optimism_fraction > 0.9);
  // Late-episode average regret improves on the early average.
  const auto& e = rep.ledger.entries;
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 30; ++i) early += e[i].regret;
  for (int i = 120; i < 150; ++i) late += e[i].regret;
  CHECK(late <= early + 1e-9);
}

TEST_CASE("lsvi ucb regularizer modes scale the gram differently") {
  RngStream rng(65, 0);
  const FiniteMDP mdp = RandomMDP(2, 2, 2, rng);
  const LinearMDPSpec spec = TabularEmbedding(mdp);

  LsviUcbConfig declared;
  declared.episodes = 40;
  declared.lambda = 0.5;
  declared.regularizer = RegularizerMode::kDeclaredBudget;
  EpisodicSimulator sim1(mdp, 1);
  const AlgorithmReport rep1 = LsviUcb(sim1, spec.features, declared);

  LsviUcbConfig current = declared;
  current.regularizer = RegularizerMode::kCurrentCount;
  EpisodicSimulator sim2(mdp, 1);
  const AlgorithmReport rep2 = LsviUcb(sim2, spec.features, current);

  CHECK(rep1.details["regularizer"] == "declared-budget");
  CHECK(rep2.details["regularizer"] == "current-count");
  // Different effective regularization must change at least one bonus.
  bool differs = false;
  for (std::size_t i = 0; i < rep1.bonus_trace.size(); ++i) {
    differs = differs || rep1.bonus_trace[i] != rep2.bonus_trace[i];
  }
  CHECK(differs);
}

TEST_CASE("softmax parameterization matches a direct computation") {
  const PolicyFeatures psi = PolicyFeatures::OneHot(2, 2, 2);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(psi.dim());
  theta(0) = 1.0;  // (h=0, s=0, a=0)
  const Policy pi = SoftmaxFromParams(psi, theta);
  const double z = std::exp(1.0) + 1.0;
  CHECK(pi.prob(0, 0, 0) == doctest::Approx(std::exp(1.0) / z));
  CHECK(pi.prob(0, 0, 1) == doctest::Approx(1.0 / z));
  CHECK(pi.prob(1, 0, 0) == doctest::Approx(0.5));
}

TEST_CASE("policy gradient estimator is unbiased against finite differences") {
  RngStream rng(66, 0);
  const FiniteMDP mdp = RandomMDP(2, 2, 2, rng);
  const PolicyFeatures psi = PolicyFeatures::OneHot(2, 2, 2);
  Eigen::VectorXd theta(psi.dim());
  for (int i = 0; i < theta.size(); ++i) theta(i) = 0.2 * rng.Normal();

  EpisodicSimulator sim(mdp, 3141);
  const Eigen::VectorXd est = EstimatePolicyGradient(sim, psi, theta, 30000);
  const Eigen::VectorXd fd =
      rlfa_tests::FiniteDiffPolicyGradient(mdp, psi, theta, 1e-5);
  CHECK((est - fd).norm() < 0.15 * std::max(1e-12, fd.norm()));
}

TEST_CASE("policy gradient ascends and reports its curve") {
  RngStream rng(67, 0);
  const FiniteMDP mdp = RandomMDP(2, 2, 2, rng);
  const PolicyFeatures psi = PolicyFeatures::OneHot(2, 2, 2);
  PolicyGradientConfig cfg;
  cfg.iterations = 40;
  cfg.batch = 400;
  cfg.step_size = 1.0;
  const AlgorithmReport rep =
      PolicyGradient(mdp, psi, Eigen::VectorXd::Zero(psi.dim()), cfg, 10);
  REQUIRE(rep.learning_curve.size() == 40);
  const double j0 = EvaluatePolicy(
      mdp, SoftmaxFromParams(psi, Eigen::VectorXd::Zero(psi.dim()))).j;
  CHECK(rep.learning_curve.back() > j0);
  CHECK(rep.learning_curve.back() <= SolveExact(mdp).j_star + 1e-9);
}

TEST_CASE("policy gradient flags divergent ascent") {
  RngStream rng(68, 0);
  const FiniteMDP mdp = RandomMDP(2, 2, 2, rng);
  const PolicyFeatures psi = PolicyFeatures::OneHot(2, 2, 2);
  PolicyGradientConfig cfg;
  cfg.iterations = 200;
  cfg.batch = 20;
  cfg.step_size = 1e5;
  cfg.divergence_norm = 1e4;
  CHECK_THROWS_AS(
      PolicyGradient(mdp, psi, Eigen::VectorXd::Zero(psi.dim()), cfg, 10),
      NumericalError);
}

TEST_CASE("fitted reward recovers exact rewards without noise") {
  RngStream rng(69, 0);
  FiniteMDP mdp = RandomMDP(3, 2, 2, rng);
  const Kernel k = Kernel::Gaussian(0.5);
  std::vector<Eigen::VectorXd> grid;
  for (int i = 0; i < 6; ++i) {
    grid.push_back(Eigen::VectorXd::Zero(6));
    grid.back()(i) = 1.0;
  }
  // Replace rewards by an in-class function so interpolation is exact.
  for (int h = 0; h < 2; ++h) {
    const KernelExpansion g = RandomUnitBallFunction(k, grid, rng);
    for (int i = 0; i < 6; ++i) mdp.reward[h](i) = g.Evaluate(grid[i]);
  }
  mdp.reward_min = -1.0;
  mdp.reward_max = 1.0;
  mdp.Validate();

  GenerativeModel gm(mdp, 31, RewardNoise::kExact);
  FittedRewardConfig cfg;
  cfg.samples_per_step = 6;
  cfg.exhaustive = true;
  const Eigen::VectorXd nu = Eigen::VectorXd::Constant(6, 1.0 / 6);
  const AlgorithmReport rep = FittedReward(gm, k, grid, nu, cfg);

  const ExactSolution sol = SolveExact(mdp);
  CHECK(sol.j_star - EvaluatePolicy(mdp, rep.policy).j <= 1e-8);
  const auto fitted = rep.details["fitted_rewards"];
  for (int h = 0; h < 2; ++h) {
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(fitted[h][i].get<double>() - mdp.reward[h](i)) < 1e-6);
    }
  }
  CHECK(rep.queries_used == 12);
}

TEST_CASE("fitted reward stays within the declared norm ball under noise") {
  RngStream rng(70, 0);
  FiniteMDP mdp = RandomMDP(2, 2, 2, rng);
  const Kernel k = Kernel::Gaussian(0.5);
  std::vector<Eigen::VectorXd> grid;
  for (int i = 0; i < 4; ++i) {
    grid.push_back(Eigen::VectorXd::Zero(4));
    grid.back()(i) = 1.0;
  }
  GenerativeModel gm(mdp, 32, RewardNoise::kUnitGaussian);
  FittedRewardConfig cfg;
  cfg.samples_per_step = 400;
  cfg.pair_seed = 5;
  const Eigen::VectorXd nu = Eigen::VectorXd::Constant(4, 0.25);
  const AlgorithmReport rep = FittedReward(gm, k, grid, nu, cfg);
  CHECK(rep.queries_used == 800);

  const Eigen::MatrixXd gram = BuildGram(k, grid);
  const auto fitted = rep.details["fitted_rewards"];
  for (int h = 0; h < 2; ++h) {
    Eigen::VectorXd values(4);
    for (int i = 0; i < 4; ++i) values(i) = fitted[h][i].get<double>();
    // Native norm of the interpolant of the fitted values.
    const Eigen::VectorXd alpha = PsdPinvSolve(gram, values);
    CHECK(std::sqrt(alpha.dot(gram * alpha)) <= 1.0 + 1e-6);
  }
}

}  // TEST_SUITE
