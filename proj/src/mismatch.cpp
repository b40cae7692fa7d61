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

#include "rlfa/mismatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlfa/format.hpp"

namespace rlfa {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

// Relative eigenvalue cutoff shared by the whitening and the zero-mode
// classification below.
constexpr double kRankCutoff = 1e-10;

void CheckProbabilityVector(const Eigen::VectorXd& p, const char* what) {
  if (p.size() == 0) throw ValidationError(std::string(what) + " is empty");
  if (p.minCoeff() < -1e-9) {
    throw ValidationError(std::string(what) + " has a negative entry");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) {
    throw ValidationError(std::string(what) + " does not sum to one");
  }
}

// Basis change that turns the native-norm ball into the euclidean ball:
// candidate functions are g = W z with ||g||_native = ||z||, where
// W = U_r diag(sqrt(lambda_r)) keeps the numerically nonzero part of the
// Gram spectrum. Columns of W are the function values on the grid.
Eigen::MatrixXd WhitenGram(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double cutoff = kRankCutoff * std::max(es.eigenvalues().maxCoeff(), 0.0);
  int rank = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > cutoff) ++rank;
  }
  Eigen::MatrixXd w(gram.rows(), rank);
  int col = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > cutoff) {
      w.col(col++) = es.eigenvectors().col(i) * std::sqrt(es.eigenvalues()(i));
    }
  }
  return w;
}

// The L2(nu) constraint in whitened coordinates, rotated diagonal:
// ||g||^2_{L2(nu)} = sum_i s_i y_i^2 with y = Q^T z.
struct DiagonalizedConstraint {
  Eigen::VectorXd s;        // nonnegative
  Eigen::MatrixXd grid_q;   // (W Q): column i holds values of mode i
};

DiagonalizedConstraint DiagonalizeNu(const Eigen::MatrixXd& w,
                                     const Eigen::VectorXd& nu) {
  const Eigen::MatrixXd g =
      w.transpose() * nu.asDiagonal() * w;  // r x r, PSD
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  DiagonalizedConstraint out;
  out.s = es.eigenvalues().cwiseMax(0.0);
  out.grid_q = w * es.eigenvectors();
  return out;
}

struct EllipsoidOptimum {
  double dual = 0.0;
  double primal = 0.0;
  Eigen::VectorXd witness;  // grid values
};

// max <g, rho> over ||g||_native <= 1, ||g||_{L2(nu)} <= eps, solved in the
// diagonal coordinates where the dual objective is
//   q(t) = sum_i wt_i^2 / (t + (1 - t) s_i / eps^2),  t in [0, 1],
// a convex function minimized by golden-section search. eps = 0 restricts
// to the modes that nu cannot see.
EllipsoidOptimum SolveMember(const DiagonalizedConstraint& diag, double eps,
                             const Eigen::VectorXd& rho) {
  EllipsoidOptimum out;
  const Eigen::VectorXd wt = diag.grid_q.transpose() * rho;
  const int r = static_cast<int>(wt.size());
  out.witness = Eigen::VectorXd::Zero(diag.grid_q.rows());
  if (r == 0 || wt.norm() == 0.0) return out;

  const double s_cut = kRankCutoff * std::max(diag.s.maxCoeff(), 0.0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(r);

  if (eps <= 0.0) {
    // Only modes invisible to nu may carry weight.
    double sq = 0.0;
    for (int i = 0; i < r; ++i) {
      if (diag.s(i) <= s_cut) sq += wt(i) * wt(i);
    }
    out.dual = std::sqrt(sq);
    if (out.dual > 0.0) {
      for (int i = 0; i < r; ++i) {
        if (diag.s(i) <= s_cut) y(i) = wt(i) / out.dual;
      }
    }
    out.primal = wt.dot(y);
    out.witness = diag.grid_q * y;
    return out;
  }

  const double eps2 = eps * eps;
  const auto q = [&](double t) {
    double acc = 0.0;
    for (int i = 0; i < r; ++i) {
      const double denom = t + (1.0 - t) * diag.s(i) / eps2;
      if (denom <= 0.0) {
        if (wt(i) != 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      acc += wt(i) * wt(i) / denom;
    }
    return acc;
  };

  double lo = 0.0, hi = 1.0;
  const double kGolden = 0.6180339887498949;
  double t1 = hi - kGolden * (hi - lo);
  double t2 = lo + kGolden * (hi - lo);
  double q1 = q(t1), q2 = q(t2);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    if (q1 <= q2) {
      hi = t2;
      t2 = t1;
      q2 = q1;
      t1 = hi - kGolden * (hi - lo);
      q1 = q(t1);
    } else {
      lo = t1;
      t1 = t2;
      q1 = q2;
      t2 = lo + kGolden * (hi - lo);
      q2 = q(t2);
    }
  }
  double t_star = 0.5 * (lo + hi);
  double q_star = q(t_star);
  // The boundary t = 1 (nu constraint slack) is a valid candidate the
  // interior probes cannot quite reach.
  if (q(1.0) < q_star) {
    t_star = 1.0;
    q_star = q(1.0);
  }
  out.dual = std::sqrt(std::max(0.0, q_star));
  if (out.dual == 0.0) return out;

  for (int i = 0; i < r; ++i) {
    const double denom = t_star + (1.0 - t_star) * diag.s(i) / eps2;
    y(i) = denom > 0.0 ? wt(i) / (denom * out.dual) : 0.0;
  }
  // Project the stationary point back into the feasible set so the primal
  // value is a certified lower bound.
  double norm_h = y.squaredNorm();
  double norm_nu = 0.0;
  for (int i = 0; i < r; ++i) norm_nu += diag.s(i) * y(i) * y(i);
  const double violation = std::max({norm_h, norm_nu / eps2, 1.0});
  y /= std::sqrt(violation);
  out.primal = wt.dot(y);
  out.witness = diag.grid_q * y;
  return out;
}

}  // namespace

void DistributionSet::Validate() const {
  if (members.empty()) throw ValidationError("distribution set is empty");
  const Eigen::Index m = members[0].size();
  for (const auto& p : members) {
    if (p.size() != m) {
      throw ValidationError("distribution set members disagree on support size");
    }
    CheckProbabilityVector(p, "distribution set member");
  }
}

double PiNorm(const Eigen::VectorXd& g, const DistributionSet& pi) {
  pi.Validate();
  if (g.size() != pi.support_size()) {
    throw ValidationError("function values do not match the support");
  }
  double best = 0.0;
  for (const auto& p : pi.members) best = std::max(best, std::abs(p.dot(g)));
  return best;
}

PerturbationInstance PerturbationInstance::Make(
    const Kernel& kernel, std::vector<Eigen::VectorXd> support,
    Eigen::VectorXd nu, double epsilon, DistributionSet pi) {
  PerturbationInstance inst;
  inst.gram = BuildGram(kernel, support);
  inst.support = std::move(support);
  inst.nu = std::move(nu);
  inst.epsilon = epsilon;
  inst.pi = std::move(pi);
  inst.Validate();
  return inst;
}

void PerturbationInstance::Validate() const {
  const int m = static_cast<int>(support.size());
  if (m == 0) throw ValidationError("empty support");
  if (gram.rows() != m || gram.cols() != m) {
    throw ValidationError("Gram matrix does not match the support");
  }
  if (nu.size() != m) {
    throw ValidationError("sampling distribution does not match the support");
  }
  CheckProbabilityVector(nu, "sampling distribution");
  if (epsilon < 0.0) throw ValidationError("perturbation scale is negative");
  pi.Validate();
  if (pi.support_size() != m) {
    throw ValidationError("test distributions do not match the support");
  }
}

ResponseResult PerturbationResponse(const PerturbationInstance& instance) {
  instance.Validate();
  CheckPsd(instance.gram, 1e-8 * instance.gram.rows());
  const Eigen::MatrixXd w = WhitenGram(instance.gram);
  const DiagonalizedConstraint diag = DiagonalizeNu(w, instance.nu);

  ResponseResult result;
  result.witness = Eigen::VectorXd::Zero(instance.gram.rows());
  for (int i = 0; i < instance.pi.size(); ++i) {
    const EllipsoidOptimum opt =
        SolveMember(diag, instance.epsilon, instance.pi.members[i]);
    result.per_member.push_back(opt.dual);
    result.per_member_gap.push_back(opt.dual - opt.primal);
    if (result.argmax_member < 0 || opt.dual > result.value) {
      result.value = opt.dual;
      result.argmax_member = i;
      result.witness = opt.witness;
      result.witness_value = opt.primal;
    }
  }
  result.dual_gap = result.value - result.witness_value;
  return result;
}

DeltaResult DeltaComplexity(const Kernel& kernel,
                            const std::vector<Eigen::VectorXd>& support,
                            const DistributionSet& pi, double epsilon,
                            const std::vector<Eigen::VectorXd>& nu_candidates) {
  if (nu_candidates.empty()) {
    throw ValidationError("no sampling candidates given");
  }
  const Eigen::MatrixXd gram = BuildGram(kernel, support);
  CheckPsd(gram, 1e-8 * gram.rows());
  const Eigen::MatrixXd w = WhitenGram(gram);

  DeltaResult result;
  for (std::size_t c = 0; c < nu_candidates.size(); ++c) {
    CheckProbabilityVector(nu_candidates[c], "sampling candidate");
    const DiagonalizedConstraint diag = DiagonalizeNu(w, nu_candidates[c]);
    double worst = 0.0;
    for (const auto& rho : pi.members) {
      worst = std::max(worst, SolveMember(diag, epsilon, rho).dual);
    }
    result.per_candidate.push_back(worst);
    if (result.argmin_candidate < 0 || worst < result.value) {
      result.value = worst;
      result.argmin_candidate = static_cast<int>(c);
    }
  }
  return result;
}

std::vector<Eigen::VectorXd> DefaultNuCandidates(const DistributionSet& pi) {
  pi.Validate();
  const int m = pi.support_size();
  std::vector<Eigen::VectorXd> out;
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(m, 1.0 / m);
  out.push_back(uniform);
  for (const auto& p : pi.members) out.push_back(p);
  for (int i = 0; i < pi.size(); ++i) {
    for (int j = i + 1; j < pi.size(); ++j) {
      out.push_back(0.5 * (pi.members[i] + pi.members[j]));
    }
    out.push_back(0.5 * (pi.members[i] + uniform));
  }
  return out;
}

std::vector<Eigen::VectorXd> SimplexMeshCandidates(int support_size,
                                                   int resolution) {
  if (support_size < 1 || resolution < 1) {
    throw ValidationError("mesh needs a positive support size and resolution");
  }
  double size_estimate = 1.0;
  for (int i = 1; i < support_size; ++i) {
    size_estimate *= static_cast<double>(resolution + i) / i;
  }
  if (size_estimate > 200000.0) {
    throw ValidationError("simplex mesh would exceed 200000 points");
  }

  std::vector<Eigen::VectorXd> out;
  std::vector<int> counts(support_size, 0);
  // Odometer over compositions of `resolution` into `support_size` parts.
  int pos = 0;
  counts[0] = resolution;
  while (true) {
    Eigen::VectorXd nu(support_size);
    for (int i = 0; i < support_size; ++i) {
      nu(i) = static_cast<double>(counts[i]) / resolution;
    }
    out.push_back(std::move(nu));
    // Advance: move one unit from the leftmost positive slot before the
    // last into its right neighbor, sweeping remainder back to the front.
    pos = -1;
    for (int i = 0; i < support_size - 1; ++i) {
      if (counts[i] > 0) {
        pos = i;
        break;
      }
    }
    if (pos < 0) break;
    const int carry = counts[pos] - 1;
    counts[pos] = 0;
    counts[pos + 1] += 1;
    counts[0] = carry;
  }
  return out;
}

Eigen::VectorXd RefineNuCandidate(const Kernel& kernel,
                                  const std::vector<Eigen::VectorXd>& support,
                                  const DistributionSet& pi, double epsilon,
                                  Eigen::VectorXd start, int rounds) {
  pi.Validate();
  CheckProbabilityVector(start, "refinement start");
  const int m = static_cast<int>(support.size());
  if (start.size() != m || pi.support_size() != m) {
    throw ValidationError("refinement support sizes disagree");
  }
  const Eigen::MatrixXd gram = BuildGram(kernel, support);
  CheckPsd(gram, 1e-8 * gram.rows());
  const Eigen::MatrixXd w = WhitenGram(gram);

  const auto objective = [&](const Eigen::VectorXd& nu) {
    const DiagonalizedConstraint diag = DiagonalizeNu(w, nu);
    double worst = 0.0;
    for (const auto& rho : pi.members) {
      worst = std::max(worst, SolveMember(diag, epsilon, rho).dual);
    }
    return worst;
  };

  Eigen::VectorXd nu = std::move(start);
  double value = objective(nu);
  double step = 0.25;
  for (int round = 0; round < rounds && step > 1e-5; ++round) {
    double best_value = value;
    Eigen::VectorXd best_nu = nu;
    for (int i = 0; i < m; ++i) {
      const double amount = std::min(step, nu(i));
      if (amount <= 0.0) continue;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        Eigen::VectorXd trial = nu;
        trial(i) -= amount;
        trial(j) += amount;
        const double v = objective(trial);
        if (v < best_value - 1e-14) {
          best_value = v;
          best_nu = std::move(trial);
        }
      }
    }
    if (best_value < value - 1e-14) {
      value = best_value;
      nu = best_nu;
    } else {
      step *= 0.5;
    }
  }
  return nu;
}

DistributionSet ReachableSet::United() const {
  DistributionSet all;
  for (const auto& step_set : per_step) {
    for (const auto& p : step_set.members) all.members.push_back(p);
  }
  return all;
}

namespace {

// Appends p to set unless an existing member matches to within 1e-12.
void AddDeduped(DistributionSet& set, const Eigen::VectorXd& p) {
  for (const auto& q : set.members) {
    if ((q - p).lpNorm<Eigen::Infinity>() < 1e-12) return;
  }
  set.members.push_back(p);
}

}  // namespace

ReachableSet ComputeReachable(const FiniteMDP& mdp, ReachableMode mode,
                              int num_samples, std::uint64_t seed) {
  mdp.Validate();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  ReachableSet out;
  out.per_step.resize(mdp.horizon);

  if (mode == ReachableMode::kEnumerate) {
    const double total = std::pow(static_cast<double>(A), S * mdp.horizon);
    if (total > 3e5) {
      throw ValidationError(
          "deterministic policy enumeration too large; use sampling");
    }
    const long long count = static_cast<long long>(total);
    for (long long code = 0; code < count; ++code) {
      long long rest = code;
      std::vector<std::vector<int>> choice(mdp.horizon, std::vector<int>(S));
      for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < S; ++s) {
          choice[h][s] = static_cast<int>(rest % A);
          rest /= A;
        }
      }
      const auto occ = ComputeOccupancy(
          mdp, Policy::Deterministic(choice, A));
      for (int h = 0; h < mdp.horizon; ++h) {
        AddDeduped(out.per_step[h], occ[h].probs);
      }
    }
    return out;
  }

  if (num_samples <= 0) {
    throw ValidationError("sampled reachability needs a positive sample count");
  }
  RngStream rng(seed, 7);
  for (int i = 0; i < num_samples; ++i) {
    Policy pi;
    for (int h = 0; h < mdp.horizon; ++h) {
      Eigen::MatrixXd t(S, A);
      for (int s = 0; s < S; ++s) {
        double sum = 0.0;
        for (int a = 0; a < A; ++a) {
          t(s, a) = -std::log(1.0 - rng.Uniform());
          sum += t(s, a);
        }
        t.row(s) /= sum;
      }
      pi.table.push_back(std::move(t));
    }
    const auto occ = ComputeOccupancy(mdp, pi);
    for (int h = 0; h < mdp.horizon; ++h) {
      AddDeduped(out.per_step[h], occ[h].probs);
    }
  }
  return out;
}

ConcentrationResult ConcentrationCoefficient(
    const std::vector<Eigen::VectorXd>& nu_per_step,
    const std::vector<DistributionSet>& rho_per_step) {
  if (nu_per_step.size() != rho_per_step.size()) {
    throw ValidationError("step counts of nu and rho collections differ");
  }
  ConcentrationResult out;
  double worst_sq = 0.0;
  for (std::size_t h = 0; h < nu_per_step.size(); ++h) {
    const Eigen::VectorXd& nu = nu_per_step[h];
    CheckProbabilityVector(nu, "sampling distribution");
    for (int m = 0; m < rho_per_step[h].size(); ++m) {
      const Eigen::VectorXd& rho = rho_per_step[h].members[m];
      if (rho.size() != nu.size()) {
        throw ValidationError("distribution support sizes differ");
      }
      double sq = 0.0;
      for (int x = 0; x < rho.size(); ++x) {
        if (rho(x) <= 0.0) continue;
        if (nu(x) <= 0.0) {
          out.value = std::numeric_limits<double>::infinity();
          out.worst_step = static_cast<int>(h);
          out.worst_member = m;
          out.offending_atom = x;
          return out;
        }
        sq += rho(x) * rho(x) / nu(x);
      }
      if (sq > worst_sq) {
        worst_sq = sq;
        out.worst_step = static_cast<int>(h);
        out.worst_member = m;
      }
    }
  }
  out.value = std::sqrt(worst_sq);
  return out;
}

Eigen::VectorXd CurseFamily::Embed(const Eigen::VectorXd& angles) {
  const int d = static_cast<int>(angles.size()) + 1;
  Eigen::VectorXd x(d);
  double sin_prod = 1.0;
  for (int k = 0; k < d - 1; ++k) {
    x(k) = sin_prod * std::cos(angles(k));
    sin_prod *= std::sin(angles(k));
  }
  x(d - 1) = sin_prod;
  return x;
}

Eigen::VectorXd CurseFamily::ToAngles(const Eigen::VectorXd& unit_point) {
  const int d = static_cast<int>(unit_point.size());
  Eigen::VectorXd angles(d - 1);
  for (int k = 0; k < d - 2; ++k) {
    const double tail = unit_point.tail(d - 1 - k).norm();
    angles(k) = std::atan2(tail, unit_point(k));
  }
  double last = std::atan2(unit_point(d - 1), unit_point(d - 2));
  if (last < 0.0) last += kTwoPi;
  angles(d - 2) = last;
  return angles;
}

CurseFamily MakeCurseFamily(int sphere_dim, int horizon, double delta) {
  if (sphere_dim < 2) throw ValidationError("sphere dimension must be >= 2");
  if (horizon <= 0) throw ValidationError("horizon must be positive");
  CurseFamily fam;
  fam.sphere_dim = sphere_dim;
  fam.delta = delta;
  fam.dynamics.horizon = horizon;
  fam.dynamics.num_actions = 2;
  fam.dynamics.state_dim = sphere_dim - 1;

  const int num_angles = sphere_dim - 1;
  fam.dynamics.sample_initial = [sphere_dim](RngStream& rng) {
    const std::vector<double> u = rng.UnitSphere(sphere_dim);
    Eigen::VectorXd x(sphere_dim);
    for (int i = 0; i < sphere_dim; ++i) x(i) = u[i];
    return CurseFamily::ToAngles(x);
  };
  fam.dynamics.step = [num_angles, delta](int h, const Eigen::VectorXd& s,
                                          int a) {
    Eigen::VectorXd next = s;
    const int j = h % num_angles;
    next(j) += (a == 0 ? delta : -delta);
    // Keep the coordinate in its chart: polar angles live in [0, pi),
    // the azimuth in [0, 2 pi).
    const double range = (j == num_angles - 1) ? kTwoPi : kPi;
    next(j) = std::fmod(next(j), range);
    if (next(j) < 0.0) next(j) += range;
    return next;
  };
  fam.dynamics.reward = [](int, const Eigen::VectorXd&, int) { return 0.0; };
  return fam;
}

double KernelExpansion::Evaluate(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    acc += coef(i) * kernel(centers[i], x);
  }
  return acc;
}

KernelExpansion RandomUnitBallFunction(const Kernel& kernel,
                                       std::vector<Eigen::VectorXd> centers,
                                       RngStream& rng) {
  if (centers.empty()) throw ValidationError("expansion needs centers");
  KernelExpansion exp{kernel, std::move(centers), Eigen::VectorXd()};
  const Eigen::MatrixXd gram = BuildGram(kernel, exp.centers);
  Eigen::VectorXd c(exp.centers.size());
  for (int i = 0; i < c.size(); ++i) c(i) = rng.Normal();
  const double norm_sq = c.dot(gram * c);
  if (norm_sq <= 1e-300) {
    throw NumericalError("degenerate kernel expansion draw");
  }
  exp.coef = c / std::sqrt(norm_sq);
  return exp;
}

void AttachRewards(CurseFamily& family,
                   std::vector<KernelExpansion> expansions) {
  if (static_cast<int>(expansions.size()) != family.dynamics.horizon) {
    throw ValidationError("need one reward expansion per step");
  }
  family.dynamics.reward =
      [exps = std::move(expansions)](int h, const Eigen::VectorXd& s, int) {
        return exps[h].Evaluate(CurseFamily::Embed(s));
      };
}

void WriteMismatchCsv(std::ostream& out,
                      const std::vector<MismatchRecord>& records) {
  out << "epsilon,nu_id,rho_id,response,dual_gap\n";
  for (const auto& r : records) {
    out << FormatDouble(r.epsilon) << "," << r.nu_id << "," << r.rho_id << ","
        << FormatDouble(r.response) << "," << FormatDouble(r.dual_gap) << "\n";
  }
}

}  // namespace rlfa
