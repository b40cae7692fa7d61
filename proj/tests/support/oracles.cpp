#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "rlfa/simulator.hpp"

namespace rlfa_tests {

double BestDeterministicPolicyValue(const rlfa::FiniteMDP& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int H = mdp.horizon;
  std::vector<int> choice(static_cast<std::size_t>(H) * S, 0);
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    Eigen::VectorXd m = mdp.initial;
    double j = 0.0;
    for (int h = 0; h < H; ++h) {
      Eigen::VectorXd next = Eigen::VectorXd::Zero(S);
      for (int s = 0; s < S; ++s) {
        const int a = choice[h * S + s];
        j += m(s) * mdp.reward[h](s * A + a);
        next += m(s) * mdp.transition[h].row(s * A + a).transpose();
      }
      m = next;
    }
    best = std::max(best, j);
    std::size_t i = 0;
    while (i < choice.size()) {
      if (++choice[i] < A) break;
      choice[i] = 0;
      ++i;
    }
    if (i == choice.size()) break;
  }
  return best;
}

double MonteCarloPolicyValue(const rlfa::FiniteMDP& mdp,
                             const rlfa::Policy& pi, int episodes,
                             std::uint64_t seed) {
  rlfa::EpisodicSimulator sim(mdp, seed);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const rlfa::Trajectory traj = sim.Rollout(pi);
    for (const double r : traj.rewards) total += r;
  }
  return total / episodes;
}

Eigen::VectorXd Nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                     int max_iter) {
  const int n = static_cast<int>(a.cols());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, b.norm());

  const auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (passive[i]) idx.push_back(i);
    }
    z.setZero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd ap(a.rows(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) ap.col(c) = a.col(idx[c]);
    const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(c);
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    const Eigen::VectorXd grad = a.transpose() * (b - a * w);
    int best = -1;
    double best_grad = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[i] && grad(i) > best_grad) {
        best_grad = grad(i);
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    Eigen::VectorXd z;
    solve_passive(z);
    for (int inner = 0; inner < max_iter; ++inner) {
      double alpha = 1.0;
      bool clipped = false;
      for (int i = 0; i < n; ++i) {
        if (passive[i] && z(i) <= 0.0) {
          const double denom = w(i) - z(i);
          if (denom > 0.0) alpha = std::min(alpha, w(i) / denom);
          clipped = true;
        }
      }
      if (!clipped) break;
      w += alpha * (z - w);
      for (int i = 0; i < n; ++i) {
        if (passive[i] && w(i) <= 1e-14) {
          w(i) = 0.0;
          passive[i] = false;
        }
      }
      solve_passive(z);
    }
    w = z;
  }
  return w.cwiseMax(0.0);
}

double ConvexHullResidual(const Eigen::MatrixXd& vertices,
                          const Eigen::VectorXd& x) {
  Eigen::MatrixXd a(vertices.rows() + 1, vertices.cols());
  a.topRows(vertices.rows()) = vertices;
  a.row(vertices.rows()).setOnes();
  Eigen::VectorXd b(x.size() + 1);
  b.head(x.size()) = x;
  b(x.size()) = 1.0;
  const Eigen::VectorXd w = Nnls(a, b);
  return (a * w - b).norm();
}

namespace {

// Projection onto {u : sum_i s_i u_i^2 <= eps^2} for diagonal s >= 0.
Eigen::VectorXd ProjectEllipsoid(const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& s, double eps) {
  const double eps_sq = eps * eps;
  const auto quad = [&](const Eigen::VectorXd& v) {
    return v.cwiseProduct(s.cwiseProduct(v)).sum();
  };
  if (eps == 0.0) {
    const double cutoff =
        s.size() > 0 ? 1e-10 * std::max(0.0, s.maxCoeff()) : 0.0;
    Eigen::VectorXd out = u;
    for (int i = 0; i < out.size(); ++i) {
      if (s(i) > cutoff) out(i) = 0.0;
    }
    return out;
  }
  if (quad(u) <= eps_sq) return u;
  double lo = 0.0, hi = 1.0;
  const auto at = [&](double mu) {
    Eigen::VectorXd v = u;
    for (int i = 0; i < v.size(); ++i) v(i) /= 1.0 + mu * s(i);
    return v;
  };
  while (quad(at(hi)) > eps_sq && hi < 1e18) hi *= 2.0;
  for (int it = 0; it < 80 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (quad(at(mid)) > eps_sq) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(hi);
}

// Dykstra alternating projection onto ball(1) intersect ellipsoid.
Eigen::VectorXd ProjectIntersection(Eigen::VectorXd u,
                                    const Eigen::VectorXd& s, double eps) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(u.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(u.size());
  for (int it = 0; it < 40; ++it) {
    Eigen::VectorXd y = u + p;
    Eigen::VectorXd yb = y.norm() > 1.0 ? (y / y.norm()).eval() : y;
    p = y - yb;
    Eigen::VectorXd z = yb + q;
    u = ProjectEllipsoid(z, s, eps);
    q = z - u;
  }
  if (u.norm() > 1.0) u /= u.norm();
  return u;
}

}  // namespace

double TwoEllipsoidOracle(const Eigen::MatrixXd& gram,
                          const Eigen::VectorXd& nu, double epsilon,
                          const Eigen::VectorXd& rho, int restarts,
                          std::uint64_t seed) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd evals = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(0.0, evals.maxCoeff());
  std::vector<int> keep;
  for (int i = 0; i < evals.size(); ++i) {
    if (evals(i) > cutoff) keep.push_back(i);
  }
  if (keep.empty()) return 0.0;
  Eigen::MatrixXd w(gram.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    w.col(c) = eig.eigenvectors().col(keep[c]) * std::sqrt(evals(keep[c]));
  }
  const Eigen::MatrixXd g = w.transpose() * nu.asDiagonal() * w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> geig(g);
  const Eigen::VectorXd s = geig.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd c = geig.eigenvectors().transpose() * w.transpose() *
                            rho;

  const int r = static_cast<int>(c.size());
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double best = 0.0;
  const double cnorm = c.norm();
  if (cnorm == 0.0) return 0.0;

  for (int trial = 0; trial < restarts + 1; ++trial) {
    Eigen::VectorXd u(r);
    if (trial == 0) {
      u = c / cnorm;
    } else {
      for (int i = 0; i < r; ++i) u(i) = normal(gen);
      if (u.norm() > 0) u = u / u.norm() * std::pow(unif(gen), 1.0 / r);
    }
    u = ProjectIntersection(u, s, epsilon);
    double step = 0.5 / cnorm;
    for (int it = 0; it < 250; ++it) {
      u = ProjectIntersection(u + step * c, s, epsilon);
      step *= 0.985;
    }
    // Shrink hard into the feasible set so the reported value is attained.
    double scale = std::max(1.0, u.norm());
    if (epsilon > 0.0) {
      const double q = u.cwiseProduct(s.cwiseProduct(u)).sum();
      scale = std::max(scale, std::sqrt(q) / epsilon);
    }
    u /= scale;
    best = std::max(best, c.dot(u));
  }
  return best;
}

namespace {

void Compositions(int total, int parts, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& fn) {
  if (parts == 1) {
    cur.push_back(total);
    fn(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    Compositions(total - k, parts - 1, cur, fn);
    cur.pop_back();
  }
}

}  // namespace

double SimplexGridDeltaOracle(const Eigen::MatrixXd& gram,
                              const std::vector<Eigen::VectorXd>& support,
                              const rlfa::DistributionSet& pi, double epsilon,
                              int resolution, int zooms) {
  const int m = static_cast<int>(support.size());
  // Simplex affine maps stay inside the simplex, so shrinking the mesh
  // around the running argmin keeps every probe feasible.
  Eigen::VectorXd center = Eigen::VectorXd::Constant(m, 1.0 / m);
  double scale = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass <= zooms; ++pass) {
    Eigen::VectorXd pass_argmin = center;
    double pass_best = std::numeric_limits<double>::infinity();
    std::vector<int> cur;
    Compositions(resolution, m, cur, [&](const std::vector<int>& counts) {
      Eigen::VectorXd mesh(m);
      for (int i = 0; i < m; ++i) {
        mesh(i) = static_cast<double>(counts[i]) / resolution;
      }
      const Eigen::VectorXd nu = center + scale * (mesh - center);
      rlfa::PerturbationInstance inst;
      inst.support = support;
      inst.gram = gram;
      inst.nu = nu;
      inst.epsilon = epsilon;
      inst.pi = pi;
      const double value = rlfa::PerturbationResponse(inst).value;
      if (value < pass_best) {
        pass_best = value;
        pass_argmin = nu;
      }
    });
    best = std::min(best, pass_best);
    center = pass_argmin;
    scale *= 0.5;
  }
  return best;
}

Eigen::VectorXd FiniteDiffPolicyGradient(const rlfa::FiniteMDP& mdp,
                                         const rlfa::PolicyFeatures& psi,
                                         const Eigen::VectorXd& theta,
                                         double step) {
  const auto value = [&](const Eigen::VectorXd& t) {
    return rlfa::EvaluatePolicy(mdp, rlfa::SoftmaxFromParams(psi, t)).j;
  };
  Eigen::VectorXd grad(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd hi = theta;
    Eigen::VectorXd lo = theta;
    hi(i) += step;
    lo(i) -= step;
    grad(i) = (value(hi) - value(lo)) / (2.0 * step);
  }
  return grad;
}

Eigen::VectorXd ConjugateGradientRidge(const Eigen::MatrixXd& gram,
                                       const Eigen::VectorXd& y,
                                       double lambda_n, int max_iter,
                                       double tol) {
  const Eigen::MatrixXd a =
      gram + lambda_n * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(y.size());
  Eigen::VectorXd r = y;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  const double stop = tol * tol * std::max(1.0, y.squaredNorm());
  for (int it = 0; it < max_iter && rs > stop; ++it) {
    const Eigen::VectorXd ap = a * p;
    const double alpha = rs / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return x;
}

}  // namespace rlfa_tests
