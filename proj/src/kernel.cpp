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

#include "rlfa/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlfa/format.hpp"

namespace rlfa {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Stream ids for direction draws, one per Monte Carlo family.
constexpr std::uint64_t kNtkDirectionStream = 41;
constexpr std::uint64_t kRfDirectionStream = 42;

double AngleBetween(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    double nx, double ny) {
  const double c = std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
  return std::acos(c);
}

inline double Relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

Kernel Kernel::Gaussian(double alpha) {
  if (alpha <= 0.0) throw ValidationError("gaussian bandwidth must be positive");
  Kernel k;
  k.kind_ = KernelKind::kGaussian;
  k.alpha_ = alpha;
  return k;
}

Kernel Kernel::Laplacian(double alpha) {
  if (alpha <= 0.0) throw ValidationError("laplacian bandwidth must be positive");
  Kernel k;
  k.kind_ = KernelKind::kLaplacian;
  k.alpha_ = alpha;
  return k;
}

Kernel Kernel::Ntk(int dim) {
  if (dim <= 0) throw ValidationError("kernel input dimension must be positive");
  Kernel k;
  k.kind_ = KernelKind::kNtk;
  k.dim_ = dim;
  return k;
}

Kernel Kernel::RandomFeature(int dim) {
  if (dim <= 0) throw ValidationError("kernel input dimension must be positive");
  Kernel k;
  k.kind_ = KernelKind::kRandomFeature;
  k.dim_ = dim;
  return k;
}

Kernel Kernel::NtkMonteCarlo(int dim, int samples, std::uint64_t seed) {
  Kernel k = Ntk(dim);
  if (samples <= 0) throw ValidationError("sample count must be positive");
  k.seed_ = seed;
  RngStream rng(seed, kNtkDirectionStream);
  // First-layer weights scaled so the product of two ReLU features matches
  // the 1/d normalization of the closed form.
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  k.directions_.resize(samples, dim);
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < dim; ++j) k.directions_(i, j) = scale * rng.Normal();
  }
  return k;
}

Kernel Kernel::RandomFeatureMonteCarlo(int dim, int samples,
                                       std::uint64_t seed) {
  Kernel k = RandomFeature(dim);
  if (samples <= 0) throw ValidationError("sample count must be positive");
  k.seed_ = seed;
  RngStream rng(seed, kRfDirectionStream);
  k.directions_.resize(samples, dim);
  for (int i = 0; i < samples; ++i) {
    const std::vector<double> u = rng.UnitSphere(dim);
    for (int j = 0; j < dim; ++j) k.directions_(i, j) = u[j];
  }
  return k;
}

double Kernel::operator()(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) const {
  if (x.size() != y.size()) {
    throw ValidationError("kernel arguments have different lengths");
  }
  switch (kind_) {
    case KernelKind::kGaussian:
      return std::exp(-alpha_ * (x - y).squaredNorm());
    case KernelKind::kLaplacian:
      return std::exp(-alpha_ * (x - y).norm());
    case KernelKind::kNtk: {
      if (is_monte_carlo()) {
        const Eigen::VectorXd px = directions_ * x;
        const Eigen::VectorXd py = directions_ * y;
        const double dot = x.dot(y);
        double acc = 0.0;
        for (int i = 0; i < px.size(); ++i) {
          if (px(i) > 0.0 && py(i) > 0.0) acc += dot;
          acc += Relu(px(i)) * Relu(py(i));
        }
        return acc / static_cast<double>(px.size());
      }
      const double nx = x.norm(), ny = y.norm();
      if (nx == 0.0 || ny == 0.0) return 0.0;
      const double theta = AngleBetween(x, y, nx, ny);
      const double ct = std::cos(theta), st = std::sin(theta);
      return x.dot(y) * (kPi - theta) / (2.0 * kPi) +
             nx * ny * (st + (kPi - theta) * ct) / (2.0 * kPi * dim_);
    }
    case KernelKind::kRandomFeature: {
      if (is_monte_carlo()) {
        const Eigen::VectorXd px = directions_ * x;
        const Eigen::VectorXd py = directions_ * y;
        double acc = 0.0;
        for (int i = 0; i < px.size(); ++i) acc += Relu(px(i)) * Relu(py(i));
        return acc / static_cast<double>(px.size());
      }
      const double nx = x.norm(), ny = y.norm();
      if (nx == 0.0 || ny == 0.0) return 0.0;
      const double theta = AngleBetween(x, y, nx, ny);
      return nx * ny * (std::sin(theta) + (kPi - theta) * std::cos(theta)) /
             (2.0 * kPi * dim_);
    }
  }
  throw NumericalError("unreachable kernel kind");
}

nlohmann::json Kernel::ToJson() const {
  nlohmann::json j;
  switch (kind_) {
    case KernelKind::kGaussian:
      j["kind"] = "gaussian";
      j["alpha"] = alpha_;
      break;
    case KernelKind::kLaplacian:
      j["kind"] = "laplacian";
      j["alpha"] = alpha_;
      break;
    case KernelKind::kNtk:
      j["kind"] = "ntk";
      break;
    case KernelKind::kRandomFeature:
      j["kind"] = "random-feature";
      break;
  }
  j["d"] = dim_;
  if (is_monte_carlo()) {
    j["mc_samples"] = mc_samples();
    j["seed"] = seed_;
  }
  return j;
}

Kernel Kernel::FromJson(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const int d = j.value("d", 0);
    const int mc = j.value("mc_samples", 0);
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    if (kind == "gaussian") return Gaussian(j.at("alpha").get<double>());
    if (kind == "laplacian") return Laplacian(j.at("alpha").get<double>());
    if (kind == "ntk") return mc > 0 ? NtkMonteCarlo(d, mc, seed) : Ntk(d);
    if (kind == "random-feature") {
      return mc > 0 ? RandomFeatureMonteCarlo(d, mc, seed) : RandomFeature(d);
    }
    throw ValidationError("unknown kernel kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed kernel document: ") + e.what());
  }
}

Eigen::MatrixXd BuildGram(const Kernel& k,
                          const std::vector<Eigen::VectorXd>& points) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = k(points[i], points[j]);
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

double CheckPsd(const Eigen::MatrixXd& sym, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol) {
    throw NumericalError("matrix has eigenvalue " + FormatDouble(min_eig) +
                         " below the positive-semidefinite tolerance");
  }
  return min_eig;
}

Eigen::VectorXd PsdPinvSolve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const Eigen::VectorXd& evs = es.eigenvalues();
  const double cutoff = rel_cutoff * std::max(evs.maxCoeff(), 0.0);
  Eigen::VectorXd scaled = es.eigenvectors().transpose() * b;
  for (int i = 0; i < scaled.size(); ++i) {
    scaled(i) = evs(i) > cutoff ? scaled(i) / evs(i) : 0.0;
  }
  return es.eigenvectors() * scaled;
}

double Spectrum::TailSum(int n) const {
  if (n >= size()) return 0.0;
  if (n < 0) n = 0;
  return eigenvalues.tail(size() - n).sum();
}

Spectrum MercerSpectrum(const Kernel& k, std::vector<Eigen::VectorXd> support,
                        Eigen::VectorXd rho) {
  const int n = static_cast<int>(support.size());
  if (n == 0) throw ValidationError("empty support");
  if (rho.size() != n) {
    throw ValidationError("weight vector length does not match the support");
  }
  if (rho.minCoeff() <= 0.0) {
    // Zero-weight points would make the weighted eigenproblem blind to
    // them; drop such points before calling.
    throw ValidationError("support weights must be strictly positive");
  }
  if (std::abs(rho.sum() - 1.0) > 1e-9) {
    throw ValidationError("support weights must sum to one");
  }
  Spectrum sp;
  sp.gram = BuildGram(k, support);
  CheckPsd(sp.gram, 1e-8 * n);
  sp.support = std::move(support);
  sp.rho = std::move(rho);

  const Eigen::VectorXd half = sp.rho.cwiseSqrt();
  const Eigen::MatrixXd weighted =
      half.asDiagonal() * sp.gram * half.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted);
  // Descending order, tiny negative dust clamped to zero.
  sp.eigenvalues.resize(n);
  sp.eigenfunctions.resize(n, n);
  for (int i = 0; i < n; ++i) {
    sp.eigenvalues(i) = std::max(0.0, es.eigenvalues()(n - 1 - i));
    sp.eigenfunctions.col(i) =
        es.eigenvectors().col(n - 1 - i).cwiseQuotient(half);
  }
  return sp;
}

double RkhsNorm(const Spectrum& spectrum, const Eigen::VectorXd& g) {
  if (g.size() != spectrum.size()) {
    throw ValidationError("function values do not match the support");
  }
  const Eigen::VectorXd weighted = spectrum.rho.cwiseProduct(g);
  const Eigen::VectorXd coords = spectrum.eigenfunctions.transpose() * weighted;
  const double scale = std::max(1.0, std::sqrt(weighted.dot(g)));
  double sq = 0.0;
  for (int i = 0; i < coords.size(); ++i) {
    if (spectrum.eigenvalues(i) > 1e-12) {
      sq += coords(i) * coords(i) / spectrum.eigenvalues(i);
    } else if (std::abs(coords(i)) > 1e-9 * scale) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return std::sqrt(sq);
}

double PowerFunction(const Kernel& k,
                     const std::vector<Eigen::VectorXd>& centers,
                     const Eigen::VectorXd& x) {
  const double kxx = k(x, x);
  if (centers.empty()) return std::sqrt(std::max(0.0, kxx));
  const Eigen::MatrixXd gram = BuildGram(k, centers);
  Eigen::VectorXd kx(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) kx(i) = k(centers[i], x);
  const double fitted = kx.dot(PsdPinvSolve(gram, kx));
  return std::sqrt(std::max(0.0, kxx - fitted));
}

Eigen::MatrixXd OrthonormalBasisValues(
    const Kernel& k, const std::vector<Eigen::VectorXd>& centers,
    const std::vector<Eigen::VectorXd>& probes) {
  const int n = static_cast<int>(centers.size());
  const Eigen::MatrixXd gram = BuildGram(k, centers);
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "centers are dependent in the native space; no orthonormalization");
  }
  Eigen::MatrixXd cross(n, probes.size());
  for (std::size_t j = 0; j < probes.size(); ++j) {
    for (int i = 0; i < n; ++i) cross(i, j) = k(centers[i], probes[j]);
  }
  // phi values solve L phi = k_x columnwise.
  return llt.matrixL().solve(cross);
}

double KrrModel::Predict(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    acc += coef(i) * kernel(points[i], x);
  }
  return acc;
}

KrrModel KrrFit(const Kernel& k, std::vector<Eigen::VectorXd> points,
                const Eigen::VectorXd& y, double lambda) {
  const int n = static_cast<int>(points.size());
  if (y.size() != n) throw ValidationError("targets do not match the points");
  if (lambda < 0.0) throw ValidationError("ridge multiplier must be nonnegative");
  KrrModel model{k, std::move(points), Eigen::VectorXd(), lambda};
  const Eigen::MatrixXd gram = BuildGram(k, model.points);
  Eigen::MatrixXd sys = gram;
  sys.diagonal().array() += lambda * n;
  const auto ldlt = sys.ldlt();
  Eigen::VectorXd alpha = ldlt.solve(y);
  if (lambda == 0.0) {
    // Interpolation: polish the solve, then fall back to the pseudoinverse
    // if the system was too ill-conditioned for refinement to rescue.
    for (int round = 0; round < 2; ++round) {
      alpha += ldlt.solve(y - sys * alpha);
    }
    const double residual = (sys * alpha - y).norm();
    if (!(residual <= 1e-8 * std::max(1.0, y.norm()))) {
      alpha = PsdPinvSolve(gram, y);
    }
  }
  model.coef = std::move(alpha);
  return model;
}

double TwoLayerModel::Predict(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd pre = directions * x;
  double acc = 0.0;
  for (int j = 0; j < pre.size(); ++j) acc += outer(j) * Relu(pre(j));
  return acc / static_cast<double>(pre.size());
}

TwoLayerModel RandomFeatureRegress(const std::vector<Eigen::VectorXd>& xs,
                                   const Eigen::VectorXd& targets, int width,
                                   double lambda, RngStream& rng) {
  const int n = static_cast<int>(xs.size());
  if (n == 0) throw ValidationError("no training points");
  if (targets.size() != n) throw ValidationError("targets do not match points");
  if (width <= 0) throw ValidationError("width must be positive");
  const int d = static_cast<int>(xs[0].size());
  TwoLayerModel model;
  model.directions.resize(width, d);
  for (int j = 0; j < width; ++j) {
    const std::vector<double> u = rng.UnitSphere(d);
    for (int c = 0; c < d; ++c) model.directions(j, c) = u[c];
  }
  Eigen::MatrixXd feats(n, width);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd pre = model.directions * xs[i];
    for (int j = 0; j < width; ++j) {
      feats(i, j) = Relu(pre(j)) / static_cast<double>(width);
    }
  }
  Eigen::MatrixXd sys = feats.transpose() * feats;
  sys.diagonal().array() += lambda;
  model.outer = sys.ldlt().solve(feats.transpose() * targets);
  model.training_mse =
      (feats * model.outer - targets).squaredNorm() / static_cast<double>(n);
  return model;
}

void WriteSpectrumCsv(std::ostream& out, const Spectrum& spectrum) {
  out << "index,eigenvalue,tail_sum\n";
  for (int i = 0; i < spectrum.size(); ++i) {
    out << (i + 1) << "," << FormatDouble(spectrum.eigenvalues(i)) << ","
        << FormatDouble(spectrum.TailSum(i + 1)) << "\n";
  }
}

}  // namespace rlfa
