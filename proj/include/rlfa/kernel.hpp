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

#ifndef RLFA_KERNEL_HPP_
#define RLFA_KERNEL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlfa/errors.hpp"
#include "rlfa/rng.hpp"

namespace rlfa {

enum class KernelKind { kGaussian, kLaplacian, kNtk, kRandomFeature };

// Positive-definite kernel with four families:
//   gaussian        exp(-alpha |x-y|^2)
//   laplacian       exp(-alpha |x-y|)
//   ntk             two-layer ReLU tangent kernel, closed form in the angle
//   random-feature  expectation kernel of ReLU features with random
//                   first-layer weights, closed form in the angle
// The angle-based families also come in Monte Carlo form, averaging over a
// fixed draw of directions; the draw is part of the kernel object so two
// evaluations of the same kernel always agree.
class Kernel {
 public:
  static Kernel Gaussian(double alpha);
  static Kernel Laplacian(double alpha);
  static Kernel Ntk(int dim);
  static Kernel RandomFeature(int dim);
  // Monte Carlo estimates with `samples` fixed directions drawn from `seed`:
  // gaussian rows scaled by 1/sqrt(dim) for the tangent kernel, uniform
  // sphere rows for the random-feature kernel.
  static Kernel NtkMonteCarlo(int dim, int samples, std::uint64_t seed);
  static Kernel RandomFeatureMonteCarlo(int dim, int samples,
                                        std::uint64_t seed);

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  KernelKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  int dim() const { return dim_; }
  int mc_samples() const { return static_cast<int>(directions_.rows()); }
  bool is_monte_carlo() const { return directions_.rows() > 0; }

  nlohmann::json ToJson() const;
  static Kernel FromJson(const nlohmann::json& j);

 private:
  Kernel() = default;
  KernelKind kind_ = KernelKind::kGaussian;
  double alpha_ = 1.0;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  Eigen::MatrixXd directions_;  // empty means closed form
};

// Dense Gram matrix K_ij = k(x_i, x_j).
Eigen::MatrixXd BuildGram(const Kernel& k,
                          const std::vector<Eigen::VectorXd>& points);

// Throws NumericalError if the symmetric matrix has an eigenvalue below
// -tol. Returns the smallest eigenvalue.
double CheckPsd(const Eigen::MatrixXd& sym, double tol);

// Moore-Penrose solve of a symmetric PSD system. Eigenvalues at or below
// rel_cutoff times the largest are treated as zero.
Eigen::VectorXd PsdPinvSolve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             double rel_cutoff = 1e-10);

// Eigensystem of the kernel integral operator on a finite measure with
// strictly positive weights: eigenpairs of D^{1/2} K D^{1/2} mapped back to
// functions psi_i = D^{-1/2} u_i that are orthonormal in L2(rho). The
// reconstruction sum_i lambda_i psi_i(x) psi_i(y) reproduces K exactly.
struct Spectrum {
  std::vector<Eigen::VectorXd> support;
  Eigen::VectorXd rho;             // strictly positive, sums to one
  Eigen::VectorXd eigenvalues;     // nonincreasing, nonnegative
  Eigen::MatrixXd eigenfunctions;  // column i holds psi_i on the support
  Eigen::MatrixXd gram;            // cached K on the support

  int size() const { return static_cast<int>(rho.size()); }
  // Sum of eigenvalues past the first n (n = 0 gives the full trace).
  double TailSum(int n) const;
};

Spectrum MercerSpectrum(const Kernel& k,
                        std::vector<Eigen::VectorXd> support,
                        Eigen::VectorXd rho);

// Squared-summability norm of a function given by its values on the
// support: sqrt(sum_i <g, psi_i>^2 / lambda_i). Components carried by
// eigenvalues at or below 1e-12 make the norm infinite.
double RkhsNorm(const Spectrum& spectrum, const Eigen::VectorXd& g);

// Pointwise worst-case interpolation error over the unit ball:
// sqrt(k(x,x) - k_x^T K^+ k_x) evaluated at x given interpolation centers.
double PowerFunction(const Kernel& k,
                     const std::vector<Eigen::VectorXd>& centers,
                     const Eigen::VectorXd& x);

// Values at the probe points of the native-space orthonormalization of
// {k(center_i, .)}: entry (i, j) holds phi_i(probe_j), phi from the
// Cholesky factor of the center Gram. Requires independent centers.
// sum_i phi_i(x)^2 + PowerFunction(x)^2 equals k(x, x).
Eigen::MatrixXd OrthonormalBasisValues(const Kernel& k,
                                       const std::vector<Eigen::VectorXd>& centers,
                                       const std::vector<Eigen::VectorXd>& probes);

// Kernel ridge regression fit alpha = (K + lambda n I)^{-1} y. With
// lambda = 0 this interpolates, solved by LDLT plus iterative refinement.
struct KrrModel {
  Kernel kernel;
  std::vector<Eigen::VectorXd> points;
  Eigen::VectorXd coef;
  double lambda = 0.0;

  double Predict(const Eigen::VectorXd& x) const;
};

KrrModel KrrFit(const Kernel& k, std::vector<Eigen::VectorXd> points,
                const Eigen::VectorXd& y, double lambda);

// Two-layer ReLU model with frozen random first layer: f(x) =
// (1/m) sum_j a_j relu(w_j . x), outer weights fit by ridge regression.
struct TwoLayerModel {
  Eigen::MatrixXd directions;  // m x d, uniform on the sphere
  Eigen::VectorXd outer;       // m
  double training_mse = 0.0;

  double Predict(const Eigen::VectorXd& x) const;
};

TwoLayerModel RandomFeatureRegress(const std::vector<Eigen::VectorXd>& xs,
                                   const Eigen::VectorXd& targets, int width,
                                   double lambda, RngStream& rng);

// Columns: index,eigenvalue,tail_sum with 1-based index; tail_sum on row i
// is the sum of eigenvalues strictly past i.
void WriteSpectrumCsv(std::ostream& out, const Spectrum& spectrum);

}  // namespace rlfa

#endif  // RLFA_KERNEL_HPP_
