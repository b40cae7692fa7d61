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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlfa/instances.hpp"
#include "rlfa/kernel.hpp"
#include "rlfa/mdp.hpp"
#include "rlfa/mismatch.hpp"
#include "rlfa/rng.hpp"
#include "rlfa/scenario.hpp"

namespace py = pybind11;

namespace {

using rlfa::FiniteMDP;
using rlfa::Kernel;

FiniteMDP MdpFromJson(const std::string& text) {
  return FiniteMDP::FromJson(nlohmann::json::parse(text));
}

Kernel KernelFromJson(const std::string& text) {
  return Kernel::FromJson(nlohmann::json::parse(text));
}

// Rows of a numpy array become the point list the C++ side expects.
std::vector<Eigen::VectorXd> RowsToPoints(const Eigen::MatrixXd& m) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    pts.push_back(m.row(i).transpose());
  }
  return pts;
}

rlfa::DistributionSet SetFromRows(const Eigen::MatrixXd& rows) {
  rlfa::DistributionSet set;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    set.members.push_back(rows.row(i).transpose());
  }
  return set;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Exact dynamic programming, kernel spectra, and distribution-mismatch "
      "calculations on finite supports.";
  m.attr("__version__") = "0.1.0";

  py::register_exception<rlfa::ValidationError>(m, "ValidationError",
                                                PyExc_ValueError);
  py::register_exception<rlfa::NumericalError>(m, "NumericalError",
                                               PyExc_ArithmeticError);

  m.def(
      "random_mdp",
      [](int num_states, int num_actions, int horizon, std::uint64_t seed) {
        rlfa::RngStream rng(seed, 0);
        return rlfa::RandomMDP(num_states, num_actions, horizon, rng)
            .ToJson()
            .dump();
      },
      py::arg("num_states"), py::arg("num_actions"), py::arg("horizon"),
      py::arg("seed"), "Seeded random instance, returned as a JSON string.");

  m.def(
      "solve_exact",
      [](const std::string& mdp_json) {
        const FiniteMDP mdp = MdpFromJson(mdp_json);
        const rlfa::ExactSolution sol = rlfa::SolveExact(mdp);
        py::list q_star;
        py::list greedy;
        for (int h = 0; h < mdp.horizon; ++h) {
          q_star.append(Eigen::MatrixXd(sol.q_star.table[h]));
          py::list row;
          for (int s = 0; s < mdp.num_states(); ++s) {
            int best = 0;
            for (int a = 1; a < mdp.num_actions(); ++a) {
              if (sol.pi_star.table[h](s, a) >
                  sol.pi_star.table[h](s, best)) {
                best = a;
              }
            }
            row.append(best);
          }
          greedy.append(row);
        }
        py::dict out;
        out["j_star"] = sol.j_star;
        out["q_star"] = q_star;
        out["greedy_actions"] = greedy;
        return out;
      },
      py::arg("mdp_json"),
      "Backward-induction optimum: j_star, per-step Q tables, greedy "
      "actions.");

  m.def(
      "evaluate_policy",
      [](const std::string& mdp_json,
         const std::vector<std::vector<int>>& actions) {
        const FiniteMDP mdp = MdpFromJson(mdp_json);
        const rlfa::Policy pi =
            rlfa::Policy::Deterministic(actions, mdp.num_actions());
        return rlfa::EvaluatePolicy(mdp, pi).j;
      },
      py::arg("mdp_json"), py::arg("actions"),
      "Value of the deterministic policy given as actions[h][s].");

  m.def(
      "softmax_gap",
      [](const std::string& mdp_json,
         const std::vector<Eigen::MatrixXd>& q_tables, double beta) {
        const FiniteMDP mdp = MdpFromJson(mdp_json);
        rlfa::QFunction q;
        q.table = q_tables;
        const rlfa::SoftmaxGapCertificate cert =
            rlfa::SoftmaxGapBound(mdp, q, beta);
        py::dict out;
        out["gap"] = cert.gap;
        out["bound"] = cert.bound;
        out["entropy_term"] = cert.entropy_term;
        out["error_term"] = cert.error_term;
        return out;
      },
      py::arg("mdp_json"), py::arg("q_tables"), py::arg("beta"),
      "Realized suboptimality of the softmax policy built from the given Q "
      "tables, with its certified upper bound.");

  m.def(
      "gram",
      [](const std::string& kernel_json, const Eigen::MatrixXd& points) {
        return rlfa::BuildGram(KernelFromJson(kernel_json),
                               RowsToPoints(points));
      },
      py::arg("kernel_json"), py::arg("points"),
      "Dense kernel matrix; points are rows.");

  m.def(
      "mercer_spectrum",
      [](const std::string& kernel_json, const Eigen::MatrixXd& points,
         const Eigen::VectorXd& rho) {
        const rlfa::Spectrum sp = rlfa::MercerSpectrum(
            KernelFromJson(kernel_json), RowsToPoints(points), rho);
        py::dict out;
        out["eigenvalues"] = Eigen::VectorXd(sp.eigenvalues);
        out["eigenfunctions"] = Eigen::MatrixXd(sp.eigenfunctions);
        out["trace"] = sp.TailSum(0);
        return out;
      },
      py::arg("kernel_json"), py::arg("points"), py::arg("rho"),
      "Eigensystem of the kernel operator on the weighted support; "
      "eigenfunctions are orthonormal in L2(rho).");

  m.def(
      "power_function",
      [](const std::string& kernel_json, const Eigen::MatrixXd& centers,
         const Eigen::VectorXd& x) {
        return rlfa::PowerFunction(KernelFromJson(kernel_json),
                                   RowsToPoints(centers), x);
      },
      py::arg("kernel_json"), py::arg("centers"), py::arg("x"),
      "Worst interpolation error at x over the unit ball of the native "
      "space.");

  m.def(
      "krr_predict",
      [](const std::string& kernel_json, const Eigen::MatrixXd& train,
         const Eigen::VectorXd& y, double lambda,
         const Eigen::MatrixXd& test) {
        const rlfa::KrrModel model = rlfa::KrrFit(
            KernelFromJson(kernel_json), RowsToPoints(train), y, lambda);
        Eigen::VectorXd pred(test.rows());
        for (Eigen::Index i = 0; i < test.rows(); ++i) {
          pred(i) = model.Predict(test.row(i).transpose());
        }
        return pred;
      },
      py::arg("kernel_json"), py::arg("train"), py::arg("y"),
      py::arg("lambda"), py::arg("test"),
      "Kernel ridge regression fit on (train, y), evaluated at test rows.");

  m.def(
      "perturbation_response",
      [](const std::string& kernel_json, const Eigen::MatrixXd& support,
         const Eigen::VectorXd& nu, double epsilon,
         const Eigen::MatrixXd& pi_rows) {
        const rlfa::ResponseResult rr =
            rlfa::PerturbationResponse(rlfa::PerturbationInstance::Make(
                KernelFromJson(kernel_json), RowsToPoints(support), nu,
                epsilon, SetFromRows(pi_rows)));
        py::dict out;
        out["value"] = rr.value;
        out["argmax_member"] = rr.argmax_member;
        out["dual_gap"] = rr.dual_gap;
        out["witness"] = Eigen::VectorXd(rr.witness);
        return out;
      },
      py::arg("kernel_json"), py::arg("support"), py::arg("nu"),
      py::arg("epsilon"), py::arg("pi_rows"),
      "Worst-case test integral over unit-ball functions that nu can only "
      "see up to epsilon.");

  m.def(
      "delta_complexity",
      [](const std::string& kernel_json, const Eigen::MatrixXd& support,
         const Eigen::MatrixXd& pi_rows, double epsilon) {
        const rlfa::DistributionSet pi = SetFromRows(pi_rows);
        const Kernel kernel = KernelFromJson(kernel_json);
        const auto support_pts = RowsToPoints(support);
        std::vector<Eigen::VectorXd> candidates =
            rlfa::DefaultNuCandidates(pi);
        const rlfa::DeltaResult first = rlfa::DeltaComplexity(
            kernel, support_pts, pi, epsilon, candidates);
        candidates.push_back(rlfa::RefineNuCandidate(
            kernel, support_pts, pi, epsilon,
            candidates[first.argmin_candidate]));
        const rlfa::DeltaResult refined = rlfa::DeltaComplexity(
            kernel, support_pts, pi, epsilon, candidates);
        py::dict out;
        out["value"] = refined.value;
        out["nu"] = Eigen::VectorXd(candidates[refined.argmin_candidate]);
        return out;
      },
      py::arg("kernel_json"), py::arg("support"), py::arg("pi_rows"),
      py::arg("epsilon"),
      "Best response over curated sampling candidates plus one local "
      "refinement pass.");

  m.def(
      "concentration",
      [](const std::vector<Eigen::VectorXd>& nu_per_step,
         const std::vector<Eigen::MatrixXd>& rho_rows_per_step) {
        std::vector<rlfa::DistributionSet> rho_sets;
        rho_sets.reserve(rho_rows_per_step.size());
        for (const auto& rows : rho_rows_per_step) {
          rho_sets.push_back(SetFromRows(rows));
        }
        const rlfa::ConcentrationResult res =
            rlfa::ConcentrationCoefficient(nu_per_step, rho_sets);
        py::dict out;
        out["value"] = res.value;
        out["worst_step"] = res.worst_step;
        out["worst_member"] = res.worst_member;
        return out;
      },
      py::arg("nu_per_step"), py::arg("rho_rows_per_step"),
      "Largest L2(nu) norm of d rho / d nu across steps and members.");

  m.def(
      "run_scenario",
      [](const std::string& config_json, const std::string& out_dir) {
        const rlfa::RunArtifact art =
            rlfa::RunScenario(nlohmann::json::parse(config_json));
        if (!out_dir.empty()) art.Write(out_dir);
        py::dict out;
        out["metadata"] = art.metadata.dump();
        out["summary"] = art.summary;
        out["headline"] = art.headline;
        out["has_assertions"] = art.has_assertions;
        out["assertions_passed"] = art.assertions_passed;
        py::dict tables;
        for (const auto& [name, body] : art.tables) {
          tables[py::str(name)] = body;
        }
        out["tables"] = tables;
        return out;
      },
      py::arg("config_json"), py::arg("out_dir") = std::string(),
      "Runs one named scenario from its JSON config; optionally writes the "
      "artifact directory.");
}
