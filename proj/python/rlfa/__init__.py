# Copyright 2026 The rlfa Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Desk-scale reinforcement-learning calculations on finite supports.

The heavy lifting lives in the compiled extension; this package re-exports
its entry points and adds small JSON helpers for the kernel descriptors.
"""

import json

from ._core import (
    NumericalError,
    ValidationError,
    __version__,
    concentration,
    delta_complexity,
    evaluate_policy,
    gram,
    krr_predict,
    mercer_spectrum,
    perturbation_response,
    power_function,
    random_mdp,
    run_scenario,
    softmax_gap,
    solve_exact,
)


def gaussian_kernel(alpha=1.0):
    """JSON descriptor of the squared-exponential kernel."""
    return json.dumps({"kind": "gaussian", "alpha": alpha})


def laplacian_kernel(alpha=1.0):
    """JSON descriptor of the exponential kernel."""
    return json.dumps({"kind": "laplacian", "alpha": alpha})


def ntk_kernel(dim):
    """JSON descriptor of the two-layer ReLU tangent kernel."""
    return json.dumps({"kind": "ntk", "d": dim})


__all__ = [
    "NumericalError",
    "ValidationError",
    "__version__",
    "concentration",
    "delta_complexity",
    "evaluate_policy",
    "gaussian_kernel",
    "gram",
    "krr_predict",
    "laplacian_kernel",
    "mercer_spectrum",
    "ntk_kernel",
    "perturbation_response",
    "power_function",
    "random_mdp",
    "run_scenario",
    "softmax_gap",
    "solve_exact",
]
