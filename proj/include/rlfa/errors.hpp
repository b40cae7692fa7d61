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

#ifndef RLFA_ERRORS_HPP_
#define RLFA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rlfa {

// Malformed input: bad tensor shapes, rows that do not sum to one,
// out-of-range indices, unusable configuration values.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed: a solver diverged, a matrix that must be
// positive semidefinite was not, an iteration hit its cap without meeting
// its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulator query budget was declared and then exceeded.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rlfa

#endif  // RLFA_ERRORS_HPP_
