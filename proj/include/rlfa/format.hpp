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

#ifndef RLFA_FORMAT_HPP_
#define RLFA_FORMAT_HPP_

#include <cstdio>
#include <cstdlib>
#include <string>

namespace rlfa {

// Shortest round-trippable decimal form of a double. All CSV artifacts go
// through this so reruns diff clean.
inline std::string FormatDouble(double v) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace rlfa

#endif  // RLFA_FORMAT_HPP_
