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

#ifndef RLFA_RNG_HPP_
#define RLFA_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace rlfa {

// Counter-based pseudo-random stream. Every draw is a stateless hash of
// (key, counter), where the key mixes a user seed with a stream id. Two
// streams with different ids never share output no matter how many values
// are drawn from either, so components that consume randomness at
// data-dependent rates stay reproducible independently of one another.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(Mix(Mix(0x9e3779b97f4a7c15ULL ^ seed) ^ stream_id)) {}

  // Derives an independent child stream. Children of distinct ids are
  // independent of each other and of the parent.
  RngStream Split(std::uint64_t child_id) const {
    RngStream child;
    child.key_ = Mix(key_ ^ Mix(0xbf58476d1ce4e5b9ULL ^ child_id));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t NextUint64() { return Mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform on [0, 1), 53-bit resolution.
  double Uniform() {
    return static_cast<double>(NextUint64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Uses two uniforms per value and keeps
  // no cached spare, so the draw count stays deterministic.
  double Normal() {
    double u1 = Uniform();
    double u2 = Uniform();
    // Guard the log: Uniform() can return exactly 0.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Index sample from an unnormalized weight vector by inverse CDF.
  // Weights must be nonnegative with positive sum; the caller validates.
  int Categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = Uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    // Fall through on accumulated rounding: return the last positive atom.
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Uniform point on the unit sphere in R^dim (normalized gaussians).
  std::vector<double> UnitSphere(int dim) {
    std::vector<double> x(dim);
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      x[i] = Normal();
      norm2 += x[i] * x[i];
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < dim; ++i) x[i] *= inv;
    return x;
  }

  std::uint64_t draw_count() const { return counter_; }

 private:
  // splitmix64 finalizer.
  static std::uint64_t Mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rlfa

#endif  // RLFA_RNG_HPP_
