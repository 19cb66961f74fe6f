// Copyright 2026 The hfdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HFDP_RNG_H_
#define HFDP_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace hfdp {

// Well-known sub-stream identifiers. Every consumer of randomness in a run
// forks its own stream from the root seed, so the draws of one consumer never
// shift the draws of another.
enum class StreamId : uint64_t {
  kGradientNoise = 1,
  kLossNoise = 2,
  kBatchOrder = 3,
  kInit = 4,
  kData = 5,
  kSplit = 6,
};

// Seeded, splittable random source built on std::mt19937_64.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed);

  // Returns an independent stream whose seed depends only on this stream's
  // seed and `id`, never on how many values have been drawn so far.
  RandomStream Fork(uint64_t id) const;
  RandomStream Fork(StreamId id) const {
    return Fork(static_cast<uint64_t>(id));
  }

  double Gaussian();
  // Standard Laplace (location 0, scale 1).
  double Laplace();
  double Uniform();  // in [0, 1)
  uint64_t NextU64() { return engine_(); }

  // Fills `out` with i.i.d. standard normals. Counts as one draw call.
  void FillGaussian(Eigen::Ref<Eigen::VectorXd> out);

  // Uniformly random permutation of 0..n-1.
  std::vector<int64_t> Permutation(int64_t n);

  // Number of Gaussian/Laplace draw calls made on this stream.
  int64_t draw_calls() const { return draw_calls_; }
  uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  int64_t draw_calls_ = 0;
};

// SplitMix64 finalizer; used to derive stream seeds.
uint64_t MixSeed(uint64_t x);

}  // namespace hfdp

#endif  // HFDP_RNG_H_
