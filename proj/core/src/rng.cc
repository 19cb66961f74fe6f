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

#include "hfdp/rng.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hfdp {

uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(uint64_t seed)
    : seed_(seed), engine_(MixSeed(seed)) {}

RandomStream RandomStream::Fork(uint64_t id) const {
  return RandomStream(MixSeed(seed_ ^ MixSeed(id * 0xd1b54a32d192ed03ULL)));
}

double RandomStream::Gaussian() {
  ++draw_calls_;
  return normal_(engine_);
}

double RandomStream::Laplace() {
  ++draw_calls_;
  // Inverse CDF on u in (-1/2, 1/2).
  double u;
  do {
    u = std::generate_canonical<double, 53>(engine_) - 0.5;
  } while (u <= -0.5 || u >= 0.5);
  return u < 0 ? std::log1p(2 * u) : -std::log1p(-2 * u);
}

double RandomStream::Uniform() {
  return std::generate_canonical<double, 53>(engine_);
}

void RandomStream::FillGaussian(Eigen::Ref<Eigen::VectorXd> out) {
  ++draw_calls_;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
}

std::vector<int64_t> RandomStream::Permutation(int64_t n) {
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), int64_t{0});
  // Explicit Fisher-Yates; std::shuffle's draw pattern is library-defined.
  for (int64_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<int64_t>(engine_() % static_cast<uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace hfdp
