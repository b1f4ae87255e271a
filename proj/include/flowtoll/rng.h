// Copyright 2026 The FlowToll Authors
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

#ifndef FLOWTOLL_RNG_H_
#define FLOWTOLL_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace flowtoll {

// Stream tags used to derive independent substreams from one master seed.
enum class StreamTag : std::uint64_t {
  kDualPlay = 1,
  kRounding = 2,
  kCongestion = 3,
  kTrial = 4,
  kGenerator = 5,
  kMediator = 6,
};

// Mixes (master, tag, index) into a fresh 64-bit seed with splitmix64.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t tag,
                         std::uint64_t index);

// Seeded 64-bit generator. Identical seeds give identical sequences on every
// platform because all conversions below are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform01();

  // Uniform on (0, 1]; never returns zero, so it is safe under log.
  double UniformOpenZero();

  // Uniform integer in [0, bound). bound must be positive.
  std::size_t UniformIndex(std::size_t bound);

  // Independent generator for (tag, index), derived from this seed only.
  Rng Substream(StreamTag tag, std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace flowtoll

#endif  // FLOWTOLL_RNG_H_
