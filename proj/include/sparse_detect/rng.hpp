// Copyright 2026 The sparse-detect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPARSE_DETECT_RNG_HPP_
#define SPARSE_DETECT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace sparse_detect {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// A random stream addressed by (seed, stream path). Two Rng objects built
// from the same seed and path produce identical draws regardless of which
// thread builds them or in which order, so replicate r of an experiment can
// be regenerated on its own.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {})
      : engine_(derive(seed, path)) {}

  Engine& engine() { return engine_; }

  // Uniform on (0, 1]; never returns 0, so log() of it is finite.
  double uniform_open0() { return 1.0 - unit_(engine_); }
  double uniform() { return unit_(engine_); }
  double normal() { return normal_(engine_); }
  double exponential() { return -std::log(uniform_open0()); }

 private:
  static std::uint64_t derive(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = splitmix64(seed);
    for (std::uint64_t id : path) key = splitmix64(key ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    return key;
  }

  Engine engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sparse_detect

#endif  // SPARSE_DETECT_RNG_HPP_
