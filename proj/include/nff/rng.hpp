// SPDX-License-Identifier: Apache-2.0
//
// nearfield-forge: low-altitude near-field XL-MIMO dataset generator
// Copyright (C) 2026 nearfield-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nff {

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Derives a child seed from a parent seed and a sequence of integer tags.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags);

/// Thin wrapper around std::mt19937_64 with platform-independent variate generation.
/// (The std:: distributions are implementation-defined; these are not.)
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform01();                          // [0, 1)
    double uniform(double lo, double hi);        // [lo, hi)
    std::size_t uniform_index(std::size_t n);    // [0, n)
    int uniform_int(int lo, int hi);             // [lo, hi]
    bool bernoulli(double p) { return uniform01() < p; }
    double normal();                             // N(0, 1), Box-Muller
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace nff
