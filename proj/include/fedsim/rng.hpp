/*
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fedsim::rng {

// SplitMix64 finalizer. Used to derive independent sub-seeds from a master
// seed: each (master, tag, a, b) tuple maps to its own stream, so the stream
// a client sees never depends on which other clients participate.
std::uint64_t mix(std::uint64_t x);

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0,
                     std::uint64_t b = 0);

// Stream tags for the seed hierarchy.
inline constexpr std::uint64_t kTagModelInit = 1;
inline constexpr std::uint64_t kTagPartition = 2;
inline constexpr std::uint64_t kTagSplit = 3;
inline constexpr std::uint64_t kTagSampling = 4;
inline constexpr std::uint64_t kTagLocalTraining = 5;
inline constexpr std::uint64_t kTagDataset = 6;

// Deterministic RNG: an mt19937_64 core (bit-exact per the C++ standard) with
// hand-rolled distributions, so outputs do not depend on the standard library
// implementation of <random> distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform();

    // Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos();

    double uniform(double lo, double hi);

    // Uniform integer in [0, n); n must be >= 1. Rejection sampling, no
    // modulo bias.
    std::uint64_t uniform_index(std::uint64_t n);

    // Standard normal via Box-Muller (the spare is cached).
    double normal();

    // Gamma(alpha, 1) via Marsaglia-Tsang. Requires alpha > 0.
    double gamma(double alpha);

    // log of a Gamma(alpha, 1) draw; stays meaningful for tiny alpha where
    // the draw itself would underflow to zero.
    double log_gamma_draw(double alpha);

    // Dirichlet(alpha * 1_n) proportion vector, computed in log space so
    // extreme concentrations (alpha ~ 0.01) do not collapse to 0/0.
    std::vector<double> dirichlet(std::size_t n, double alpha);

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fedsim::rng
