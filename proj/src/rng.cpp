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

#include "fedsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim::rng {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ mix(tag));
    h = mix(h ^ mix(a));
    h = mix(h ^ mix(b));
    return h;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
    return 1.0 - uniform();
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be >= 1");
    const std::uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Rng::gamma(double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("gamma: alpha must be positive");
    if (alpha < 1.0) {
        // Boost to alpha+1 and rescale by u^(1/alpha).
        const double g = gamma(alpha + 1.0);
        const double u = uniform_pos();
        return g * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::log_gamma_draw(double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("log_gamma_draw: alpha must be positive");
    if (alpha < 1.0) {
        const double g = gamma(alpha + 1.0);
        const double u = uniform_pos();
        return std::log(g) + std::log(u) / alpha;
    }
    return std::log(gamma(alpha));
}

std::vector<double> Rng::dirichlet(std::size_t n, double alpha) {
    std::vector<double> logs(n);
    double max_log = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
        logs[i] = log_gamma_draw(alpha);
        if (logs[i] > max_log) max_log = logs[i];
    }
    std::vector<double> q(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = std::exp(logs[i] - max_log);
        total += q[i];
    }
    for (double& v : q) v /= total;
    return q;
}

}  // namespace fedsim::rng
