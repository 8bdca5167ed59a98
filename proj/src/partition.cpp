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

#include "fedsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& ds) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    }
    return by_class;
}

// Convert proportions into integer counts summing to total. Floor first,
// then hand the remainder to the largest fractional parts (ties to the
// lower index).
std::vector<std::size_t> largest_remainder_counts(const std::vector<double>& proportions,
                                                  std::size_t total) {
    const std::size_t n = proportions.size();
    std::vector<std::size_t> counts(n);
    std::vector<std::pair<double, std::size_t>> fractions(n);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double share = proportions[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(share));
        fractions[i] = {share - std::floor(share), i};
        assigned += counts[i];
    }
    std::sort(fractions.begin(), fractions.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) {
        counts[fractions[r % n].second] += 1;
    }
    return counts;
}

// Move one sample from the largest client (ties to the lowest id) into each
// empty client until none remain.
void repair_empty_clients(std::vector<std::vector<std::size_t>>& clients) {
    for (;;) {
        std::size_t empty = clients.size();
        for (std::size_t k = 0; k < clients.size(); ++k) {
            if (clients[k].empty()) {
                empty = k;
                break;
            }
        }
        if (empty == clients.size()) return;
        std::size_t largest = 0;
        for (std::size_t k = 1; k < clients.size(); ++k) {
            if (clients[k].size() > clients[largest].size()) largest = k;
        }
        if (clients[largest].size() <= 1) {
            throw std::invalid_argument("partition: not enough samples to fill every client");
        }
        clients[empty].push_back(clients[largest].back());
        clients[largest].pop_back();
    }
}

}  // namespace

Partition dirichlet_partition(const Dataset& ds, std::size_t n_clients, double alpha,
                              std::uint64_t seed) {
    if (n_clients < 2) {
        throw std::invalid_argument("dirichlet_partition: n_clients must be >= 2");
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("dirichlet_partition: alpha must be positive");
    }
    if (ds.size() < n_clients) {
        throw std::invalid_argument("dirichlet_partition: dataset of " +
                                    std::to_string(ds.size()) + " samples cannot fill " +
                                    std::to_string(n_clients) + " clients");
    }
    rng::Rng rng(rng::derive(seed, rng::kTagPartition));
    std::vector<std::vector<std::size_t>> by_class = indices_by_class(ds);
    std::vector<std::vector<std::size_t>> clients(n_clients);
    for (std::vector<std::size_t>& group : by_class) {
        if (group.empty()) continue;
        rng.shuffle(group);
        const std::vector<double> q = rng.dirichlet(n_clients, alpha);
        const std::vector<std::size_t> counts = largest_remainder_counts(q, group.size());
        std::size_t pos = 0;
        for (std::size_t k = 0; k < n_clients; ++k) {
            for (std::size_t c = 0; c < counts[k]; ++c) {
                clients[k].push_back(group[pos++]);
            }
        }
    }
    repair_empty_clients(clients);

    Partition p;
    p.train = std::move(clients);
    p.test.assign(n_clients, {});
    return p;
}

Partition pathological_partition(const Dataset& ds, std::size_t n_clients, std::size_t s,
                                 std::uint64_t seed) {
    const std::size_t num_classes = static_cast<std::size_t>(ds.num_classes);
    if (n_clients < 1 || s < 1) {
        throw std::invalid_argument("pathological_partition: counts must be >= 1");
    }
    if (s > num_classes) {
        throw std::invalid_argument("pathological_partition: s=" + std::to_string(s) +
                                    " exceeds num_classes=" + std::to_string(num_classes));
    }
    if (n_clients * s < num_classes) {
        throw std::invalid_argument(
            "pathological_partition: n_clients*s=" + std::to_string(n_clients * s) +
            " shards cannot cover " + std::to_string(num_classes) + " classes");
    }
    rng::Rng rng(rng::derive(seed, rng::kTagPartition));

    // Client i takes slots i*s .. i*s+s-1; slot p maps to permuted class
    // p mod C. Slots enumerate 0..n*s-1 once, so class p is requested
    // floor(n*s/C) or ceil(n*s/C) times and every class is covered.
    std::vector<std::size_t> class_perm(num_classes);
    std::iota(class_perm.begin(), class_perm.end(), 0);
    rng.shuffle(class_perm);

    const std::size_t total_slots = n_clients * s;
    std::vector<std::size_t> shards_needed(num_classes, 0);
    for (std::size_t slot = 0; slot < total_slots; ++slot) {
        shards_needed[class_perm[slot % num_classes]] += 1;
    }

    // Cut each class into its requested number of shards, sizes drawn
    // proportional to Dir(1); every shard must end up non-empty.
    std::vector<std::vector<std::size_t>> by_class = indices_by_class(ds);
    std::vector<std::vector<std::vector<std::size_t>>> shards(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::vector<std::size_t>& group = by_class[c];
        const std::size_t want = shards_needed[c];
        if (group.size() < want) {
            throw std::invalid_argument("pathological_partition: class " + std::to_string(c) +
                                        " has " + std::to_string(group.size()) +
                                        " samples but needs " + std::to_string(want) +
                                        " shards");
        }
        rng.shuffle(group);
        const std::vector<double> q = rng.dirichlet(want, 1.0);
        std::vector<std::size_t> counts = largest_remainder_counts(q, group.size());
        // Zero-size shards would break the exactly-s-classes guarantee;
        // steal from the largest shard of the same class.
        for (;;) {
            std::size_t empty = want;
            std::size_t largest = 0;
            for (std::size_t i = 0; i < want; ++i) {
                if (counts[i] == 0 && empty == want) empty = i;
                if (counts[i] > counts[largest]) largest = i;
            }
            if (empty == want) break;
            counts[empty] = 1;
            counts[largest] -= 1;
        }
        std::size_t pos = 0;
        shards[c].resize(want);
        for (std::size_t i = 0; i < want; ++i) {
            shards[c][i].assign(group.begin() + static_cast<std::ptrdiff_t>(pos),
                                group.begin() + static_cast<std::ptrdiff_t>(pos + counts[i]));
            pos += counts[i];
        }
    }

    Partition p;
    p.train.resize(n_clients);
    p.test.assign(n_clients, {});
    std::vector<std::size_t> next_shard(num_classes, 0);
    for (std::size_t k = 0; k < n_clients; ++k) {
        for (std::size_t j = 0; j < s; ++j) {
            const std::size_t cls = class_perm[(k * s + j) % num_classes];
            const std::vector<std::size_t>& shard = shards[cls][next_shard[cls]++];
            p.train[k].insert(p.train[k].end(), shard.begin(), shard.end());
        }
    }
    return p;
}

Partition split_train_test(const Partition& p, const Dataset& ds, double test_fraction,
                           std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("split_train_test: test_fraction must be in (0,1)");
    }
    Partition out;
    out.train.resize(p.n_clients());
    out.test.resize(p.n_clients());
    for (std::size_t k = 0; k < p.n_clients(); ++k) {
        // Client indices grouped by class, stratified independently.
        std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(ds.num_classes));
        for (std::size_t idx : p.train[k]) {
            groups[static_cast<std::size_t>(ds.labels[idx])].push_back(idx);
        }
        for (std::size_t c = 0; c < groups.size(); ++c) {
            std::vector<std::size_t>& group = groups[c];
            if (group.empty()) continue;
            rng::Rng rng(rng::derive(seed, rng::kTagSplit, k, c));
            rng.shuffle(group);
            std::size_t test_count = static_cast<std::size_t>(
                std::floor(static_cast<double>(group.size()) * test_fraction));
            if (test_count >= group.size()) test_count = group.size() - 1;
            const std::size_t train_count = group.size() - test_count;
            out.train[k].insert(out.train[k].end(), group.begin(),
                                group.begin() + static_cast<std::ptrdiff_t>(train_count));
            out.test[k].insert(out.test[k].end(),
                               group.begin() + static_cast<std::ptrdiff_t>(train_count),
                               group.end());
        }
        if (out.test[k].empty()) {
            out.empty_test_clients.push_back(k);
        }
    }
    return out;
}

}  // namespace fedsim
