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
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

// Per-client sample indices into a Dataset. Partitioners fill `train` and
// leave `test` empty; split_train_test moves a stratified share to `test`.
// Indices are disjoint across clients and exhaustive over the dataset.
struct Partition {
    std::vector<std::vector<std::size_t>> train;
    std::vector<std::vector<std::size_t>> test;
    // Clients whose test split came out empty (single-sample clients).
    // Flagged, not fatal.
    std::vector<std::size_t> empty_test_clients;

    std::size_t n_clients() const { return train.size(); }
};

// Practical non-IID split: for each class, a proportion vector over clients
// is drawn from Dir(alpha * 1) and the class samples are apportioned by
// largest-remainder rounding. Clients left empty receive one sample moved
// from the largest client.
Partition dirichlet_partition(const Dataset& ds, std::size_t n_clients, double alpha,
                              std::uint64_t seed);

// Pathological split: every client holds samples from exactly s distinct
// classes; intra-class shard sizes are drawn proportional to Dir(1), so
// shards are imbalanced. Requires s <= num_classes and
// n_clients * s >= num_classes so the partition can stay exhaustive.
Partition pathological_partition(const Dataset& ds, std::size_t n_clients, std::size_t s,
                                 std::uint64_t seed);

// Per-client stratified train/test split. Within each client, each class
// contributes floor(count * test_fraction) samples to test, always keeping
// at least one training sample per class.
Partition split_train_test(const Partition& p, const Dataset& ds, double test_fraction,
                           std::uint64_t seed);

}  // namespace fedsim
