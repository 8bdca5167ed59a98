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

#include "fedsim/client.hpp"
#include "fedsim/config.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/model.hpp"
#include "fedsim/partition.hpp"

namespace fedsim {

struct ServerState {
    ModelParams global_model;
    std::uint64_t round = 0;  // completed rounds
    std::uint64_t master_seed = 0;
};

// K = max(1, round(rate * n)) distinct client ids, ascending. Deterministic
// in round_seed alone, so the sample for round t never depends on what other
// rounds drew.
std::vector<std::size_t> sample_clients(std::size_t n, double rate, std::uint64_t round_seed);

// Coordinate-wise weighted mean. By default weights are renormalized over
// the participants (sizes[k] / sum sizes); passing a larger weight_denominator
// gives the literal sizes[k] / |D| weighting, which is not a convex
// combination under partial participation.
ModelParams aggregate(const std::vector<const ModelParams*>& models,
                      const std::vector<std::size_t>& sizes, std::size_t weight_denominator = 0);

// One communication round: sample participants, probe pre-update accuracy,
// overwrite local with global, probe post-update accuracy, run the
// strategy's local update, store the trained model as historical, aggregate.
// Non-participants are untouched.
RoundRecord run_round(ServerState& server, std::vector<ClientState>& clients,
                      const ExperimentConfig& cfg);

struct ExperimentResult {
    std::vector<RoundRecord> records;
    FinalEvaluation final_eval;
};

// Build the dataset and partition, initialize server and clients, run T
// rounds, then evaluate every client's personalized model on its own test
// split.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Setup helpers shared with tests.
Dataset build_dataset(const ExperimentConfig& cfg);
Partition build_partition(const ExperimentConfig& cfg, const Dataset& ds);
std::vector<ClientState> init_clients(const Dataset& ds, const Partition& part,
                                      const ModelParams& global_model,
                                      const ExperimentConfig& cfg);

}  // namespace fedsim
