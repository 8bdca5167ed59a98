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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fedsim {

// Flat, fully-validated experiment description. Defaults follow the paper's
// training setup: E=5, B=64, lr=0.01, momentum=0.90, weight_decay=1e-5,
// lambda0=0.50, tau=3, gamma=0.99.
struct ExperimentConfig {
    // dataset
    std::string dataset = "synth";  // synth | idx
    int synth_classes = 10;
    int synth_per_class = 120;
    int synth_dim = 16;
    double synth_spread = 1.0;
    std::string idx_images;
    std::string idx_labels;

    // partition
    std::string partition = "dirichlet";  // dirichlet | pathological
    double alpha = 0.1;
    int shards_per_client = 2;  // s, pathological setting
    double test_fraction = 0.2;

    // federation
    int n_clients = 20;
    double participation_rate = 1.0;
    int rounds = 50;

    // local training
    int epochs = 5;
    int batch_size = 64;
    double lr = 0.01;
    double momentum = 0.90;
    double weight_decay = 1e-5;

    // strategy
    std::string strategy = "fedckd";  // fedavg | fedprox | pfedsd | fedckd
    double prox_mu = 0.01;
    double lambda0 = 0.50;
    double tau = 3.0;
    double gamma = 0.99;
    bool annealing = true;
    bool use_global_teacher = true;
    bool use_historical_teacher = true;
    std::string kl_direction = "teacher_student";  // or student_teacher
    bool tau_squared = false;
    bool literal_weights = false;

    // model
    int hidden_units = 64;  // 0 = linear model

    // run control
    std::uint64_t master_seed = 0;
    bool has_master_seed = false;
    int repeats = 1;
    int threads = 1;
    std::string output_dir;  // empty = SIM_OUTPUT_DIR env, then "sim_out"

    std::string resolved_output_dir() const;
};

// Apply one key from a flat JSON object. Unknown keys and type mismatches
// throw, naming the key.
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const nlohmann::json& value);

// Range checks; throws naming the violated key.
void validate_config(const ExperimentConfig& cfg);

// Full resolution order: defaults, then preset, then file, then flag
// overrides, then validation.
ExperimentConfig load_config(const std::optional<std::string>& preset_name,
                             const std::optional<std::string>& file_path,
                             const std::vector<std::pair<std::string, std::string>>& overrides);

// Spec form: a flat-JSON file plus `--key value` override tokens.
ExperimentConfig parse_config(const std::string& file_path,
                              const std::vector<std::string>& override_tokens);

// Echo with every key present, in a stable order; feeding the echo back as a
// config file reproduces the run.
nlohmann::ordered_json config_echo(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
nlohmann::ordered_json preset_values(const std::string& name);

}  // namespace fedsim
