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
#include <vector>

#include <json.hpp>

namespace fedsim {

// Per-participant metrics for one round. pre_update_acc is absent on a
// client's first participation (no stored model to probe yet); the test
// accuracies are absent for clients whose test split is empty.
struct ClientRoundStats {
    std::size_t client_id = 0;
    std::optional<double> pre_update_acc;
    std::optional<double> post_update_acc;
    std::optional<double> post_train_acc;
    double train_loss = 0.0;
    double lambda_t = 0.0;
};

struct RoundRecord {
    std::uint64_t round = 0;  // 1-based
    std::vector<ClientRoundStats> clients;  // participants, ascending id
    std::optional<double> mean_acc;         // mean post-training accuracy
    std::optional<double> std_acc;
    std::optional<double> mean_forgetting;  // mean of (pre - post_update)
};

// Personalized-model evaluation after the last round.
struct FinalEvaluation {
    std::vector<std::optional<double>> per_client_acc;
    std::optional<double> mean_acc;
    std::optional<double> std_acc;
    std::optional<double> global_model_mean_acc;
    std::vector<std::size_t> clients_with_empty_test;
};

// pre - post; positive means the update erased previously learned knowledge.
double forgetting_delta(double pre, double post);

// Population standard deviation of per-client accuracies. Needs >= 2 values.
double fairness_std(const std::vector<double>& accs);

struct AccuracyDifference {
    std::vector<double> deltas;  // a - b, per client
    double win_fraction = 0.0;   // share of clients with delta > 0
};

AccuracyDifference accuracy_difference(const std::vector<double>& accs_a,
                                       const std::vector<double>& accs_b);

// 9-significant-digit decimal rendering shared by both output files.
std::string render9(double v);
// The double obtained by parsing render9(v) back.
double round9(double v);

// rounds.csv: header + one row per (round, client); LF line endings; missing
// optionals render as empty fields.
void write_rounds_csv(const std::vector<RoundRecord>& records, const std::string& path);

// summary.json: config echo, final per-client and aggregate accuracies, and
// the per-round mean accuracy / forgetting curves. Keys keep a stable order.
void write_summary_json(const std::vector<RoundRecord>& records, const FinalEvaluation& final_eval,
                        const nlohmann::ordered_json& config_echo, const std::string& path);

}  // namespace fedsim
