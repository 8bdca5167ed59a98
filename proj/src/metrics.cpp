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

#include "fedsim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace fedsim {

namespace {

using nlohmann::ordered_json;

ordered_json json_opt(const std::optional<double>& v) {
    if (!v) return nullptr;
    return round9(*v);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

}  // namespace

double forgetting_delta(double pre, double post) {
    return pre - post;
}

double fairness_std(const std::vector<double>& accs) {
    if (accs.size() < 2) {
        throw std::invalid_argument("fairness_std: need at least 2 clients, got " +
                                    std::to_string(accs.size()));
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    var /= static_cast<double>(accs.size());
    return std::sqrt(var);
}

AccuracyDifference accuracy_difference(const std::vector<double>& accs_a,
                                       const std::vector<double>& accs_b) {
    if (accs_a.size() != accs_b.size()) {
        throw std::invalid_argument("accuracy_difference: " + std::to_string(accs_a.size()) +
                                    " vs " + std::to_string(accs_b.size()) + " clients");
    }
    AccuracyDifference diff;
    diff.deltas.resize(accs_a.size());
    std::size_t wins = 0;
    for (std::size_t i = 0; i < accs_a.size(); ++i) {
        diff.deltas[i] = accs_a[i] - accs_b[i];
        if (diff.deltas[i] > 0.0) ++wins;
    }
    diff.win_fraction =
        accs_a.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(accs_a.size());
    return diff;
}

std::string render9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double round9(double v) {
    return std::strtod(render9(v).c_str(), nullptr);
}

void write_rounds_csv(const std::vector<RoundRecord>& records, const std::string& path) {
    std::string out =
        "round,client_id,pre_update_acc,post_update_acc,post_train_acc,train_loss,lambda_t\n";
    auto field = [](const std::optional<double>& v) { return v ? render9(*v) : std::string(); };
    for (const RoundRecord& rec : records) {
        for (const ClientRoundStats& c : rec.clients) {
            out += std::to_string(rec.round) + "," + std::to_string(c.client_id) + "," +
                   field(c.pre_update_acc) + "," + field(c.post_update_acc) + "," +
                   field(c.post_train_acc) + "," + render9(c.train_loss) + "," +
                   render9(c.lambda_t) + "\n";
        }
    }
    write_text_file(path, out);
}

void write_summary_json(const std::vector<RoundRecord>& records, const FinalEvaluation& final_eval,
                        const nlohmann::ordered_json& config_echo, const std::string& path) {
    ordered_json summary;
    summary["config"] = config_echo;
    summary["rounds_completed"] = records.size();

    ordered_json final_obj;
    final_obj["personalized_mean_acc"] = json_opt(final_eval.mean_acc);
    final_obj["personalized_std_acc"] = json_opt(final_eval.std_acc);
    final_obj["global_model_mean_acc"] = json_opt(final_eval.global_model_mean_acc);
    ordered_json per_client = ordered_json::array();
    for (const std::optional<double>& acc : final_eval.per_client_acc) {
        per_client.push_back(json_opt(acc));
    }
    final_obj["per_client_acc"] = per_client;
    final_obj["clients_with_empty_test"] = final_eval.clients_with_empty_test;
    summary["final"] = final_obj;

    ordered_json mean_acc_curve = ordered_json::array();
    ordered_json forgetting_curve = ordered_json::array();
    for (const RoundRecord& rec : records) {
        mean_acc_curve.push_back(json_opt(rec.mean_acc));
        forgetting_curve.push_back(json_opt(rec.mean_forgetting));
    }
    summary["mean_acc_curve"] = mean_acc_curve;
    summary["mean_forgetting_curve"] = forgetting_curve;

    write_text_file(path, summary.dump(2) + "\n");
}

}  // namespace fedsim
