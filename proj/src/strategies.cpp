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

#include "fedsim/strategies.hpp"

#include <numeric>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

Strategy parse_strategy(const std::string& name) {
    if (name == "fedavg") return Strategy::kFedAvg;
    if (name == "fedprox") return Strategy::kFedProx;
    if (name == "pfedsd") return Strategy::kPFedSD;
    if (name == "fedckd") return Strategy::kFedCKD;
    throw std::invalid_argument("unknown strategy \"" + name +
                                "\" (want fedavg|fedprox|pfedsd|fedckd)");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::kFedAvg: return "fedavg";
        case Strategy::kFedProx: return "fedprox";
        case Strategy::kPFedSD: return "pfedsd";
        case Strategy::kFedCKD: return "fedckd";
    }
    return "?";
}

namespace {

double pow_by_squaring(double base, std::uint64_t exp) {
    double result = 1.0;
    double b = base;
    while (exp != 0) {
        if (exp & 1ULL) result *= b;
        b *= b;
        exp >>= 1;
    }
    return result;
}

}  // namespace

double anneal_lambda(const AnnealSchedule& sched, std::uint64_t round_t) {
    if (!sched.enabled) return sched.lambda0;
    return sched.lambda0 * pow_by_squaring(sched.gamma, round_t);
}

double run_local_epochs(ClientState& client, const std::vector<const ModelParams*>& teachers,
                        double lambda, double prox_mu, const ModelParams* prox_ref,
                        const LocalUpdateOptions& opts, std::uint64_t seed) {
    if (client.train_size() == 0) {
        throw std::invalid_argument("local update: client " + std::to_string(client.id) +
                                    " has no training data");
    }
    if (opts.batch_size < 1) {
        throw std::invalid_argument("local update: batch_size must be >= 1");
    }
    const std::size_t n = client.train_size();
    const std::size_t batch_size = static_cast<std::size_t>(opts.batch_size);

    // Fresh momentum for this round's local run.
    client.optimizer.reset(client.local_model);

    rng::Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            DenseMatrix batch(count, client.train_features.cols);
            std::vector<int> labels(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t src = order[start + i];
                for (std::size_t j = 0; j < batch.cols; ++j) {
                    batch(i, j) = client.train_features(src, j);
                }
                labels[i] = client.train_labels[src];
            }
            LossGrads lg = combined_loss_backward(client.local_model, batch, labels, teachers,
                                                  lambda, opts.tau, opts.distill);
            if (prox_mu != 0.0 && prox_ref != nullptr) {
                double sq_dist = 0.0;
                for (std::size_t l = 0; l < client.local_model.layers.size(); ++l) {
                    auto accumulate = [&](DenseMatrix& g, const DenseMatrix& w,
                                          const DenseMatrix& ref) {
                        for (std::size_t i = 0; i < g.data.size(); ++i) {
                            const double diff = w.data[i] - ref.data[i];
                            g.data[i] += prox_mu * diff;
                            sq_dist += diff * diff;
                        }
                    };
                    accumulate(lg.grads.layers[l].weight, client.local_model.layers[l].weight,
                               prox_ref->layers[l].weight);
                    accumulate(lg.grads.layers[l].bias, client.local_model.layers[l].bias,
                               prox_ref->layers[l].bias);
                }
                lg.loss += 0.5 * prox_mu * sq_dist;
            }
            sgd_step(client.local_model, lg.grads, client.optimizer);
            loss_sum += lg.loss;
            ++batches;
        }
    }
    if (!model_all_finite(client.local_model)) {
        throw std::runtime_error("local update: client " + std::to_string(client.id) +
                                 " produced non-finite parameters");
    }
    return batches == 0 ? 0.0 : loss_sum / static_cast<double>(batches);
}

double local_update_fedavg(ClientState& client, const LocalUpdateOptions& opts,
                           std::uint64_t seed) {
    return run_local_epochs(client, {}, 0.0, 0.0, nullptr, opts, seed);
}

double local_update_fedprox(ClientState& client, const ModelParams& global_ref, double mu,
                            const LocalUpdateOptions& opts, std::uint64_t seed) {
    if (mu < 0.0) throw std::invalid_argument("fedprox: mu must be >= 0");
    return run_local_epochs(client, {}, 0.0, mu, &global_ref, opts, seed);
}

double local_update_pfedsd(ClientState& client, double lambda, const LocalUpdateOptions& opts,
                           std::uint64_t seed) {
    std::vector<const ModelParams*> teachers;
    if (client.historical_model) {
        teachers.push_back(&*client.historical_model);
    }
    return run_local_epochs(client, teachers, lambda, 0.0, nullptr, opts, seed);
}

double local_update_fedckd(ClientState& client, const ModelParams& global_ref, double lambda_t,
                           bool use_global_teacher, bool use_historical_teacher,
                           const LocalUpdateOptions& opts, std::uint64_t seed) {
    std::vector<const ModelParams*> teachers;
    if (use_global_teacher) {
        teachers.push_back(&global_ref);
    }
    if (use_historical_teacher && client.historical_model) {
        teachers.push_back(&*client.historical_model);
    }
    return run_local_epochs(client, teachers, lambda_t, 0.0, nullptr, opts, seed);
}

}  // namespace fedsim
