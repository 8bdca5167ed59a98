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

#include "fedsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "fedsim/idx.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/strategies.hpp"

namespace fedsim {

namespace {

// Runs fn(0..count-1) on up to `threads` workers. Work items must be
// independent; the first exception wins and is rethrown after the join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double round_lambda(const ExperimentConfig& cfg, std::uint64_t completed_rounds) {
    const Strategy strategy = parse_strategy(cfg.strategy);
    switch (strategy) {
        case Strategy::kFedCKD:
            return anneal_lambda({cfg.lambda0, cfg.gamma, cfg.annealing}, completed_rounds);
        case Strategy::kPFedSD:
            return cfg.lambda0;
        case Strategy::kFedAvg:
        case Strategy::kFedProx:
            return 0.0;
    }
    return 0.0;
}

LocalUpdateOptions local_options(const ExperimentConfig& cfg) {
    LocalUpdateOptions opts;
    opts.epochs = cfg.epochs;
    opts.batch_size = cfg.batch_size;
    opts.tau = cfg.tau;
    opts.distill.direction = cfg.kl_direction == "student_teacher"
                                 ? KlDirection::kStudentTeacher
                                 : KlDirection::kTeacherStudent;
    opts.distill.tau_squared = cfg.tau_squared;
    return opts;
}

std::optional<double> safe_accuracy(const ModelParams& model, const ClientState& client) {
    if (!client.has_test_data()) return std::nullopt;
    return accuracy(model, client.test_features, client.test_labels);
}

void fill_round_aggregates(RoundRecord& rec) {
    std::vector<double> accs;
    std::vector<double> deltas;
    for (const ClientRoundStats& c : rec.clients) {
        if (c.post_train_acc) accs.push_back(*c.post_train_acc);
        if (c.pre_update_acc && c.post_update_acc) {
            deltas.push_back(forgetting_delta(*c.pre_update_acc, *c.post_update_acc));
        }
    }
    if (!accs.empty()) {
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        rec.mean_acc = mean;
        if (accs.size() >= 2) rec.std_acc = fairness_std(accs);
    }
    if (!deltas.empty()) {
        double mean = 0.0;
        for (double d : deltas) mean += d;
        rec.mean_forgetting = mean / static_cast<double>(deltas.size());
    }
}

}  // namespace

std::vector<std::size_t> sample_clients(std::size_t n, double rate, std::uint64_t round_seed) {
    if (n == 0) throw std::invalid_argument("sample_clients: n must be >= 1");
    if (!(rate > 0.0 && rate <= 1.0)) {
        throw std::invalid_argument("sample_clients: rate must be in (0,1]");
    }
    std::size_t k = static_cast<std::size_t>(
        std::llround(rate * static_cast<double>(n)));
    k = std::max<std::size_t>(1, std::min(k, n));

    // Partial Fisher-Yates: the first k entries are a uniform sample
    // without replacement.
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    rng::Rng rng(round_seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ModelParams aggregate(const std::vector<const ModelParams*>& models,
                      const std::vector<std::size_t>& sizes, std::size_t weight_denominator) {
    if (models.empty() || models.size() != sizes.size()) {
        throw std::invalid_argument("aggregate: need matching non-empty models and sizes");
    }
    std::size_t total = weight_denominator;
    if (total == 0) {
        total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    }
    if (total == 0) throw std::invalid_argument("aggregate: total size is zero");

    ModelParams out = zeros_like(*models[0]);
    for (std::size_t m = 0; m < models.size(); ++m) {
        if (!models[m]->same_shape(out)) {
            throw ShapeError("aggregate: model " + std::to_string(m) + " shape differs");
        }
        const double w = static_cast<double>(sizes[m]) / static_cast<double>(total);
        for (std::size_t l = 0; l < out.layers.size(); ++l) {
            axpy_inplace(out.layers[l].weight, w, models[m]->layers[l].weight);
            axpy_inplace(out.layers[l].bias, w, models[m]->layers[l].bias);
        }
    }
    return out;
}

RoundRecord run_round(ServerState& server, std::vector<ClientState>& clients,
                      const ExperimentConfig& cfg) {
    const std::uint64_t t = server.round;  // completed rounds before this one
    const std::uint64_t sampling_seed = rng::derive(server.master_seed, rng::kTagSampling, t);
    const std::vector<std::size_t> participants =
        sample_clients(clients.size(), cfg.participation_rate, sampling_seed);

    const Strategy strategy = parse_strategy(cfg.strategy);
    const double lambda_t = round_lambda(cfg, t);
    const LocalUpdateOptions opts = local_options(cfg);

    RoundRecord rec;
    rec.round = t + 1;
    rec.clients.resize(participants.size());

    parallel_for(participants.size(), cfg.threads, [&](std::size_t pi) {
        ClientState& client = clients[participants[pi]];
        ClientRoundStats stats;
        stats.client_id = client.id;
        stats.lambda_t = lambda_t;

        // Forgetting probe: personalized accuracy before and right after the
        // local model is overwritten by the global one. The pre-update probe
        // needs a previously trained model.
        if (client.historical_model) {
            stats.pre_update_acc = safe_accuracy(client.personalized_model(), client);
        }
        client.local_model = server.global_model;
        stats.post_update_acc = safe_accuracy(client.local_model, client);

        client.lambda_current = lambda_t;
        const std::uint64_t update_seed =
            rng::derive(server.master_seed, rng::kTagLocalTraining, t, client.id);
        switch (strategy) {
            case Strategy::kFedAvg:
                stats.train_loss = local_update_fedavg(client, opts, update_seed);
                break;
            case Strategy::kFedProx:
                stats.train_loss = local_update_fedprox(client, server.global_model, cfg.prox_mu,
                                                        opts, update_seed);
                break;
            case Strategy::kPFedSD:
                stats.train_loss = local_update_pfedsd(client, lambda_t, opts, update_seed);
                break;
            case Strategy::kFedCKD:
                stats.train_loss = local_update_fedckd(client, server.global_model, lambda_t,
                                                       cfg.use_global_teacher,
                                                       cfg.use_historical_teacher, opts,
                                                       update_seed);
                break;
        }
        stats.post_train_acc = safe_accuracy(client.local_model, client);
        client.historical_model = client.local_model;
        rec.clients[pi] = std::move(stats);
    });

    // Aggregate in ascending client order so the reduction is bitwise
    // reproducible regardless of the thread count.
    std::vector<const ModelParams*> models;
    std::vector<std::size_t> sizes;
    models.reserve(participants.size());
    sizes.reserve(participants.size());
    for (std::size_t id : participants) {
        models.push_back(&clients[id].local_model);
        sizes.push_back(clients[id].train_size());
    }
    std::size_t denominator = 0;
    if (cfg.literal_weights) {
        for (const ClientState& c : clients) denominator += c.train_size();
    }
    server.global_model = aggregate(models, sizes, denominator);
    server.round += 1;

    fill_round_aggregates(rec);
    return rec;
}

Dataset build_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset == "idx") {
        return load_idx(cfg.idx_images, cfg.idx_labels);
    }
    return synth_blobs(cfg.synth_classes, cfg.synth_per_class, cfg.synth_dim, cfg.synth_spread,
                       cfg.master_seed);
}

Partition build_partition(const ExperimentConfig& cfg, const Dataset& ds) {
    Partition p;
    if (cfg.partition == "pathological") {
        p = pathological_partition(ds, static_cast<std::size_t>(cfg.n_clients),
                                   static_cast<std::size_t>(cfg.shards_per_client),
                                   cfg.master_seed);
    } else {
        p = dirichlet_partition(ds, static_cast<std::size_t>(cfg.n_clients), cfg.alpha,
                                cfg.master_seed);
    }
    return split_train_test(p, ds, cfg.test_fraction, cfg.master_seed);
}

std::vector<ClientState> init_clients(const Dataset& ds, const Partition& part,
                                      const ModelParams& global_model,
                                      const ExperimentConfig& cfg) {
    std::vector<ClientState> clients(part.n_clients());
    for (std::size_t k = 0; k < part.n_clients(); ++k) {
        ClientState& c = clients[k];
        c.id = k;
        c.local_model = global_model;
        c.train_indices = part.train[k];
        c.test_indices = part.test[k];
        gather(ds, c.train_indices, c.train_features, c.train_labels);
        gather(ds, c.test_indices, c.test_features, c.test_labels);
        c.optimizer.lr = cfg.lr;
        c.optimizer.momentum = cfg.momentum;
        c.optimizer.weight_decay = cfg.weight_decay;
        c.optimizer.reset(c.local_model);
    }
    return clients;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const Dataset ds = build_dataset(cfg);
    const Partition part = build_partition(cfg, ds);

    std::vector<std::size_t> dims;
    dims.push_back(ds.dim());
    if (cfg.hidden_units > 0) dims.push_back(static_cast<std::size_t>(cfg.hidden_units));
    dims.push_back(static_cast<std::size_t>(ds.num_classes));
    rng::Rng init_rng(rng::derive(cfg.master_seed, rng::kTagModelInit));

    ServerState server;
    server.global_model = init_mlp(dims, init_rng);
    server.master_seed = cfg.master_seed;

    std::vector<ClientState> clients = init_clients(ds, part, server.global_model, cfg);

    ExperimentResult result;
    result.records.reserve(static_cast<std::size_t>(cfg.rounds));
    for (int t = 0; t < cfg.rounds; ++t) {
        result.records.push_back(run_round(server, clients, cfg));
    }

    FinalEvaluation& final_eval = result.final_eval;
    final_eval.per_client_acc.resize(clients.size());
    final_eval.clients_with_empty_test = part.empty_test_clients;
    std::vector<double> personalized;
    std::vector<double> global_accs;
    for (const ClientState& c : clients) {
        final_eval.per_client_acc[c.id] = safe_accuracy(c.personalized_model(), c);
        if (final_eval.per_client_acc[c.id]) {
            personalized.push_back(*final_eval.per_client_acc[c.id]);
        }
        if (const std::optional<double> g = safe_accuracy(server.global_model, c)) {
            global_accs.push_back(*g);
        }
    }
    if (!personalized.empty()) {
        double mean = 0.0;
        for (double a : personalized) mean += a;
        final_eval.mean_acc = mean / static_cast<double>(personalized.size());
        if (personalized.size() >= 2) final_eval.std_acc = fairness_std(personalized);
    }
    if (!global_accs.empty()) {
        double mean = 0.0;
        for (double a : global_accs) mean += a;
        final_eval.global_model_mean_acc = mean / static_cast<double>(global_accs.size());
    }
    return result;
}

}  // namespace fedsim
