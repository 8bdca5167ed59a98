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
#include <string>

#include "fedsim/client.hpp"
#include "fedsim/nn.hpp"

namespace fedsim {

enum class Strategy { kFedAvg, kFedProx, kPFedSD, kFedCKD };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

// Exponential decay of the distillation weight: lambda_t = lambda0 * gamma^t
// with t counting completed global rounds. When disabled, lambda0 for all t.
struct AnnealSchedule {
    double lambda0 = 0.5;
    double gamma = 0.99;
    bool enabled = true;
};

// gamma^t is evaluated by repeated squaring.
double anneal_lambda(const AnnealSchedule& sched, std::uint64_t round_t);

struct LocalUpdateOptions {
    int epochs = 5;
    int batch_size = 64;
    double tau = 3.0;
    DistillOptions distill;
};

// Shared mini-batch loop behind all four strategies: E epochs of SGD on the
// combined loss, teachers frozen, an optional proximal pull toward prox_ref.
// Batch order reshuffles every epoch from `seed`; the last short batch is
// kept. Mutates client.local_model; returns the mean per-batch loss.
double run_local_epochs(ClientState& client, const std::vector<const ModelParams*>& teachers,
                        double lambda, double prox_mu, const ModelParams* prox_ref,
                        const LocalUpdateOptions& opts, std::uint64_t seed);

// E epochs of mini-batch SGD on the CE loss only.
double local_update_fedavg(ClientState& client, const LocalUpdateOptions& opts,
                           std::uint64_t seed);

// CE plus the proximal term (mu/2) ||w - w_g||^2.
double local_update_fedprox(ClientState& client, const ModelParams& global_ref, double mu,
                            const LocalUpdateOptions& opts, std::uint64_t seed);

// CE + lambda * KL against the historical model. Falls back to plain CE on
// first participation, when no historical model exists yet.
double local_update_pfedsd(ClientState& client, double lambda, const LocalUpdateOptions& opts,
                           std::uint64_t seed);

// Dual-teacher loss: CE + lambda_t * KL(global) + lambda_t * KL(historical),
// the historical term dropped on first participation. lambda_t comes from
// anneal_lambda. The teacher toggles exist for ablations; with the global
// teacher off this is exactly the pFedSD update.
double local_update_fedckd(ClientState& client, const ModelParams& global_ref, double lambda_t,
                           bool use_global_teacher, bool use_historical_teacher,
                           const LocalUpdateOptions& opts, std::uint64_t seed);

}  // namespace fedsim
