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

#include <string>

#include "fedsim/config.hpp"
#include "fedsim/engine.hpp"

namespace fedsim {

// Write rounds.csv and summary.json for one finished run into `dir`.
void write_experiment_outputs(const ExperimentResult& result,
                              const nlohmann::ordered_json& echo, const std::string& dir);

// Execute cfg.repeats runs with seeds master_seed + repeat index, writing
// each repeat under <output_dir>/repeat_<i>/ plus an aggregate.json with the
// mean and standard deviation of the final mean accuracy across repeats.
// Returns a process exit status; on failure the partial outputs created by
// this invocation are removed.
int run_batch(const ExperimentConfig& cfg);

}  // namespace fedsim
