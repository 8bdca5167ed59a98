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

#include <optional>
#include <vector>

#include "fedsim/matrix.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

// Everything one client owns. historical_model is present exactly after the
// client has completed at least one local training pass; it is the
// personalized model the client is evaluated with.
struct ClientState {
    std::size_t id = 0;
    ModelParams local_model;
    std::optional<ModelParams> historical_model;
    double lambda_current = 0.0;
    SgdState optimizer;

    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;

    // Materialized copies of the client's data slices, built once at setup.
    DenseMatrix train_features;
    std::vector<int> train_labels;
    DenseMatrix test_features;
    std::vector<int> test_labels;

    std::size_t train_size() const { return train_features.rows; }
    bool has_test_data() const { return test_features.rows > 0; }

    // The model this client is evaluated with: the stored historical model
    // when present, otherwise the current local model.
    const ModelParams& personalized_model() const {
        return historical_model ? *historical_model : local_model;
    }
};

}  // namespace fedsim
