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

#include "fedsim/matrix.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// One dense layer: weight is in x out, bias is 1 x out.
struct LayerParams {
    DenseMatrix weight;
    DenseMatrix bias;
};

// An MLP as an ordered list of layers. ReLU between hidden layers, raw
// logits from the last layer.
struct ModelParams {
    std::vector<LayerParams> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weight.rows; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().weight.cols; }

    bool same_shape(const ModelParams& other) const;
};

// Throws ShapeError if adjacent layers are not dimension-compatible or a
// bias does not match its weight.
void check_model_consistent(const ModelParams& model);

std::size_t param_count(const ModelParams& model);

// Concatenation of all parameters (layer order, weight then bias, row-major).
std::vector<double> flatten(const ModelParams& model);

// Inverse of flatten for a vector shaped like `shape`.
ModelParams unflatten(const std::vector<double>& values, const ModelParams& shape);

ModelParams zeros_like(const ModelParams& model);

bool model_all_finite(const ModelParams& model);

// Xavier-uniform MLP over the given layer widths, e.g. {784, 64, 10}.
ModelParams init_mlp(const std::vector<std::size_t>& dims, rng::Rng& rng);

// SGD with classical momentum and weight decay applied to the gradient
// before the momentum update.
struct SgdState {
    double lr = 0.01;
    double momentum = 0.0;
    double weight_decay = 0.0;
    ModelParams buffers;  // momentum buffers, same shapes as the model

    void reset(const ModelParams& model) { buffers = zeros_like(model); }
};

}  // namespace fedsim
