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

#include "fedsim/model.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim {

bool ModelParams::same_shape(const ModelParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (!layers[l].weight.same_shape(other.layers[l].weight)) return false;
        if (!layers[l].bias.same_shape(other.layers[l].bias)) return false;
    }
    return true;
}

void check_model_consistent(const ModelParams& model) {
    if (model.layers.empty()) {
        throw ShapeError("model: no layers");
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const LayerParams& layer = model.layers[l];
        if (layer.bias.rows != 1 || layer.bias.cols != layer.weight.cols) {
            throw ShapeError("model: layer " + std::to_string(l) + " bias " +
                             shape_string(layer.bias) + " vs weight " +
                             shape_string(layer.weight));
        }
        if (l > 0 && model.layers[l - 1].weight.cols != layer.weight.rows) {
            throw ShapeError("model: layer " + std::to_string(l - 1) + " out " +
                             std::to_string(model.layers[l - 1].weight.cols) + " vs layer " +
                             std::to_string(l) + " in " + std::to_string(layer.weight.rows));
        }
    }
}

std::size_t param_count(const ModelParams& model) {
    std::size_t n = 0;
    for (const LayerParams& layer : model.layers) {
        n += layer.weight.size() + layer.bias.size();
    }
    return n;
}

std::vector<double> flatten(const ModelParams& model) {
    std::vector<double> out;
    out.reserve(param_count(model));
    for (const LayerParams& layer : model.layers) {
        out.insert(out.end(), layer.weight.data.begin(), layer.weight.data.end());
        out.insert(out.end(), layer.bias.data.begin(), layer.bias.data.end());
    }
    return out;
}

ModelParams unflatten(const std::vector<double>& values, const ModelParams& shape) {
    if (values.size() != param_count(shape)) {
        throw ShapeError("unflatten: " + std::to_string(values.size()) + " values vs " +
                         std::to_string(param_count(shape)) + " parameters");
    }
    ModelParams out = shape;
    std::size_t pos = 0;
    for (LayerParams& layer : out.layers) {
        for (double& v : layer.weight.data) v = values[pos++];
        for (double& v : layer.bias.data) v = values[pos++];
    }
    return out;
}

ModelParams zeros_like(const ModelParams& model) {
    ModelParams out;
    out.layers.reserve(model.layers.size());
    for (const LayerParams& layer : model.layers) {
        out.layers.push_back({DenseMatrix(layer.weight.rows, layer.weight.cols),
                              DenseMatrix(layer.bias.rows, layer.bias.cols)});
    }
    return out;
}

bool model_all_finite(const ModelParams& model) {
    for (const LayerParams& layer : model.layers) {
        if (!all_finite(layer.weight) || !all_finite(layer.bias)) return false;
    }
    return true;
}

ModelParams init_mlp(const std::vector<std::size_t>& dims, rng::Rng& rng) {
    if (dims.size() < 2) {
        throw std::invalid_argument("init_mlp: need at least input and output dims");
    }
    ModelParams model;
    model.layers.reserve(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        LayerParams layer{DenseMatrix(fan_in, fan_out), DenseMatrix(1, fan_out)};
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : layer.weight.data) v = rng.uniform(-a, a);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

}  // namespace fedsim
