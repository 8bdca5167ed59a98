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

namespace fedsim {

struct Dataset {
    DenseMatrix features;     // N x d
    std::vector<int> labels;  // length N, each < num_classes
    int num_classes = 0;

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
};

// Gather the given rows into a feature matrix + label vector.
void gather(const Dataset& ds, const std::vector<std::size_t>& indices, DenseMatrix& features,
            std::vector<int>& labels);

// Isotropic Gaussian blobs, one per class, with class means placed at least
// 4 * spread apart (axis points for dim >= classes, a circle for dim == 2..,
// a line for dim == 1) so the classes stay learnable.
Dataset synth_blobs(int num_classes, int per_class, int dim, double spread, std::uint64_t seed);

// Class mean used by synth_blobs; exposed for tests.
std::vector<double> synth_blob_mean(int cls, int num_classes, int dim, double spread);

}  // namespace fedsim
