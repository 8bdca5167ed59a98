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

#include "fedsim/dataset.hpp"

#include <cmath>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

void gather(const Dataset& ds, const std::vector<std::size_t>& indices, DenseMatrix& features,
            std::vector<int>& labels) {
    features = DenseMatrix(indices.size(), ds.dim());
    labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = indices[i];
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            features(i, j) = ds.features(src, j);
        }
        labels[i] = ds.labels[src];
    }
}

std::vector<double> synth_blob_mean(int cls, int num_classes, int dim, double spread) {
    std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
    if (dim == 1) {
        mean[0] = 4.0 * spread * static_cast<double>(cls);
    } else if (dim >= num_classes) {
        // Scaled axis points: pairwise distance 4 * spread * sqrt(2).
        mean[static_cast<std::size_t>(cls)] = 4.0 * spread;
    } else {
        // Circle in the first two coordinates with adjacent chord 4 * spread.
        const double radius = 2.0 * spread / std::sin(M_PI / static_cast<double>(num_classes));
        const double angle = 2.0 * M_PI * static_cast<double>(cls) / static_cast<double>(num_classes);
        mean[0] = radius * std::cos(angle);
        mean[1] = radius * std::sin(angle);
    }
    return mean;
}

Dataset synth_blobs(int num_classes, int per_class, int dim, double spread, std::uint64_t seed) {
    if (num_classes < 1 || per_class < 1 || dim < 1) {
        throw std::invalid_argument("synth_blobs: counts must be >= 1");
    }
    if (!(spread > 0.0)) {
        throw std::invalid_argument("synth_blobs: spread must be positive");
    }
    rng::Rng rng(rng::derive(seed, rng::kTagDataset));
    const std::size_t n = static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(per_class);
    Dataset ds;
    ds.features = DenseMatrix(n, static_cast<std::size_t>(dim));
    ds.labels.resize(n);
    ds.num_classes = num_classes;
    std::size_t row = 0;
    for (int c = 0; c < num_classes; ++c) {
        const std::vector<double> mean = synth_blob_mean(c, num_classes, dim, spread);
        for (int s = 0; s < per_class; ++s, ++row) {
            for (int j = 0; j < dim; ++j) {
                ds.features(row, static_cast<std::size_t>(j)) =
                    mean[static_cast<std::size_t>(j)] + spread * rng.normal();
            }
            ds.labels[row] = c;
        }
    }
    return ds;
}

}  // namespace fedsim
