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

#include "oracle.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using fedsim::DenseMatrix;
using fedsim::KlDirection;
using fedsim::ModelParams;

std::vector<double> ref_logits(const ModelParams& model, const std::vector<double>& x) {
    std::vector<double> current = x;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const DenseMatrix& w = model.layers[l].weight;
        const DenseMatrix& b = model.layers[l].bias;
        std::vector<double> next(w.cols, 0.0);
        for (std::size_t j = 0; j < w.cols; ++j) {
            double sum = b(0, j);
            for (std::size_t i = 0; i < w.rows; ++i) {
                sum += current[i] * w(i, j);
            }
            next[j] = sum;
        }
        if (l + 1 < model.layers.size()) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        }
        current = std::move(next);
    }
    return current;
}

std::vector<double> ref_softmax(const std::vector<double>& z, double tau) {
    double max_val = z[0];
    for (double v : z) max_val = std::max(max_val, v);
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp((z[i] - max_val) / tau);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

namespace {

double safe_log(double p) {
    return std::log(std::max(p, 1e-12));
}

std::vector<double> row_of(const DenseMatrix& m, std::size_t r) {
    std::vector<double> row(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) row[j] = m(r, j);
    return row;
}

}  // namespace

double ref_combined_loss(const ModelParams& model, const RefLossSpec& spec) {
    const DenseMatrix& batch = *spec.batch;
    const std::vector<int>& labels = *spec.labels;
    const double n = static_cast<double>(batch.rows);
    const double term_scale = spec.distill.tau_squared ? spec.tau * spec.tau : 1.0;

    double loss = 0.0;
    for (std::size_t r = 0; r < batch.rows; ++r) {
        const std::vector<double> x = row_of(batch, r);
        const std::vector<double> z = ref_logits(model, x);
        const std::vector<double> p = ref_softmax(z, 1.0);
        loss += -safe_log(p[static_cast<std::size_t>(labels[r])]) / n;

        if (spec.lambda == 0.0) continue;
        const std::vector<double> s = ref_softmax(z, spec.tau);
        for (const ModelParams* teacher : spec.teachers) {
            const std::vector<double> t = ref_softmax(ref_logits(*teacher, x), spec.tau);
            double kl = 0.0;
            if (spec.distill.direction == KlDirection::kTeacherStudent) {
                for (std::size_t j = 0; j < t.size(); ++j) {
                    if (t[j] > 0.0) kl += t[j] * (safe_log(t[j]) - safe_log(s[j]));
                }
            } else {
                for (std::size_t j = 0; j < s.size(); ++j) {
                    if (s[j] > 0.0) kl += s[j] * (safe_log(s[j]) - safe_log(t[j]));
                }
            }
            loss += spec.lambda * term_scale * kl / n;
        }
    }

    if (spec.prox_mu != 0.0 && spec.prox_ref != nullptr) {
        const std::vector<double> w = fedsim::flatten(model);
        const std::vector<double> ref = fedsim::flatten(*spec.prox_ref);
        double sq = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            sq += (w[i] - ref[i]) * (w[i] - ref[i]);
        }
        loss += 0.5 * spec.prox_mu * sq;
    }
    return loss;
}

std::vector<double> finite_difference_grads(
    const std::function<double(const ModelParams&)>& loss, const ModelParams& at, double eps) {
    const std::vector<double> theta = fedsim::flatten(at);
    std::vector<double> grads(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        std::vector<double> plus = theta;
        std::vector<double> minus = theta;
        plus[i] += eps;
        minus[i] -= eps;
        const double f_plus = loss(fedsim::unflatten(plus, at));
        const double f_minus = loss(fedsim::unflatten(minus, at));
        grads[i] = (f_plus - f_minus) / (2.0 * eps);
    }
    return grads;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b,
                     double floor_value) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor_value});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

double min_relu_margin(const ModelParams& model, const DenseMatrix& batch) {
    double margin = HUGE_VAL;
    for (std::size_t r = 0; r < batch.rows; ++r) {
        std::vector<double> current = row_of(batch, r);
        for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
            const DenseMatrix& w = model.layers[l].weight;
            const DenseMatrix& b = model.layers[l].bias;
            std::vector<double> next(w.cols, 0.0);
            for (std::size_t j = 0; j < w.cols; ++j) {
                double sum = b(0, j);
                for (std::size_t i = 0; i < w.rows; ++i) sum += current[i] * w(i, j);
                margin = std::min(margin, std::fabs(sum));
                next[j] = sum > 0.0 ? sum : 0.0;
            }
            current = std::move(next);
        }
    }
    return margin;
}

ModelParams random_model(const std::vector<std::size_t>& dims, fedsim::rng::Rng& rng,
                         double scale) {
    ModelParams model;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        fedsim::LayerParams layer{DenseMatrix(dims[l], dims[l + 1]),
                                  DenseMatrix(1, dims[l + 1])};
        for (double& v : layer.weight.data) v = rng.uniform(-scale, scale);
        for (double& v : layer.bias.data) v = rng.uniform(-scale, scale);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

DenseMatrix random_batch(std::size_t n, std::size_t d, fedsim::rng::Rng& rng) {
    DenseMatrix batch(n, d);
    for (double& v : batch.data) v = rng.uniform(-1.0, 1.0);
    return batch;
}

std::vector<int> random_labels(std::size_t n, int classes, fedsim::rng::Rng& rng) {
    std::vector<int> labels(n);
    for (int& l : labels) {
        l = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(classes)));
    }
    return labels;
}

}  // namespace oracle
