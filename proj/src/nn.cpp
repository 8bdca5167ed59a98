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

#include "fedsim/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedsim {

namespace {

double clamped_log(double p) {
    return std::log(p < kProbFloor ? kProbFloor : p);
}

void check_labels(const DenseMatrix& probs, const std::vector<int>& labels) {
    if (labels.size() != probs.rows) {
        throw ShapeError("labels: " + std::to_string(labels.size()) + " vs batch rows " +
                         std::to_string(probs.rows));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probs.cols) {
            throw std::invalid_argument("label " + std::to_string(labels[i]) + " at row " +
                                        std::to_string(i) + " out of range [0, " +
                                        std::to_string(probs.cols) + ")");
        }
    }
}

// Per-row KL of a single row; both args are rows of row-stochastic matrices.
double kl_row(const DenseMatrix& t, const DenseMatrix& s, std::size_t row) {
    double sum = 0.0;
    for (std::size_t j = 0; j < t.cols; ++j) {
        const double ti = t(row, j);
        if (ti == 0.0) continue;
        sum += ti * (clamped_log(ti) - clamped_log(s(row, j)));
    }
    return sum;
}

}  // namespace

DenseMatrix temp_softmax(const DenseMatrix& logits, double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("temp_softmax: tau must be positive, got " +
                                    std::to_string(tau));
    }
    DenseMatrix probs(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        double max_val = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols; ++j) {
            if (logits(i, j) > max_val) max_val = logits(i, j);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const double e = std::exp((logits(i, j) - max_val) / tau);
            probs(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < logits.cols; ++j) {
            probs(i, j) /= sum;
        }
    }
    return probs;
}

ForwardTrace forward(const ModelParams& model, const DenseMatrix& batch) {
    check_model_consistent(model);
    if (batch.cols != model.input_dim()) {
        throw ShapeError("forward: batch cols " + std::to_string(batch.cols) +
                         " vs first-layer in " + std::to_string(model.input_dim()));
    }
    ForwardTrace trace;
    trace.activations.reserve(model.layers.size() + 1);
    trace.activations.push_back(batch);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        DenseMatrix z = matmul(trace.activations.back(), model.layers[l].weight);
        add_row_inplace(z, model.layers[l].bias);
        if (l + 1 < model.layers.size()) {
            relu_inplace(z);
        }
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

double ce_loss(const DenseMatrix& probs, const std::vector<int>& labels) {
    check_labels(probs, labels);
    if (probs.rows == 0) {
        throw std::invalid_argument("ce_loss: empty batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        total -= clamped_log(probs(i, static_cast<std::size_t>(labels[i])));
    }
    return total / static_cast<double>(probs.rows);
}

double kl_loss(const DenseMatrix& teacher_probs, const DenseMatrix& student_probs) {
    if (!teacher_probs.same_shape(student_probs)) {
        throw ShapeError("kl_loss: teacher " + shape_string(teacher_probs) + " vs student " +
                         shape_string(student_probs));
    }
    if (teacher_probs.rows == 0) {
        throw std::invalid_argument("kl_loss: empty batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < teacher_probs.rows; ++i) {
        total += kl_row(teacher_probs, student_probs, i);
    }
    return total / static_cast<double>(teacher_probs.rows);
}

LossGrads combined_loss_backward(const ModelParams& model, const DenseMatrix& batch,
                                 const std::vector<int>& labels,
                                 const std::vector<const ModelParams*>& teachers, double lambda,
                                 double tau, const DistillOptions& options) {
    if (lambda < 0.0) {
        throw std::invalid_argument("combined_loss_backward: lambda must be >= 0");
    }
    const ForwardTrace trace = forward(model, batch);
    const DenseMatrix& logits = trace.logits();
    const std::size_t batch_size = batch.rows;
    const double inv_batch = 1.0 / static_cast<double>(batch_size);

    const DenseMatrix probs = temp_softmax(logits, 1.0);
    LossGrads result;
    result.loss = ce_loss(probs, labels);

    // dL/dlogits of the CE term: (p - onehot(y)) / batch.
    DenseMatrix dlogits = probs;
    for (std::size_t i = 0; i < batch_size; ++i) {
        dlogits(i, static_cast<std::size_t>(labels[i])) -= 1.0;
    }
    scale_inplace(dlogits, inv_batch);

    if (lambda != 0.0 && !teachers.empty()) {
        const DenseMatrix student_tau = temp_softmax(logits, tau);
        // tau^2 rescaling multiplies the KL term; the gradient carries the
        // same factor on top of the chain-rule 1/tau.
        const double term_scale = options.tau_squared ? tau * tau : 1.0;
        const double grad_scale = lambda * term_scale * inv_batch / tau;
        for (const ModelParams* teacher : teachers) {
            if (teacher == nullptr) continue;
            const ForwardTrace teacher_trace = forward(*teacher, batch);
            if (teacher_trace.logits().cols != logits.cols) {
                throw ShapeError("teacher output dim " +
                                 std::to_string(teacher_trace.logits().cols) + " vs student " +
                                 std::to_string(logits.cols));
            }
            const DenseMatrix teacher_tau = temp_softmax(teacher_trace.logits(), tau);
            if (options.direction == KlDirection::kTeacherStudent) {
                result.loss += lambda * term_scale * kl_loss(teacher_tau, student_tau);
                // d KL(t || s) / dz_j = (s_j - t_j) / tau
                for (std::size_t i = 0; i < batch_size; ++i) {
                    for (std::size_t j = 0; j < logits.cols; ++j) {
                        dlogits(i, j) +=
                            grad_scale * (student_tau(i, j) - teacher_tau(i, j));
                    }
                }
            } else {
                result.loss += lambda * term_scale * kl_loss(student_tau, teacher_tau);
                // d KL(s || t) / dz_j = s_j * (log(s_j / t_j) - KL_row) / tau
                for (std::size_t i = 0; i < batch_size; ++i) {
                    const double row_kl = kl_row(student_tau, teacher_tau, i);
                    for (std::size_t j = 0; j < logits.cols; ++j) {
                        const double sj = student_tau(i, j);
                        const double log_ratio =
                            clamped_log(sj) - clamped_log(teacher_tau(i, j));
                        dlogits(i, j) += grad_scale * sj * (log_ratio - row_kl);
                    }
                }
            }
        }
    }

    // Backprop dlogits through the layers.
    result.grads = zeros_like(model);
    DenseMatrix delta = std::move(dlogits);
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const DenseMatrix& input = trace.activations[l];
        result.grads.layers[l].weight = matmul_trans_a(input, delta);
        result.grads.layers[l].bias = colsum(delta);
        if (l > 0) {
            delta = matmul_trans_b(delta, model.layers[l].weight);
            relu_backward_inplace(delta, trace.activations[l]);
        }
    }
    return result;
}

void sgd_step(ModelParams& model, const ModelParams& grads, SgdState& state) {
    if (!model.same_shape(grads) || !model.same_shape(state.buffers)) {
        throw ShapeError("sgd_step: model, grads and buffers must share shapes");
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto update = [&](DenseMatrix& w, const DenseMatrix& g, DenseMatrix& buf) {
            for (std::size_t i = 0; i < w.data.size(); ++i) {
                const double g_decayed = g.data[i] + state.weight_decay * w.data[i];
                buf.data[i] = state.momentum * buf.data[i] + g_decayed;
                w.data[i] -= state.lr * buf.data[i];
            }
        };
        update(model.layers[l].weight, grads.layers[l].weight, state.buffers.layers[l].weight);
        update(model.layers[l].bias, grads.layers[l].bias, state.buffers.layers[l].bias);
    }
}

double accuracy(const ModelParams& model, const DenseMatrix& batch,
                const std::vector<int>& labels) {
    if (batch.rows == 0) {
        throw std::invalid_argument("accuracy: empty batch");
    }
    const ForwardTrace trace = forward(model, batch);
    check_labels(trace.logits(), labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < batch.rows; ++i) {
        if (argmax_row(trace.logits(), i) == static_cast<std::size_t>(labels[i])) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(batch.rows);
}

}  // namespace fedsim
