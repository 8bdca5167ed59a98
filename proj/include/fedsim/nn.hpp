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

#include <vector>

#include "fedsim/matrix.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

// Probabilities are clamped here before any log so losses stay finite.
inline constexpr double kProbFloor = 1e-12;

// Temperature softmax, row-wise: softmax(z / tau). Computed with
// max-subtraction so large logits cannot overflow.
DenseMatrix temp_softmax(const DenseMatrix& logits, double tau);

// Everything the backward pass needs: activations[0] is the input batch,
// activations[l] the post-ReLU output of hidden layer l, and the last entry
// holds the raw logits.
struct ForwardTrace {
    std::vector<DenseMatrix> activations;

    const DenseMatrix& logits() const { return activations.back(); }
};

ForwardTrace forward(const ModelParams& model, const DenseMatrix& batch);

// Mean over the batch of -log p[label], probabilities clamped at kProbFloor.
double ce_loss(const DenseMatrix& probs, const std::vector<int>& labels);

// Mean over the batch of KL(teacher || student) with 0*log(0) := 0 and the
// student clamped at kProbFloor.
double kl_loss(const DenseMatrix& teacher_probs, const DenseMatrix& student_probs);

// Which way the distillation KL points. TeacherStudent is
// KL(teacher || student), the standard convention: the gradient pushes the
// student toward the teacher.
enum class KlDirection { kTeacherStudent, kStudentTeacher };

struct DistillOptions {
    KlDirection direction = KlDirection::kTeacherStudent;
    // Multiply each KL term and its gradient by tau^2 (classic distillation
    // gradient rescaling). Off by default.
    bool tau_squared = false;
};

struct LossGrads {
    double loss = 0.0;
    ModelParams grads;
};

// Loss CE(p, y) + lambda * sum_t KL(p_t^tau || p^tau) over up to two frozen
// teachers, with exact analytic gradients for every model parameter. The CE
// term always uses temperature 1. With lambda == 0 or no teachers the
// computation reduces bitwise to the plain CE path.
LossGrads combined_loss_backward(const ModelParams& model, const DenseMatrix& batch,
                                 const std::vector<int>& labels,
                                 const std::vector<const ModelParams*>& teachers, double lambda,
                                 double tau, const DistillOptions& options = {});

// g' = grad + weight_decay * w; buf = momentum * buf + g'; w -= lr * buf.
void sgd_step(ModelParams& model, const ModelParams& grads, SgdState& state);

// Fraction of rows whose argmax logit matches the label; argmax ties go to
// the lowest class index.
double accuracy(const ModelParams& model, const DenseMatrix& batch,
                const std::vector<int>& labels);

}  // namespace fedsim
