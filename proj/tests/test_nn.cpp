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

#include <doctest.h>

#include <cmath>

#include "fedsim/nn.hpp"
#include "oracle.hpp"

using namespace fedsim;

namespace {

DenseMatrix row_matrix(const std::vector<double>& values) {
    DenseMatrix m(1, values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(0, i) = values[i];
    return m;
}

ModelParams single_layer(const DenseMatrix& weight, const DenseMatrix& bias) {
    ModelParams m;
    m.layers.push_back({weight, bias});
    return m;
}

}  // namespace

TEST_SUITE("nn-core") {

TEST_CASE("temp_softmax: uniform logits give the uniform distribution") {
    const DenseMatrix p = temp_softmax(row_matrix({0.0, 0.0, 0.0}), 3.0);
    CHECK(p(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(p(0, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("temp_softmax: [1,2] at tau=1") {
    // exp(1)/(exp(1)+exp(2)) = 1/(1+e), frozen from direct evaluation
    const DenseMatrix p = temp_softmax(row_matrix({1.0, 2.0}), 1.0);
    CHECK(p(0, 0) == doctest::Approx(0.2689414213699951).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("temp_softmax: scale identity, [3,6] at tau=3 equals [1,2] at tau=1") {
    const DenseMatrix a = temp_softmax(row_matrix({3.0, 6.0}), 3.0);
    const DenseMatrix b = temp_softmax(row_matrix({1.0, 2.0}), 1.0);
    CHECK(a(0, 0) == b(0, 0));
    CHECK(a(0, 1) == b(0, 1));
}

TEST_CASE("temp_softmax: non-positive tau rejected") {
    CHECK_THROWS_AS(temp_softmax(row_matrix({1.0}), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(temp_softmax(row_matrix({1.0}), -2.0), std::invalid_argument);
}

TEST_CASE("temp_softmax: rows sum to 1 for extreme logits at several temperatures") {
    rng::Rng rng(101);
    for (double tau : {0.5, 1.0, 3.0, 10.0}) {
        DenseMatrix logits(16, 7);
        for (double& v : logits.data) v = rng.uniform(-50.0, 50.0);
        const DenseMatrix p = temp_softmax(logits, tau);
        for (std::size_t i = 0; i < p.rows; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < p.cols; ++j) {
                CHECK(p(i, j) > 0.0);
                CHECK(p(i, j) < 1.0);
                sum += p(i, j);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("temp_softmax: temperature identity against tau=1 on scaled logits") {
    rng::Rng rng(202);
    for (double tau : {0.5, 3.0, 10.0}) {
        DenseMatrix logits(8, 5);
        for (double& v : logits.data) v = rng.uniform(-10.0, 10.0);
        DenseMatrix scaled = logits;
        scale_inplace(scaled, 1.0 / tau);
        const DenseMatrix a = temp_softmax(logits, tau);
        const DenseMatrix b = temp_softmax(scaled, 1.0);
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward: zero model maps any batch to zero logits") {
    ModelParams model;
    model.layers.push_back({DenseMatrix(3, 4), DenseMatrix(1, 4)});
    model.layers.push_back({DenseMatrix(4, 2), DenseMatrix(1, 2)});
    rng::Rng rng(7);
    const DenseMatrix batch = oracle::random_batch(5, 3, rng);
    const ForwardTrace trace = forward(model, batch);
    for (double v : trace.logits().data) CHECK(v == 0.0);
}

TEST_CASE("forward: identity single layer reproduces the batch") {
    DenseMatrix eye(3, 3);
    for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
    const ModelParams model = single_layer(eye, DenseMatrix(1, 3));
    rng::Rng rng(8);
    const DenseMatrix batch = oracle::random_batch(4, 3, rng);
    const ForwardTrace trace = forward(model, batch);
    for (std::size_t i = 0; i < batch.data.size(); ++i) {
        CHECK(trace.logits().data[i] == batch.data[i]);
    }
}

TEST_CASE("forward: hand-computed one-hidden-layer case") {
    // x = [1, 1]
    // z1 = x W1 + b1 = [3.5, -3.5], a1 = relu(z1) = [3.5, 0]
    // z2 = a1 W2 + b2 = [3.5, 1]
    ModelParams model;
    DenseMatrix w1(2, 2);
    w1(0, 0) = 1.0;  w1(0, 1) = -1.0;
    w1(1, 0) = 2.0;  w1(1, 1) = 0.5;
    DenseMatrix b1(1, 2);
    b1(0, 0) = 0.5;  b1(0, 1) = -3.0;
    DenseMatrix w2(2, 2);
    w2(0, 0) = 1.0;  w2(0, 1) = 0.0;
    w2(1, 0) = -1.0; w2(1, 1) = 2.0;
    DenseMatrix b2(1, 2);
    b2(0, 0) = 0.0;  b2(0, 1) = 1.0;
    model.layers.push_back({w1, b1});
    model.layers.push_back({w2, b2});

    const ForwardTrace trace = forward(model, row_matrix({1.0, 1.0}));
    REQUIRE(trace.activations.size() == 3);
    CHECK(trace.activations[1](0, 0) == 3.5);
    CHECK(trace.activations[1](0, 1) == 0.0);
    CHECK(trace.logits()(0, 0) == 3.5);
    CHECK(trace.logits()(0, 1) == 1.0);
}

TEST_CASE("forward: shape mismatch names both dims") {
    ModelParams model = single_layer(DenseMatrix(4, 2), DenseMatrix(1, 2));
    try {
        forward(model, DenseMatrix(3, 5));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('5') != std::string::npos);
        CHECK(msg.find('4') != std::string::npos);
    }
}

TEST_CASE("ce_loss: confident correct prediction is ~0") {
    DenseMatrix probs = row_matrix({1.0, 0.0});
    CHECK(ce_loss(probs, {0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ce_loss: uniform binary is ln 2") {
    CHECK(ce_loss(row_matrix({0.5, 0.5}), {1}) ==
          doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("ce_loss: two-row mean, frozen from direct evaluation") {
    DenseMatrix probs(2, 2);
    probs(0, 0) = 0.25; probs(0, 1) = 0.75;
    probs(1, 0) = 0.5;  probs(1, 1) = 0.5;
    // (-ln 0.75 - ln 0.5) / 2
    CHECK(ce_loss(probs, {1, 0}) == doctest::Approx(0.4904146265058631).epsilon(1e-12));
}

TEST_CASE("ce_loss: out-of-range label rejected") {
    CHECK_THROWS_AS(ce_loss(row_matrix({0.5, 0.5}), {2}), std::invalid_argument);
    CHECK_THROWS_AS(ce_loss(row_matrix({0.5, 0.5}), {-1}), std::invalid_argument);
}

TEST_CASE("kl_loss: identical distributions give exactly zero") {
    DenseMatrix p(2, 3);
    p(0, 0) = 0.2; p(0, 1) = 0.3; p(0, 2) = 0.5;
    p(1, 0) = 0.6; p(1, 1) = 0.1; p(1, 2) = 0.3;
    CHECK(kl_loss(p, p) == 0.0);
}

TEST_CASE("kl_loss: one-hot teacher vs uniform student is ln 2") {
    CHECK(kl_loss(row_matrix({1.0, 0.0}), row_matrix({0.5, 0.5})) ==
          doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("kl_loss: frozen two-class value") {
    // 0.5 ln(0.5/0.25) + 0.5 ln(0.5/0.75)
    CHECK(kl_loss(row_matrix({0.5, 0.5}), row_matrix({0.25, 0.75})) ==
          doctest::Approx(0.14384103622589042).epsilon(1e-12));
}

TEST_CASE("kl_loss: shape mismatch") {
    CHECK_THROWS_AS(kl_loss(row_matrix({1.0, 0.0}), DenseMatrix(1, 3, 1.0 / 3.0)), ShapeError);
}

TEST_CASE("kl_loss: non-negative on random stochastic rows") {
    rng::Rng rng(33);
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix t(1, 5);
        DenseMatrix s(1, 5);
        double ts = 0.0;
        double ss = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            t(0, j) = rng.uniform_pos();
            s(0, j) = rng.uniform_pos();
            ts += t(0, j);
            ss += s(0, j);
        }
        for (std::size_t j = 0; j < 5; ++j) {
            t(0, j) /= ts;
            s(0, j) /= ss;
        }
        CHECK(kl_loss(t, s) >= 0.0);
        CHECK(kl_loss(t, t) == 0.0);
    }
}

TEST_CASE("combined_loss_backward: no teachers degenerates to the CE path") {
    rng::Rng rng(44);
    const ModelParams model = oracle::random_model({4, 6, 3}, rng);
    const DenseMatrix batch = oracle::random_batch(5, 4, rng);
    const std::vector<int> labels = oracle::random_labels(5, 3, rng);

    const LossGrads with_lambda = combined_loss_backward(model, batch, labels, {}, 0.5, 3.0);
    const LossGrads without = combined_loss_backward(model, batch, labels, {}, 0.0, 3.0);

    const ForwardTrace trace = forward(model, batch);
    const double ce = ce_loss(temp_softmax(trace.logits(), 1.0), labels);
    CHECK(with_lambda.loss == ce);
    CHECK(without.loss == ce);
    CHECK(flatten(with_lambda.grads) == flatten(without.grads));
}

TEST_CASE("combined_loss_backward: lambda=0 with teachers matches the CE path bitwise") {
    rng::Rng rng(45);
    const ModelParams model = oracle::random_model({4, 6, 3}, rng);
    const ModelParams teacher_a = oracle::random_model({4, 6, 3}, rng);
    const ModelParams teacher_b = oracle::random_model({4, 6, 3}, rng);
    const DenseMatrix batch = oracle::random_batch(4, 4, rng);
    const std::vector<int> labels = oracle::random_labels(4, 3, rng);

    const LossGrads a =
        combined_loss_backward(model, batch, labels, {&teacher_a, &teacher_b}, 0.0, 3.0);
    const LossGrads b = combined_loss_backward(model, batch, labels, {}, 0.0, 3.0);
    CHECK(a.loss == b.loss);
    CHECK(flatten(a.grads) == flatten(b.grads));
}

TEST_CASE("combined_loss_backward: teacher with wrong output dim rejected") {
    rng::Rng rng(46);
    const ModelParams model = oracle::random_model({4, 3}, rng);
    const ModelParams teacher = oracle::random_model({4, 5}, rng);
    const DenseMatrix batch = oracle::random_batch(2, 4, rng);
    CHECK_THROWS_AS(combined_loss_backward(model, batch, {0, 1}, {&teacher}, 0.5, 3.0),
                    ShapeError);
}

TEST_CASE("combined_loss_backward: dual-teacher loss value matches the reference oracle") {
    rng::Rng rng(47);
    const ModelParams model = oracle::random_model({4, 8, 3}, rng);
    const ModelParams global_teacher = oracle::random_model({4, 8, 3}, rng);
    const ModelParams hist_teacher = oracle::random_model({4, 8, 3}, rng);
    const DenseMatrix batch = oracle::random_batch(4, 4, rng);
    const std::vector<int> labels = oracle::random_labels(4, 3, rng);

    const LossGrads lg = combined_loss_backward(model, batch, labels,
                                                {&global_teacher, &hist_teacher}, 0.5, 3.0);
    oracle::RefLossSpec spec;
    spec.batch = &batch;
    spec.labels = &labels;
    spec.teachers = {&global_teacher, &hist_teacher};
    spec.lambda = 0.5;
    spec.tau = 3.0;
    CHECK(lg.loss == doctest::Approx(oracle::ref_combined_loss(model, spec)).epsilon(1e-12));
}

TEST_CASE("combined_loss_backward: gradients match finite differences of the reference loss") {
    rng::Rng rng(48);
    int done = 0;
    while (done < 30) {
        const std::size_t hidden = 2 + rng.uniform_index(8);
        const std::size_t in_dim = 2 + rng.uniform_index(4);
        const std::size_t classes = 2 + rng.uniform_index(3);
        std::vector<std::size_t> dims;
        if (rng.uniform() < 0.3) {
            dims = {in_dim, classes};
        } else if (rng.uniform() < 0.5) {
            dims = {in_dim, hidden, classes};
        } else {
            dims = {in_dim, hidden, hidden, classes};
        }
        const ModelParams model = oracle::random_model(dims, rng);
        const std::size_t batch_rows = 1 + rng.uniform_index(4);
        const DenseMatrix batch = oracle::random_batch(batch_rows, in_dim, rng);
        if (oracle::min_relu_margin(model, batch) < 1e-3) continue;
        const std::vector<int> labels =
            oracle::random_labels(batch_rows, static_cast<int>(classes), rng);

        const double tau = rng.uniform() < 0.5 ? 1.0 : 3.0;
        const double lambda = rng.uniform() < 0.3 ? 0.0 : 0.5;
        const ModelParams teacher_a = oracle::random_model(dims, rng);
        const ModelParams teacher_b = oracle::random_model(dims, rng);
        std::vector<const ModelParams*> teachers;
        if (rng.uniform() < 0.8) teachers.push_back(&teacher_a);
        if (rng.uniform() < 0.5) teachers.push_back(&teacher_b);

        DistillOptions opts;
        if (rng.uniform() < 0.3) opts.direction = KlDirection::kStudentTeacher;
        if (rng.uniform() < 0.3) opts.tau_squared = true;

        const LossGrads lg =
            combined_loss_backward(model, batch, labels, teachers, lambda, tau, opts);

        oracle::RefLossSpec spec;
        spec.batch = &batch;
        spec.labels = &labels;
        spec.teachers = teachers;
        spec.lambda = lambda;
        spec.tau = tau;
        spec.distill = opts;
        CHECK(lg.loss ==
              doctest::Approx(oracle::ref_combined_loss(model, spec)).epsilon(1e-10));
        const std::vector<double> fd = oracle::finite_difference_grads(
            [&](const ModelParams& m) { return oracle::ref_combined_loss(m, spec); }, model,
            1e-5);
        CHECK(oracle::max_rel_error(flatten(lg.grads), fd) < 1e-4);
        ++done;
    }
}

TEST_CASE("sgd_step: momentum 0, decay 0 is vanilla descent") {
    ModelParams model = single_layer(DenseMatrix(1, 1, 1.0), DenseMatrix(1, 1, 2.0));
    ModelParams grads = single_layer(DenseMatrix(1, 1, 0.5), DenseMatrix(1, 1, -1.0));
    SgdState state;
    state.lr = 0.1;
    state.reset(model);
    sgd_step(model, grads, state);
    CHECK(model.layers[0].weight(0, 0) == 1.0 - 0.1 * 0.5);
    CHECK(model.layers[0].bias(0, 0) == 2.0 - 0.1 * (-1.0));
}

TEST_CASE("sgd_step: zero grads with zero buffers is a fixed point") {
    ModelParams model = single_layer(DenseMatrix(2, 2, 0.7), DenseMatrix(1, 2, -0.3));
    const ModelParams grads = zeros_like(model);
    SgdState state;
    state.lr = 0.05;
    state.momentum = 0.9;
    state.reset(model);
    const std::vector<double> before = flatten(model);
    sgd_step(model, grads, state);
    CHECK(flatten(model) == before);
}

TEST_CASE("sgd_step: two steps of constant gradient accumulate momentum") {
    // buf1 = g, buf2 = 0.9 g + g = 1.9 g; total change = -lr (g + 1.9 g) = -0.029 g
    ModelParams model = single_layer(DenseMatrix(1, 1, 1.0), DenseMatrix(1, 1, 0.0));
    ModelParams grads = single_layer(DenseMatrix(1, 1, 0.5), DenseMatrix(1, 1, 0.0));
    SgdState state;
    state.lr = 0.01;
    state.momentum = 0.9;
    state.reset(model);
    sgd_step(model, grads, state);
    sgd_step(model, grads, state);
    CHECK(model.layers[0].weight(0, 0) ==
          doctest::Approx(1.0 - 0.029 * 0.5).epsilon(1e-14));
}

TEST_CASE("sgd_step: weight decay is applied to the gradient before momentum") {
    ModelParams model = single_layer(DenseMatrix(1, 1, 2.0), DenseMatrix(1, 1, 0.0));
    const ModelParams grads = zeros_like(model);
    SgdState state;
    state.lr = 0.1;
    state.momentum = 0.0;
    state.weight_decay = 0.01;
    state.reset(model);
    sgd_step(model, grads, state);
    // g' = 0 + 0.01 * 2 = 0.02; w = 2 - 0.1 * 0.02
    CHECK(model.layers[0].weight(0, 0) == doctest::Approx(2.0 - 0.002).epsilon(1e-15));
}

TEST_CASE("accuracy: forced one-hot logits") {
    // Linear model on one-hot inputs: weight = I scaled, so logits peak at
    // the input's class.
    DenseMatrix eye(3, 3);
    for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
    const ModelParams model = single_layer(eye, DenseMatrix(1, 3));
    DenseMatrix batch(3, 3);
    batch(0, 0) = 1.0;
    batch(1, 1) = 1.0;
    batch(2, 2) = 1.0;
    CHECK(accuracy(model, batch, {0, 1, 2}) == 1.0);
    CHECK(accuracy(model, batch, {1, 2, 0}) == 0.0);
    CHECK(accuracy(model, batch, {0, 1, 0}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("accuracy: 3 of 4 correct gives 0.75") {
    DenseMatrix eye(2, 2);
    eye(0, 0) = 1.0;
    eye(1, 1) = 1.0;
    const ModelParams model = single_layer(eye, DenseMatrix(1, 2));
    DenseMatrix batch(4, 2);
    batch(0, 0) = 1.0;
    batch(1, 0) = 1.0;
    batch(2, 1) = 1.0;
    batch(3, 1) = 1.0;
    CHECK(accuracy(model, batch, {0, 0, 1, 0}) == 0.75);
}

TEST_CASE("accuracy: argmax ties break to the lowest class index") {
    const ModelParams model = single_layer(DenseMatrix(1, 3), DenseMatrix(1, 3));  // all zeros
    const DenseMatrix batch(2, 1, 1.0);
    CHECK(accuracy(model, batch, {0, 0}) == 1.0);
    CHECK(accuracy(model, batch, {1, 1}) == 0.0);
}

TEST_CASE("accuracy: empty batch rejected") {
    const ModelParams model = single_layer(DenseMatrix(2, 2), DenseMatrix(1, 2));
    CHECK_THROWS_AS(accuracy(model, DenseMatrix(0, 2), {}), std::invalid_argument);
}

TEST_CASE("full-batch gradient descent is monotonically non-increasing") {
    rng::Rng rng(55);
    ModelParams model = oracle::random_model({3, 8, 3}, rng);
    const DenseMatrix batch = oracle::random_batch(12, 3, rng);
    const std::vector<int> labels = oracle::random_labels(12, 3, rng);
    const ModelParams teacher = oracle::random_model({3, 8, 3}, rng);

    SgdState state;
    state.lr = 0.001;
    state.reset(model);
    double prev = HUGE_VAL;
    for (int step = 0; step < 50; ++step) {
        const LossGrads lg = combined_loss_backward(model, batch, labels, {&teacher}, 0.5, 3.0);
        CHECK(lg.loss <= prev);
        prev = lg.loss;
        sgd_step(model, lg.grads, state);
    }
}

TEST_CASE("flatten/unflatten round-trips bitwise") {
    rng::Rng rng(66);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 1 + rng.uniform_index(6);
        const std::size_t hidden = 1 + rng.uniform_index(8);
        const std::size_t out = 1 + rng.uniform_index(5);
        const ModelParams model = oracle::random_model({in, hidden, out}, rng);
        const std::vector<double> flat = flatten(model);
        const ModelParams back = unflatten(flat, model);
        CHECK(flatten(back) == flat);
        CHECK(back.same_shape(model));
    }
}

TEST_CASE("model parameters stay finite through training steps") {
    rng::Rng rng(77);
    ModelParams model = oracle::random_model({4, 8, 3}, rng);
    const DenseMatrix batch = oracle::random_batch(6, 4, rng);
    const std::vector<int> labels = oracle::random_labels(6, 3, rng);
    SgdState state;
    state.lr = 0.05;
    state.momentum = 0.9;
    state.weight_decay = 1e-5;
    state.reset(model);
    for (int step = 0; step < 30; ++step) {
        const LossGrads lg = combined_loss_backward(model, batch, labels, {}, 0.0, 3.0);
        sgd_step(model, lg.grads, state);
        CHECK(model_all_finite(model));
    }
}

}  // TEST_SUITE
