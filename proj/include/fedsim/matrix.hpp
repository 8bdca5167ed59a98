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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedsim {

// Thrown when two operands have incompatible dimensions. The message names
// both offending dimensions.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Row-major dense matrix of doubles. The only numeric container used for
// weights, activations and gradients.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols entries, row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double value = 0.0)
        : rows(r), cols(c), data(r * c, value) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return rows == 0 || cols == 0; }

    bool same_shape(const DenseMatrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// C = A^T * B
DenseMatrix matmul_trans_a(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B^T
DenseMatrix matmul_trans_b(const DenseMatrix& a, const DenseMatrix& b);

// m[r, :] += row for every r; row must be 1 x m.cols
void add_row_inplace(DenseMatrix& m, const DenseMatrix& row);

// Column sums as a 1 x cols matrix.
DenseMatrix colsum(const DenseMatrix& m);

void relu_inplace(DenseMatrix& m);

// grad(i, j) = 0 wherever activation(i, j) == 0. Post-ReLU activations are
// positive exactly where the pre-activation was positive, so the mask is the
// exact ReLU derivative.
void relu_backward_inplace(DenseMatrix& grad, const DenseMatrix& activation);

// y += a * x, elementwise, same shape
void axpy_inplace(DenseMatrix& y, double a, const DenseMatrix& x);

void scale_inplace(DenseMatrix& m, double a);

bool all_finite(const DenseMatrix& m);

// Index of the row maximum; ties broken by the lowest column index.
std::size_t argmax_row(const DenseMatrix& m, std::size_t row);

std::string shape_string(const DenseMatrix& m);

}  // namespace fedsim
