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

#include "fedsim/matrix.hpp"

#include <cmath>

namespace fedsim {

std::string shape_string(const DenseMatrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: inner dims " + std::to_string(a.cols) + " vs " +
                         std::to_string(b.rows));
    }
    DenseMatrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

DenseMatrix matmul_trans_a(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows) {
        throw ShapeError("matmul_trans_a: inner dims " + std::to_string(a.rows) + " vs " +
                         std::to_string(b.rows));
    }
    DenseMatrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                c(i, j) += aki * b(k, j);
            }
        }
    }
    return c;
}

DenseMatrix matmul_trans_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.cols) {
        throw ShapeError("matmul_trans_b: inner dims " + std::to_string(a.cols) + " vs " +
                         std::to_string(b.cols));
    }
    DenseMatrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.rows; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                sum += a(i, k) * b(j, k);
            }
            c(i, j) = sum;
        }
    }
    return c;
}

void add_row_inplace(DenseMatrix& m, const DenseMatrix& row) {
    if (row.rows != 1 || row.cols != m.cols) {
        throw ShapeError("add_row_inplace: row " + shape_string(row) + " vs matrix " +
                         shape_string(m));
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            m(i, j) += row(0, j);
        }
    }
}

DenseMatrix colsum(const DenseMatrix& m) {
    DenseMatrix s(1, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            s(0, j) += m(i, j);
        }
    }
    return s;
}

void relu_inplace(DenseMatrix& m) {
    for (double& v : m.data) {
        if (v < 0.0) v = 0.0;
    }
}

void relu_backward_inplace(DenseMatrix& grad, const DenseMatrix& activation) {
    if (!grad.same_shape(activation)) {
        throw ShapeError("relu_backward: grad " + shape_string(grad) + " vs activation " +
                         shape_string(activation));
    }
    for (std::size_t i = 0; i < grad.data.size(); ++i) {
        if (activation.data[i] <= 0.0) grad.data[i] = 0.0;
    }
}

void axpy_inplace(DenseMatrix& y, double a, const DenseMatrix& x) {
    if (!y.same_shape(x)) {
        throw ShapeError("axpy: " + shape_string(y) + " vs " + shape_string(x));
    }
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        y.data[i] += a * x.data[i];
    }
}

void scale_inplace(DenseMatrix& m, double a) {
    for (double& v : m.data) v *= a;
}

bool all_finite(const DenseMatrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::size_t argmax_row(const DenseMatrix& m, std::size_t row) {
    std::size_t best = 0;
    double best_val = m(row, 0);
    for (std::size_t j = 1; j < m.cols; ++j) {
        if (m(row, j) > best_val) {
            best_val = m(row, j);
            best = j;
        }
    }
    return best;
}

}  // namespace fedsim
