#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace carlab {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles; the only numeric container in the lab.
// Invariant: data.size() == rows * cols.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix from_rows(const std::vector<Vec>& rows);
    static Matrix row_vector(const Vec& v);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    Vec row_copy(std::size_t i) const { return Vec(data.begin() + static_cast<std::ptrdiff_t>(i * cols), data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols)); }

    std::size_t size() const { return data.size(); }
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;
};

// Throws ShapeError unless a.cols == b.rows; result entries are checked finite.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

// Column sums, as a vector of length m.cols.
Vec column_sums(const Matrix& m);

}  // namespace carlab
