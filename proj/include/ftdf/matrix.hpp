#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ftdf/error.hpp"

namespace ftdf {

/// Dense row-major matrix of features.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t cols) : cols_(cols) {}
    Matrix(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return cols_ == 0 ? 0 : data_.size() / cols_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    void append_row(std::span<const double> values) {
        if (values.size() != cols_) throw Error(Errc::ShapeMismatch, "row width differs from matrix width");
        data_.insert(data_.end(), values.begin(), values.end());
    }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace ftdf
