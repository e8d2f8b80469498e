#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace amerbound {

// Failure classes; the CLI maps each one to a distinct exit code.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CertificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double> row(std::size_t i) const {
        return {data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_};
    }
    std::vector<double> col(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }
    std::vector<std::vector<double>> nested() const {
        std::vector<std::vector<double>> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = row(i);
        return out;
    }
    static Matrix from_nested(const std::vector<std::vector<double>>& v) {
        Matrix m(v.size(), v.empty() ? 0 : v[0].size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].size() != m.cols()) throw std::invalid_argument("ragged matrix");
            for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = v[i][j];
        }
        return m;
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, x < 0 ? -x : x);
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Joint-mass array g_{j,k,n}: one square matrix per transition n -> n+1.
using Transitions = std::vector<Matrix>;

}  // namespace amerbound
