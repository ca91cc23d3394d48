#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bsrk/error.hpp"

namespace bsrk {

/// Dense row-major 2-D array of doubles. Missing cells are NaN.
class Array2D {
public:
    Array2D() : rows_(0), cols_(0) {}
    Array2D(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw data_error("Array2D: negative dimensions");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    double& at(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    bool same_shape(const Array2D& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    static bool is_missing(double x) { return std::isnan(x); }
    static double missing() { return std::nan(""); }

private:
    int rows_, cols_;
    std::vector<double> v_;
};

} // namespace bsrk
