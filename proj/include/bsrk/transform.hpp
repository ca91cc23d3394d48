#pragma once

#include <string>
#include <vector>

#include "bsrk/array2d.hpp"

namespace bsrk {

/// Non-parametric map T from emission values to uniform [0,1] and its
/// inverse, stored as the empirical quantile function sampled at n_q
/// uniform probabilities. Immutable once fitted.
class TransformModel {
public:
    static constexpr int kDefaultQuantiles = 1000;

    /// Fits quantiles at probabilities k/(n_q-1) with linear interpolation
    /// between order statistics. Requires at least n_q finite samples.
    static TransformModel fit(std::vector<double> samples, int n_q = kDefaultQuantiles);

    /// T(x): piecewise-linear inverse lookup into the quantile grid.
    /// Values outside the fitted range clamp to 0/1; a tied block maps to
    /// the midpoint of its cumulative-probability span; NaN passes through.
    double forward(double x) const;
    Array2D forward(const Array2D& a) const;

    /// T^-1(u): piecewise-linear evaluation of the quantile grid at
    /// clamp(u, 0, 1); NaN passes through.
    double inverse(double u) const;
    Array2D inverse(const Array2D& a) const;

    int n_q() const { return static_cast<int>(grid_.size()); }
    std::size_t n_fitted() const { return n_fitted_; }
    const std::vector<double>& quantile_grid() const { return grid_; }
    double fitted_min() const { return grid_.front(); }
    double fitted_max() const { return grid_.back(); }

    void save(const std::string& path) const;
    static TransformModel load(const std::string& path);

private:
    TransformModel(std::vector<double> grid, std::size_t n_fitted);

    std::vector<double> grid_;
    std::size_t n_fitted_;
};

} // namespace bsrk
