#include "bsrk/transform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "bsrk/error.hpp"

namespace bsrk {

TransformModel::TransformModel(std::vector<double> grid, std::size_t n_fitted)
    : grid_(std::move(grid)), n_fitted_(n_fitted) {
    if (grid_.size() < 2) throw config_error("TransformModel: need at least 2 quantiles");
    if (!std::is_sorted(grid_.begin(), grid_.end()))
        throw data_error("TransformModel: quantile grid not monotone");
}

TransformModel TransformModel::fit(std::vector<double> samples, int n_q) {
    if (n_q < 2) throw config_error("fit: n_q must be >= 2");
    for (double x : samples)
        if (!std::isfinite(x)) throw data_error("fit: non-finite sample");
    if (samples.size() < static_cast<std::size_t>(n_q))
        throw data_error("fit: fewer samples than quantiles");

    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    std::vector<double> grid(n_q);
    for (int k = 0; k < n_q; ++k) {
        const double pos = static_cast<double>(k) / (n_q - 1) * static_cast<double>(n - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        grid[k] = (i + 1 < n) ? samples[i] + frac * (samples[i + 1] - samples[i])
                              : samples[n - 1];
    }
    return TransformModel(std::move(grid), n);
}

double TransformModel::forward(double x) const {
    if (std::isnan(x)) return x;
    if (!std::isfinite(x)) throw numeric_error("forward: non-finite input");
    const std::size_t n = grid_.size();
    const double denom = static_cast<double>(n - 1);

    auto lo = std::lower_bound(grid_.begin(), grid_.end(), x);
    auto hi = std::upper_bound(grid_.begin(), grid_.end(), x);
    if (lo != hi) {
        // x sits on a (possibly tied) grid value: midpoint of its span.
        const double p_first = static_cast<double>(lo - grid_.begin()) / denom;
        const double p_last = static_cast<double>(hi - grid_.begin() - 1) / denom;
        return 0.5 * (p_first + p_last);
    }
    if (lo == grid_.begin()) return 0.0; // below fitted min
    if (lo == grid_.end()) return 1.0;   // above fitted max
    const std::size_t k = static_cast<std::size_t>(lo - grid_.begin()) - 1;
    const double t = (x - grid_[k]) / (grid_[k + 1] - grid_[k]);
    return (static_cast<double>(k) + t) / denom;
}

double TransformModel::inverse(double u) const {
    if (std::isnan(u)) return u;
    u = std::clamp(u, 0.0, 1.0);
    const double pos = u * static_cast<double>(grid_.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), grid_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return grid_[i] + frac * (grid_[i + 1] - grid_[i]);
}

Array2D TransformModel::forward(const Array2D& a) const {
    Array2D out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.values()[i] = forward(a.values()[i]);
    return out;
}

Array2D TransformModel::inverse(const Array2D& a) const {
    Array2D out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.values()[i] = inverse(a.values()[i]);
    return out;
}

void TransformModel::save(const std::string& path) const {
    nlohmann::json j;
    j["version"] = 1;
    j["n_q"] = n_q();
    j["n_fitted"] = n_fitted_;
    j["quantile_grid"] = grid_;
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for write: " + path);
    os << j.dump() << "\n";
}

TransformModel TransformModel::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open: " + path);
    nlohmann::json j;
    is >> j;
    auto grid = j.at("quantile_grid").get<std::vector<double>>();
    if (static_cast<int>(grid.size()) != j.at("n_q").get<int>())
        throw data_error("transform model: n_q/grid size mismatch");
    return TransformModel(std::move(grid), j.at("n_fitted").get<std::size_t>());
}

} // namespace bsrk
