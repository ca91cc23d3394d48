#include "bsrk/resample.hpp"

#include <cmath>

#include "bsrk/error.hpp"

namespace bsrk {

namespace {

// Cubic convolution kernel, a = -0.5 (Catmull-Rom).
double cubic_weight(double s) {
    s = std::abs(s);
    if (s <= 1.0) return (1.5 * s - 2.5) * s * s + 1.0;
    if (s < 2.0) return ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0;
    return 0.0;
}

// Symmetric reflection with edge repeat: ..., 1, 0 | 0, 1, ...
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Nearest non-missing value scanning outward along row r from column c.
double nearest_in_row(const Array2D& a, int r, int c) {
    for (int d = 1; d < a.cols(); ++d) {
        if (c - d >= 0 && !Array2D::is_missing(a.at(r, c - d))) return a.at(r, c - d);
        if (c + d < a.cols() && !Array2D::is_missing(a.at(r, c + d))) return a.at(r, c + d);
    }
    return Array2D::missing();
}

// Bicubic sample at fractional index-space coordinates (row u, col v).
double sample_bicubic(const Array2D& a, double u, double v) {
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    const double tu = u - i0;
    const double tv = v - j0;

    double vals[4][4];
    bool any_present = false;
    for (int m = -1; m <= 2; ++m) {
        const int r = reflect(i0 + m, a.rows());
        for (int n = -1; n <= 2; ++n) {
            const int c = reflect(j0 + n, a.cols());
            double x = a.at(r, c);
            if (Array2D::is_missing(x)) x = nearest_in_row(a, r, c);
            vals[m + 1][n + 1] = x;
            if (!Array2D::is_missing(x)) any_present = true;
        }
    }
    if (!any_present) return Array2D::missing();

    // Rows that are entirely missing fall back to the first present value.
    double fallback = 0.0;
    for (auto& row : vals)
        for (double x : row)
            if (!Array2D::is_missing(x)) { fallback = x; goto have_fallback; }
have_fallback:

    // A uniform neighborhood interpolates to itself; returning it directly
    // keeps constant fields exact despite kernel-weight rounding.
    bool uniform = true;
    for (auto& row : vals)
        for (double x : row)
            if (!Array2D::is_missing(x) && x != fallback) { uniform = false; }
    if (uniform) return fallback;

    double acc = 0.0;
    for (int m = -1; m <= 2; ++m) {
        const double wy = cubic_weight(tu - m);
        for (int n = -1; n <= 2; ++n) {
            double x = vals[m + 1][n + 1];
            if (Array2D::is_missing(x)) x = fallback;
            acc += wy * cubic_weight(tv - n) * x;
        }
    }
    return acc;
}

int integer_ratio(double big, double small, const char* what) {
    const double r = big / small;
    const long k = std::lround(r);
    if (k < 1 || std::abs(r - static_cast<double>(k)) > 1e-9)
        throw data_error(std::string(what) + ": non-integer resolution ratio");
    return static_cast<int>(k);
}

GeoExtent scaled_extent(const GeoExtent& e, double new_cell) {
    return GeoExtent::make(e.lon_min, e.lon_max, e.lat_min, e.lat_max, new_cell);
}

template <typename BlockFn>
Array2D block_reduce(const Array2D& src, int ratio, BlockFn fn) {
    if (src.rows() % ratio != 0 || src.cols() % ratio != 0)
        throw data_error("coarsen: source does not cover an integer number of target cells");
    Array2D out(src.rows() / ratio, src.cols() / ratio);
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c)
            out.at(r, c) = fn(r * ratio, c * ratio, ratio);
    return out;
}

} // namespace

RasterGrid coarsen_mean(const RasterGrid& src, double target_cell_size) {
    const int ratio = integer_ratio(target_cell_size, src.extent().cell_size, "coarsen_mean");
    const Array2D& a = src.data();
    Array2D out = block_reduce(a, ratio, [&](int r0, int c0, int k) {
        double sum = 0.0;
        int n = 0;
        for (int r = r0; r < r0 + k; ++r)
            for (int c = c0; c < c0 + k; ++c) {
                const double x = a.at(r, c);
                if (!Array2D::is_missing(x)) { sum += x; ++n; }
            }
        return n > 0 ? sum / n : Array2D::missing();
    });
    return RasterGrid(scaled_extent(src.extent(), target_cell_size), src.kind(),
                      std::move(out), src.timestamp());
}

RasterGrid class_fraction(const CategoricalLandCover& src, double target_cell_size,
                          int class_code) {
    const int ratio = integer_ratio(target_cell_size, src.extent().cell_size, "class_fraction");
    const Array2D& a = src.codes();
    Array2D out = block_reduce(a, ratio, [&](int r0, int c0, int k) {
        int hits = 0, n = 0;
        for (int r = r0; r < r0 + k; ++r)
            for (int c = c0; c < c0 + k; ++c) {
                const double x = a.at(r, c);
                if (Array2D::is_missing(x)) continue;
                ++n;
                if (static_cast<int>(x) == class_code) ++hits;
            }
        return n > 0 ? 100.0 * hits / n : Array2D::missing();
    });
    return RasterGrid(scaled_extent(src.extent(), target_cell_size),
                      GridKind::Percentage, std::move(out));
}

RasterGrid resample_bicubic(const RasterGrid& src, const GeoExtent& target) {
    if (src.rows() < 4 || src.cols() < 4)
        throw data_error("resample_bicubic: source smaller than 4x4");
    if (!src.extent().contains(target))
        throw data_error("resample_bicubic: target outside source extent");

    const GeoExtent& se = src.extent();
    Array2D out(target.rows(), target.cols());
    for (int r = 0; r < out.rows(); ++r) {
        const double u = (target.lat_center(r) - se.lat_min) / se.cell_size - 0.5;
        for (int c = 0; c < out.cols(); ++c) {
            const double v = (target.lon_center(c) - se.lon_min) / se.cell_size - 0.5;
            out.at(r, c) = sample_bicubic(src.data(), u, v);
        }
    }
    return RasterGrid(target, src.kind(), std::move(out), src.timestamp());
}

RasterGrid downsample_bicubic(const RasterGrid& src, int factor) {
    if (factor < 2) throw data_error("downsample_bicubic: factor must be >= 2");
    if (src.rows() % factor != 0 || src.cols() % factor != 0)
        throw data_error("downsample_bicubic: dimensions not divisible by factor");
    return resample_bicubic(src, scaled_extent(src.extent(), src.extent().cell_size * factor));
}

RasterGrid upsample_bicubic(const RasterGrid& src, int factor) {
    if (factor < 2) throw data_error("upsample_bicubic: factor must be >= 2");
    return resample_bicubic(src, scaled_extent(src.extent(), src.extent().cell_size / factor));
}

RasterGrid align_to(const RasterGrid& src, const GeoExtent& reference) {
    if (!src.extent().overlaps(reference))
        throw data_error("align_to: no overlap between source and reference");
    if (!src.extent().contains(reference))
        throw data_error("align_to: reference extends beyond source");

    const GeoExtent& se = src.extent();
    if (se.same_registration(reference)) {
        const int r0 = static_cast<int>(std::llround((reference.lat_min - se.lat_min) / se.cell_size));
        const int c0 = static_cast<int>(std::llround((reference.lon_min - se.lon_min) / se.cell_size));
        Array2D out(reference.rows(), reference.cols());
        for (int r = 0; r < out.rows(); ++r)
            for (int c = 0; c < out.cols(); ++c)
                out.at(r, c) = src.at(r0 + r, c0 + c);
        return RasterGrid(reference, src.kind(), std::move(out), src.timestamp());
    }
    return resample_bicubic(src, reference);
}

Array2D upsample_bicubic_array(const Array2D& src, int factor) {
    Array2D out(src.rows() * factor, src.cols() * factor);
    for (int r = 0; r < out.rows(); ++r) {
        const double u = (r + 0.5) / factor - 0.5;
        for (int c = 0; c < out.cols(); ++c) {
            const double v = (c + 0.5) / factor - 0.5;
            out.at(r, c) = sample_bicubic(src, u, v);
        }
    }
    return out;
}

Array2D downsample_bicubic_array(const Array2D& src, int factor) {
    if (src.rows() % factor != 0 || src.cols() % factor != 0)
        throw data_error("downsample_bicubic_array: dimensions not divisible by factor");
    Array2D out(src.rows() / factor, src.cols() / factor);
    for (int r = 0; r < out.rows(); ++r) {
        const double u = (r + 0.5) * factor - 0.5;
        for (int c = 0; c < out.cols(); ++c) {
            const double v = (c + 0.5) * factor - 0.5;
            out.at(r, c) = sample_bicubic(src, u, v);
        }
    }
    return out;
}

} // namespace bsrk
