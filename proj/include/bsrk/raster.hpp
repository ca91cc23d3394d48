#pragma once

#include <optional>
#include <string>

#include "bsrk/array2d.hpp"
#include "bsrk/geo.hpp"

namespace bsrk {

enum class GridKind {
    Emission,     // mol cm^-2 s^-1, non-negative
    Lai,          // m^2 / m^2
    Percentage,   // 0..100
    ClimateClass, // categorical Koppen-Geiger code
};

std::string grid_kind_name(GridKind k);
GridKind grid_kind_from_name(const std::string& name);

struct CalendarDate {
    int year = 0;
    int month = 0;
    int day = 0;

    std::string to_string() const; // ISO yyyy-mm-dd
    static CalendarDate parse(const std::string& iso);
    bool operator==(const CalendarDate&) const = default;
    auto operator<=>(const CalendarDate&) const = default;
};

/// Immutable georeferenced 2-D field. Row 0 is the southernmost band;
/// missing cells are NaN.
class RasterGrid {
public:
    RasterGrid(GeoExtent extent, GridKind kind, Array2D data,
               std::optional<CalendarDate> timestamp = std::nullopt);

    const GeoExtent& extent() const { return extent_; }
    GridKind kind() const { return kind_; }
    const Array2D& data() const { return data_; }
    const std::optional<CalendarDate>& timestamp() const { return timestamp_; }

    int rows() const { return data_.rows(); }
    int cols() const { return data_.cols(); }
    double at(int r, int c) const { return data_.at(r, c); }

    /// Checks the per-kind value invariants (Percentage range, non-negative
    /// emissions, climate codes in the study-area table).
    void validate_values() const;

private:
    GeoExtent extent_;
    GridKind kind_;
    Array2D data_;
    std::optional<CalendarDate> timestamp_;
};

/// Categorical land-cover map (ESA WorldCover style, 11 classes) at fine
/// resolution, input to the class-fraction coarsening.
class CategoricalLandCover {
public:
    CategoricalLandCover(GeoExtent extent, Array2D codes);

    const GeoExtent& extent() const { return extent_; }
    const Array2D& codes() const { return codes_; }

    static bool valid_class(int code);

private:
    GeoExtent extent_;
    Array2D codes_;
};

// ESA WorldCover v200 class codes.
inline constexpr int kLandCoverClasses[11] = {10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 100};
inline constexpr int kTreeCoverClass = 10;
inline constexpr int kCroplandClass = 40;

} // namespace bsrk
