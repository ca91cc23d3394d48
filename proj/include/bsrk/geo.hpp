#pragma once

#include <string>

namespace bsrk {

/// Regular lat/lon grid geometry, cell-registered: the first row is the
/// southernmost band of cells and values live at cell centers.
struct GeoExtent {
    double lon_min = 0.0;
    double lon_max = 0.0;
    double lat_min = 0.0;
    double lat_max = 0.0;
    double cell_size = 0.0;

    /// Validates ordering and that both spans are integer multiples of
    /// cell_size (1e-9 degree tolerance).
    static GeoExtent make(double lon_min, double lon_max, double lat_min,
                          double lat_max, double cell_size);

    int rows() const; // lat cells
    int cols() const; // lon cells

    double lon_center(int col) const { return lon_min + (col + 0.5) * cell_size; }
    double lat_center(int row) const { return lat_min + (row + 0.5) * cell_size; }

    bool contains(const GeoExtent& inner, double tol = 1e-9) const;
    bool contains_point(double lon, double lat) const;
    bool overlaps(const GeoExtent& other) const;

    /// True when both extents have the same cell size and their cell edges
    /// coincide (possibly offset by whole cells).
    bool same_registration(const GeoExtent& other, double tol = 1e-9) const;

    bool operator==(const GeoExtent& o) const;

    std::string to_string() const;
};

} // namespace bsrk
