#include "bsrk/geo.hpp"

#include <cmath>
#include <sstream>

#include "bsrk/error.hpp"

namespace bsrk {

namespace {

bool near_integer(double x, double tol) {
    return std::abs(x - std::round(x)) <= tol;
}

} // namespace

GeoExtent GeoExtent::make(double lon_min, double lon_max, double lat_min,
                          double lat_max, double cell_size) {
    if (!(lon_min < lon_max) || !(lat_min < lat_max))
        throw data_error("GeoExtent: bounds must be strictly ordered");
    if (!(cell_size > 0.0))
        throw data_error("GeoExtent: cell_size must be positive");
    const double tol = 1e-9 / cell_size;
    if (!near_integer((lon_max - lon_min) / cell_size, tol) ||
        !near_integer((lat_max - lat_min) / cell_size, tol))
        throw data_error("GeoExtent: spans are not integer multiples of cell_size");
    return GeoExtent{lon_min, lon_max, lat_min, lat_max, cell_size};
}

int GeoExtent::rows() const {
    return static_cast<int>(std::llround((lat_max - lat_min) / cell_size));
}

int GeoExtent::cols() const {
    return static_cast<int>(std::llround((lon_max - lon_min) / cell_size));
}

bool GeoExtent::contains(const GeoExtent& inner, double tol) const {
    return inner.lon_min >= lon_min - tol && inner.lon_max <= lon_max + tol &&
           inner.lat_min >= lat_min - tol && inner.lat_max <= lat_max + tol;
}

bool GeoExtent::contains_point(double lon, double lat) const {
    return lon >= lon_min && lon < lon_max && lat >= lat_min && lat < lat_max;
}

bool GeoExtent::overlaps(const GeoExtent& other) const {
    return lon_min < other.lon_max && other.lon_min < lon_max &&
           lat_min < other.lat_max && other.lat_min < lat_max;
}

bool GeoExtent::same_registration(const GeoExtent& other, double tol) const {
    if (std::abs(cell_size - other.cell_size) > tol) return false;
    const double dx = (other.lon_min - lon_min) / cell_size;
    const double dy = (other.lat_min - lat_min) / cell_size;
    return std::abs(dx - std::round(dx)) <= tol / cell_size &&
           std::abs(dy - std::round(dy)) <= tol / cell_size;
}

bool GeoExtent::operator==(const GeoExtent& o) const {
    return lon_min == o.lon_min && lon_max == o.lon_max &&
           lat_min == o.lat_min && lat_max == o.lat_max && cell_size == o.cell_size;
}

std::string GeoExtent::to_string() const {
    std::ostringstream os;
    os << "[" << lon_min << ", " << lon_max << "] x [" << lat_min << ", "
       << lat_max << "] @ " << cell_size << "deg";
    return os.str();
}

} // namespace bsrk
