#include "bsrk/raster.hpp"

#include <cmath>
#include <cstdio>

#include "bsrk/climate.hpp"
#include "bsrk/error.hpp"

namespace bsrk {

std::string grid_kind_name(GridKind k) {
    switch (k) {
        case GridKind::Emission: return "emission";
        case GridKind::Lai: return "lai";
        case GridKind::Percentage: return "percentage";
        case GridKind::ClimateClass: return "climate_class";
    }
    throw config_error("bad GridKind");
}

GridKind grid_kind_from_name(const std::string& name) {
    if (name == "emission") return GridKind::Emission;
    if (name == "lai") return GridKind::Lai;
    if (name == "percentage") return GridKind::Percentage;
    if (name == "climate_class") return GridKind::ClimateClass;
    throw data_error("unknown grid kind: " + name);
}

std::string CalendarDate::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

CalendarDate CalendarDate::parse(const std::string& iso) {
    CalendarDate d;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &d.year, &d.month, &d.day) != 3)
        throw data_error("bad date: " + iso);
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw data_error("bad date: " + iso);
    return d;
}

RasterGrid::RasterGrid(GeoExtent extent, GridKind kind, Array2D data,
                       std::optional<CalendarDate> timestamp)
    : extent_(extent), kind_(kind), data_(std::move(data)), timestamp_(timestamp) {
    if (data_.rows() != extent_.rows() || data_.cols() != extent_.cols())
        throw data_error("RasterGrid: data dimensions do not match extent");
}

void RasterGrid::validate_values() const {
    for (double x : data_.values()) {
        if (Array2D::is_missing(x)) continue;
        switch (kind_) {
            case GridKind::Emission:
                if (x < 0.0) throw data_error("negative emission value");
                break;
            case GridKind::Percentage:
                if (x < 0.0 || x > 100.0) throw data_error("percentage outside [0,100]");
                break;
            case GridKind::ClimateClass:
                if (x != std::floor(x) || !kg::in_study_area_table(static_cast<int>(x)))
                    throw data_error("climate class code outside study-area table");
                break;
            case GridKind::Lai:
                break;
        }
    }
}

CategoricalLandCover::CategoricalLandCover(GeoExtent extent, Array2D codes)
    : extent_(extent), codes_(std::move(codes)) {
    if (codes_.rows() != extent_.rows() || codes_.cols() != extent_.cols())
        throw data_error("CategoricalLandCover: data dimensions do not match extent");
    for (double x : codes_.values()) {
        if (Array2D::is_missing(x)) continue;
        if (x != std::floor(x) || !valid_class(static_cast<int>(x)))
            throw data_error("land-cover code outside the 11-class table");
    }
}

bool CategoricalLandCover::valid_class(int code) {
    for (int c : kLandCoverClasses)
        if (c == code) return true;
    return false;
}

} // namespace bsrk
