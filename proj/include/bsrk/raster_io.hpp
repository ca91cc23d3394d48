#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bsrk/raster.hpp"

namespace bsrk {

/// Gridded container file, one data variable per file with (time?, lat, lon)
/// dimensions and explicit coordinate arrays in degrees:
///
///   magic "BSRC" | u32 header length | JSON header | payload
///
/// JSON header: {version, variable, kind, missing_value, lat:[...],
/// lon:[...], time:["yyyy-mm-dd", ...]?}. Payload is row-major little-endian
/// float64, ordered [time][lat][lon], lat ascending.
struct ContainerInfo {
    std::string variable;
    GridKind kind;
    std::size_t time_steps; // 0 when the file has no time dimension
    GeoExtent extent;
};

ContainerInfo probe_container(const std::string& path);

/// Loads one time slice (or the whole field when the file is untimed and
/// time_index is empty). Cells equal to the file's missing_value become NaN.
RasterGrid load_raster(const std::string& path, const std::string& variable,
                       std::optional<std::size_t> time_index = std::nullopt);

/// Writes a single-slice container.
void save_raster(const std::string& path, const RasterGrid& grid,
                 const std::string& variable,
                 double missing_value = -9.969209968386869e36);

/// Writes a multi-date stack; all grids must share one extent and kind.
void save_raster_stack(const std::string& path,
                       const std::vector<RasterGrid>& grids,
                       const std::string& variable,
                       double missing_value = -9.969209968386869e36);

/// Raw binary dump: 32-byte header (magic "BSRK", version u16, rows u32,
/// cols u32, cell_size f64, zero padding) followed by row-major
/// little-endian float64. NaN is stored as-is.
void write_raw_block(std::ostream& os, const Array2D& a, double cell_size);
Array2D read_raw_block(std::istream& is, double* cell_size = nullptr);
inline constexpr std::size_t kRawHeaderBytes = 32;

void write_raw_file(const std::string& path, const Array2D& a, double cell_size);
Array2D read_raw_file(const std::string& path, double* cell_size = nullptr);

} // namespace bsrk
