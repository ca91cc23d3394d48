#include "bsrk/raster_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "bsrk/error.hpp"

namespace bsrk {

namespace {

using nlohmann::json;

constexpr char kContainerMagic[4] = {'B', 'S', 'R', 'C'};
constexpr char kRawMagic[4] = {'B', 'S', 'R', 'K'};
constexpr std::uint16_t kFormatVersion = 1;

void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os) throw data_error("write failed");
}

void read_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) throw data_error("truncated read");
}

// Checks uniform spacing (1e-6 deg tolerance) and returns the signed step.
double coord_step(const std::vector<double>& coords, const char* axis) {
    if (coords.size() < 2) throw data_error(std::string("coordinate axis too short: ") + axis);
    const double step = coords[1] - coords[0];
    for (std::size_t i = 1; i < coords.size(); ++i) {
        const double d = coords[i] - coords[i - 1];
        if (std::abs(d - step) > 1e-6)
            throw data_error(std::string("NonUniformGrid: irregular spacing on axis ") + axis);
    }
    if (step == 0.0) throw data_error(std::string("zero coordinate spacing on axis ") + axis);
    return step;
}

struct Header {
    json j;
    std::streampos payload_start;
};

Header read_header(std::ifstream& is, const std::string& path) {
    char magic[4];
    read_bytes(is, magic, 4);
    if (std::memcmp(magic, kContainerMagic, 4) != 0)
        throw data_error("not a grid container file: " + path);
    std::uint32_t len = 0;
    read_bytes(is, &len, 4);
    std::string text(len, '\0');
    read_bytes(is, text.data(), len);
    Header h;
    h.j = json::parse(text);
    h.payload_start = is.tellg();
    return h;
}

GeoExtent extent_from_coords(const std::vector<double>& lon,
                             const std::vector<double>& lat) {
    const double dlon = coord_step(lon, "lon");
    const double dlat = coord_step(lat, "lat");
    if (dlon <= 0.0) throw data_error("longitude axis must be ascending");
    if (std::abs(std::abs(dlat) - dlon) > 1e-6)
        throw data_error("anisotropic cell size");
    const double cell = dlon;
    const double lat_lo = std::min(lat.front(), lat.back());
    return GeoExtent::make(lon.front() - cell / 2.0, lon.back() + cell / 2.0,
                           lat_lo - cell / 2.0,
                           lat_lo + (static_cast<double>(lat.size()) - 0.5) * cell,
                           cell);
}

json header_json(const RasterGrid& g, const std::string& variable,
                 double missing_value, const std::vector<std::string>* times) {
    const GeoExtent& e = g.extent();
    std::vector<double> lon(e.cols()), lat(e.rows());
    for (int c = 0; c < e.cols(); ++c) lon[c] = e.lon_center(c);
    for (int r = 0; r < e.rows(); ++r) lat[r] = e.lat_center(r);
    json j;
    j["version"] = kFormatVersion;
    j["variable"] = variable;
    j["kind"] = grid_kind_name(g.kind());
    j["missing_value"] = missing_value;
    j["lon"] = lon;
    j["lat"] = lat;
    if (times) j["time"] = *times;
    return j;
}

void write_container(const std::string& path, const json& header,
                     const std::vector<const Array2D*>& slices,
                     double missing_value) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for write: " + path);
    const std::string text = header.dump();
    write_bytes(os, kContainerMagic, 4);
    const std::uint32_t len = static_cast<std::uint32_t>(text.size());
    write_bytes(os, &len, 4);
    write_bytes(os, text.data(), text.size());
    for (const Array2D* a : slices) {
        std::vector<double> buf = a->values();
        for (double& x : buf)
            if (Array2D::is_missing(x)) x = missing_value;
        write_bytes(os, buf.data(), buf.size() * sizeof(double));
    }
}

} // namespace

ContainerInfo probe_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open: " + path);
    Header h = read_header(is, path);
    ContainerInfo info;
    info.variable = h.j.at("variable").get<std::string>();
    info.kind = grid_kind_from_name(h.j.at("kind").get<std::string>());
    info.time_steps = h.j.contains("time") ? h.j["time"].size() : 0;
    info.extent = extent_from_coords(h.j.at("lon").get<std::vector<double>>(),
                                     h.j.at("lat").get<std::vector<double>>());
    return info;
}

RasterGrid load_raster(const std::string& path, const std::string& variable,
                       std::optional<std::size_t> time_index) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open: " + path);
    Header h = read_header(is, path);

    if (h.j.at("variable").get<std::string>() != variable)
        throw data_error("variable '" + variable + "' not found in " + path);

    const auto lon = h.j.at("lon").get<std::vector<double>>();
    const auto lat = h.j.at("lat").get<std::vector<double>>();
    const GeoExtent extent = extent_from_coords(lon, lat);
    const bool lat_descending = lat.size() > 1 && lat[1] < lat[0];
    const double missing = h.j.value("missing_value", -9.969209968386869e36);

    std::optional<CalendarDate> date;
    std::size_t slice = 0;
    if (h.j.contains("time")) {
        const auto& times = h.j["time"];
        if (!time_index)
            throw data_error("file has a time dimension; time_index required: " + path);
        if (*time_index >= times.size())
            throw data_error("time_index out of range for " + path);
        slice = *time_index;
        date = CalendarDate::parse(times[slice].get<std::string>());
    } else if (time_index && *time_index != 0) {
        throw data_error("file has no time dimension: " + path);
    }

    const std::size_t n = lon.size() * lat.size();
    is.seekg(h.payload_start + static_cast<std::streamoff>(slice * n * sizeof(double)));
    std::vector<double> buf(n);
    read_bytes(is, buf.data(), n * sizeof(double));

    Array2D data(static_cast<int>(lat.size()), static_cast<int>(lon.size()));
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const std::size_t r = lat_descending ? lat.size() - 1 - i : i;
        for (std::size_t c = 0; c < lon.size(); ++c) {
            double x = buf[i * lon.size() + c];
            data.at(static_cast<int>(r), static_cast<int>(c)) =
                (x == missing || Array2D::is_missing(x)) ? Array2D::missing() : x;
        }
    }

    RasterGrid grid(extent, grid_kind_from_name(h.j.at("kind").get<std::string>()),
                    std::move(data), date);
    grid.validate_values();
    return grid;
}

void save_raster(const std::string& path, const RasterGrid& grid,
                 const std::string& variable, double missing_value) {
    if (grid.timestamp()) {
        save_raster_stack(path, {grid}, variable, missing_value);
        return;
    }
    json j = header_json(grid, variable, missing_value, nullptr);
    write_container(path, j, {&grid.data()}, missing_value);
}

void save_raster_stack(const std::string& path,
                       const std::vector<RasterGrid>& grids,
                       const std::string& variable, double missing_value) {
    if (grids.empty()) throw data_error("save_raster_stack: empty stack");
    std::vector<std::string> times;
    std::vector<const Array2D*> slices;
    for (const auto& g : grids) {
        if (!(g.extent() == grids.front().extent()) || g.kind() != grids.front().kind())
            throw data_error("save_raster_stack: inconsistent grids");
        if (!g.timestamp()) throw data_error("save_raster_stack: grid without timestamp");
        times.push_back(g.timestamp()->to_string());
        slices.push_back(&g.data());
    }
    json j = header_json(grids.front(), variable, missing_value, &times);
    write_container(path, j, slices, missing_value);
}

void write_raw_block(std::ostream& os, const Array2D& a, double cell_size) {
    char header[kRawHeaderBytes] = {};
    std::memcpy(header, kRawMagic, 4);
    const std::uint16_t ver = kFormatVersion;
    std::memcpy(header + 4, &ver, 2);
    const std::uint32_t rows = static_cast<std::uint32_t>(a.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(a.cols());
    std::memcpy(header + 6, &rows, 4);
    std::memcpy(header + 10, &cols, 4);
    std::memcpy(header + 14, &cell_size, 8);
    write_bytes(os, header, kRawHeaderBytes);
    write_bytes(os, a.values().data(), a.size() * sizeof(double));
}

Array2D read_raw_block(std::istream& is, double* cell_size) {
    char header[kRawHeaderBytes];
    read_bytes(is, header, kRawHeaderBytes);
    if (std::memcmp(header, kRawMagic, 4) != 0)
        throw data_error("bad raw block magic");
    std::uint32_t rows = 0, cols = 0;
    std::memcpy(&rows, header + 6, 4);
    std::memcpy(&cols, header + 10, 4);
    double cell = 0.0;
    std::memcpy(&cell, header + 14, 8);
    if (cell_size) *cell_size = cell;
    Array2D a(static_cast<int>(rows), static_cast<int>(cols));
    read_bytes(is, a.values().data(), a.size() * sizeof(double));
    return a;
}

void write_raw_file(const std::string& path, const Array2D& a, double cell_size) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for write: " + path);
    write_raw_block(os, a, cell_size);
}

Array2D read_raw_file(const std::string& path, double* cell_size) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open: " + path);
    return read_raw_block(is, cell_size);
}

} // namespace bsrk
