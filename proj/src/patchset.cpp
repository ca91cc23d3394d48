#include "bsrk/patchset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "bsrk/error.hpp"
#include "bsrk/raster_io.hpp"
#include "bsrk/resample.hpp"

namespace bsrk {

namespace {

using nlohmann::json;

json entry_to_json(const PatchIndexEntry& e) {
    json j;
    j["patch_id"] = e.patch_id;
    j["lon_min"] = e.extent.lon_min;
    j["lon_max"] = e.extent.lon_max;
    j["lat_min"] = e.extent.lat_min;
    j["lat_max"] = e.extent.lat_max;
    j["cell_size"] = e.extent.cell_size;
    j["date"] = e.date.to_string();
    j["climate_class"] = e.climate_class;
    j["zero_fraction"] = e.zero_fraction;
    j["store_offset"] = e.store_offset;
    return j;
}

PatchIndexEntry entry_from_json(const json& j) {
    PatchIndexEntry e;
    e.patch_id = j.at("patch_id").get<std::int64_t>();
    e.extent = GeoExtent::make(j.at("lon_min"), j.at("lon_max"), j.at("lat_min"),
                               j.at("lat_max"), j.at("cell_size"));
    e.date = CalendarDate::parse(j.at("date").get<std::string>());
    e.climate_class = j.at("climate_class").get<int>();
    e.zero_fraction = j.at("zero_fraction").get<double>();
    e.store_offset = j.at("store_offset").get<std::uint64_t>();
    return e;
}

} // namespace

void extract_patches(const std::vector<RasterGrid>& emissions, double patch_deg,
                     double stride_deg, double zero_threshold,
                     const std::function<void(PatchWindow&&)>& visit) {
    if (emissions.empty()) throw data_error("extract_patches: no emission grids");
    const GeoExtent& e0 = emissions.front().extent();
    const double cell = e0.cell_size;
    const int patch_cells = static_cast<int>(std::llround(patch_deg / cell));
    const int stride_cells = static_cast<int>(std::llround(stride_deg / cell));
    if (std::abs(patch_cells * cell - patch_deg) > 1e-9 ||
        std::abs(stride_cells * cell - stride_deg) > 1e-9)
        throw data_error("extract_patches: patch/stride not multiples of cell size");
    if (patch_cells > e0.rows() || patch_cells > e0.cols())
        throw data_error("extract_patches: patch larger than grid");

    for (const auto& g : emissions) {
        if (!(g.extent() == e0))
            throw data_error("extract_patches: emission grids have differing extents");
        if (!g.timestamp())
            throw data_error("extract_patches: emission grid without date");

        // Partial windows at the map edge are dropped.
        for (int r0 = 0; r0 + patch_cells <= g.rows(); r0 += stride_cells) {
            for (int c0 = 0; c0 + patch_cells <= g.cols(); c0 += stride_cells) {
                int zeros = 0;
                bool has_missing = false;
                for (int r = r0; r < r0 + patch_cells && !has_missing; ++r)
                    for (int c = c0; c < c0 + patch_cells; ++c) {
                        const double x = g.at(r, c);
                        if (Array2D::is_missing(x)) { has_missing = true; break; }
                        if (x == 0.0) ++zeros;
                    }
                if (has_missing) continue;
                const double zero_fraction =
                    static_cast<double>(zeros) / (patch_cells * patch_cells);
                if (zero_fraction > zero_threshold) continue; // strict ">"

                PatchWindow w;
                w.i_hr = Array2D(patch_cells, patch_cells);
                for (int r = 0; r < patch_cells; ++r)
                    for (int c = 0; c < patch_cells; ++c)
                        w.i_hr.at(r, c) = g.at(r0 + r, c0 + c);
                w.extent = GeoExtent::make(
                    e0.lon_min + c0 * cell, e0.lon_min + (c0 + patch_cells) * cell,
                    e0.lat_min + r0 * cell, e0.lat_min + (r0 + patch_cells) * cell, cell);
                w.date = *g.timestamp();
                w.zero_fraction = zero_fraction;
                visit(std::move(w));
            }
        }
    }
}

std::vector<PatchWindow> extract_patches(const std::vector<RasterGrid>& emissions,
                                         double patch_deg, double stride_deg,
                                         double zero_threshold) {
    std::vector<PatchWindow> out;
    extract_patches(emissions, patch_deg, stride_deg, zero_threshold,
                    [&](PatchWindow&& w) { out.push_back(std::move(w)); });
    return out;
}

Patch build_patch(const PatchWindow& window,
                  const std::vector<const RasterGrid*>& drivers_hr,
                  const RasterGrid& climate, const TransformModel& transform,
                  int alpha) {
    Patch p;
    p.i_hr = window.i_hr;
    p.i_lr = downsample_bicubic_array(window.i_hr, alpha);
    p.t_hr = transform.forward(p.i_hr);
    p.t_lr = transform.forward(p.i_lr);

    for (const RasterGrid* d : drivers_hr) {
        RasterGrid cut = align_to(*d, window.extent);
        p.drivers_lr.push_back(downsample_bicubic_array(cut.data(), alpha));
    }

    RasterGrid climate_cut = align_to(climate, window.extent);
    std::map<int, int> counts;
    for (double x : climate_cut.data().values())
        if (!Array2D::is_missing(x)) counts[static_cast<int>(x)]++;
    int mode = 0, best = -1;
    for (const auto& [code, n] : counts)
        if (n > best) { best = n; mode = code; } // map order ties to lowest code

    p.meta.extent = window.extent;
    p.meta.date = window.date;
    p.meta.climate_class = mode;
    p.meta.zero_fraction = window.zero_fraction;
    return p;
}

std::string store_index_path(const std::string& dir) { return dir + "/index.jsonl"; }
std::string store_data_path(const std::string& dir) { return dir + "/patches.bin"; }
static std::string store_meta_path(const std::string& dir) { return dir + "/store.json"; }

struct PatchStoreWriter::Impl {
    std::ofstream index;
    std::ofstream data;
    std::string dir;
    int driver_count;
    std::int64_t next_id = 0;
    std::uint64_t offset = 0;
    bool open = true;
};

PatchStoreWriter::PatchStoreWriter(const std::string& dir, int driver_count)
    : impl_(new Impl) {
    std::filesystem::create_directories(dir);
    impl_->dir = dir;
    impl_->driver_count = driver_count;
    impl_->index.open(store_index_path(dir), std::ios::trunc);
    impl_->data.open(store_data_path(dir), std::ios::binary | std::ios::trunc);
    if (!impl_->index || !impl_->data)
        throw data_error("cannot create patch store in " + dir);
    json meta;
    meta["version"] = 1;
    meta["driver_count"] = driver_count;
    std::ofstream ms(store_meta_path(dir), std::ios::trunc);
    ms << meta.dump() << "\n";
}

PatchStoreWriter::~PatchStoreWriter() {
    close();
    delete impl_;
}

PatchIndexEntry PatchStoreWriter::append(const Patch& p) {
    if (!impl_->open) throw data_error("patch store already closed");
    if (static_cast<int>(p.drivers_lr.size()) != impl_->driver_count)
        throw data_error("patch driver count does not match store");

    PatchIndexEntry e = p.meta;
    e.patch_id = impl_->next_id++;
    e.store_offset = impl_->offset;

    const double cell = e.extent.cell_size;
    auto put = [&](const Array2D& a, double cs) {
        write_raw_block(impl_->data, a, cs);
        impl_->offset += kRawHeaderBytes + a.size() * sizeof(double);
    };
    put(p.i_hr, cell);
    put(p.i_lr, cell * 2);
    put(p.t_hr, cell);
    put(p.t_lr, cell * 2);
    for (const auto& d : p.drivers_lr) put(d, cell * 2);

    impl_->index << entry_to_json(e).dump() << "\n";
    return e;
}

void PatchStoreWriter::close() {
    if (impl_->open) {
        impl_->index.close();
        impl_->data.close();
        impl_->open = false;
    }
}

PatchStore::PatchStore(const std::string& dir) : dir_(dir) {
    std::ifstream ms(store_meta_path(dir));
    if (!ms) throw data_error("not a patch store (missing store.json): " + dir);
    json meta;
    ms >> meta;
    driver_count_ = meta.at("driver_count").get<int>();

    std::ifstream is(store_index_path(dir));
    if (!is) throw data_error("missing patch index: " + store_index_path(dir));
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        index_.push_back(entry_from_json(json::parse(line)));
    }
}

Patch PatchStore::read_entry(const PatchIndexEntry& e) const {
    std::ifstream is(store_data_path(dir_), std::ios::binary);
    if (!is) throw data_error("missing patch data: " + store_data_path(dir_));
    is.seekg(static_cast<std::streamoff>(e.store_offset));
    Patch p;
    p.i_hr = read_raw_block(is);
    p.i_lr = read_raw_block(is);
    p.t_hr = read_raw_block(is);
    p.t_lr = read_raw_block(is);
    for (int d = 0; d < driver_count_; ++d)
        p.drivers_lr.push_back(read_raw_block(is));
    p.meta = e;
    return p;
}

Patch PatchStore::read(std::int64_t patch_id) const {
    for (const auto& e : index_)
        if (e.patch_id == patch_id) return read_entry(e);
    throw data_error("patch id not in store: " + std::to_string(patch_id));
}

void PatchStore::apply_transform(const std::string& dir, const TransformModel& t) {
    PatchStore store(dir);
    std::fstream io(store_data_path(dir),
                    std::ios::binary | std::ios::in | std::ios::out);
    if (!io) throw data_error("cannot open patch data for update: " + dir);
    for (const auto& e : store.index()) {
        io.seekg(static_cast<std::streamoff>(e.store_offset));
        Array2D i_hr = read_raw_block(io);
        Array2D i_lr = read_raw_block(io);
        io.seekp(io.tellg());
        write_raw_block(io, t.forward(i_hr), e.extent.cell_size);
        write_raw_block(io, t.forward(i_lr), e.extent.cell_size * 2);
    }
    io.flush();
}

} // namespace bsrk
