#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bsrk/raster.hpp"
#include "bsrk/transform.hpp"

namespace bsrk {

struct PatchIndexEntry {
    std::int64_t patch_id = -1;
    GeoExtent extent;
    CalendarDate date;
    int climate_class = 0;       // dominant Koppen-Geiger code over the window
    double zero_fraction = 0.0;  // fraction of exactly-zero emission cells
    std::uint64_t store_offset = 0;

    double center_lon() const { return 0.5 * (extent.lon_min + extent.lon_max); }
    double center_lat() const { return 0.5 * (extent.lat_min + extent.lat_max); }
};

/// One HR/LR training sample. Raw emission arrays plus transformed
/// counterparts and the stacked LR driver channels.
struct Patch {
    Array2D i_hr;                   // 30x30 emission
    Array2D i_lr;                   // 15x15 emission
    Array2D t_hr;                   // transformed, [0,1]
    Array2D t_lr;
    std::vector<Array2D> drivers_lr; // CL%, TC%, optionally LAI, at LR
    PatchIndexEntry meta;
};

/// An HR emission window accepted by the zero-flux filter, before LR
/// generation.
struct PatchWindow {
    Array2D i_hr;
    GeoExtent extent;
    CalendarDate date;
    double zero_fraction = 0.0;
};

/// Sliding-window extraction over a stack of per-date emission grids.
/// Windows with zero fraction strictly above zero_threshold, or containing
/// any missing cell, are dropped. Emission order is row-major (south to
/// north, west to east) within each date, dates in input order.
std::vector<PatchWindow> extract_patches(const std::vector<RasterGrid>& emissions,
                                         double patch_deg, double stride_deg,
                                         double zero_threshold);

/// Streaming variant; visit is called once per retained window.
void extract_patches(const std::vector<RasterGrid>& emissions, double patch_deg,
                     double stride_deg, double zero_threshold,
                     const std::function<void(PatchWindow&&)>& visit);

/// Assembles a Patch: bicubic LR counterparts at scale alpha, transformed
/// arrays via the fitted model, modal climate class over the window (ties
/// to the lowest code).
Patch build_patch(const PatchWindow& window,
                  const std::vector<const RasterGrid*>& drivers_hr,
                  const RasterGrid& climate, const TransformModel& transform,
                  int alpha = 2);

/// Indexed on-disk patch store: a JSON-lines index plus one binary file of
/// contiguous records [i_hr][i_lr][t_hr][t_lr][driver_1]..[driver_D], each
/// array prefixed by the 32-byte raw header.
class PatchStoreWriter {
public:
    PatchStoreWriter(const std::string& dir, int driver_count);
    ~PatchStoreWriter();

    /// Appends the patch; assigns patch_id and store_offset in the returned
    /// entry copy.
    PatchIndexEntry append(const Patch& p);
    void close();

private:
    struct Impl;
    Impl* impl_;
};

class PatchStore {
public:
    explicit PatchStore(const std::string& dir);

    std::size_t size() const { return index_.size(); }
    const std::vector<PatchIndexEntry>& index() const { return index_; }
    int driver_count() const { return driver_count_; }

    Patch read(std::int64_t patch_id) const;
    Patch read_entry(const PatchIndexEntry& e) const;

    /// Rewrites the t_hr/t_lr arrays of every record in place using the
    /// given fitted transform (applied to i_hr/i_lr).
    static void apply_transform(const std::string& dir, const TransformModel& t);

private:
    std::string dir_;
    int driver_count_;
    std::vector<PatchIndexEntry> index_;
};

std::string store_index_path(const std::string& dir);
std::string store_data_path(const std::string& dir);

} // namespace bsrk
