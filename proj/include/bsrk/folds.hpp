#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "bsrk/patchset.hpp"

namespace bsrk {

/// Declarative description of one climate-specific fold.
struct FoldSpec {
    std::string name;                 // e.g. "Cfb" or "Med"
    std::set<int> held_out_classes;   // Koppen-Geiger codes excluded from train
    double train_ratio = 0.75;
    double val_ratio = 0.05;
    double test_ratio = 0.20;
    GeoExtent spatial_holdout_region;
    std::size_t holdout_sample_size = 10000;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct FoldManifest {
    FoldSpec spec;
    std::vector<std::int64_t> train;
    std::vector<std::int64_t> val;
    std::vector<std::int64_t> test_standard;
    std::vector<std::int64_t> test_unseen_spatial;
    std::vector<std::int64_t> test_unseen_climate;

    void save(const std::string& path) const;
    static FoldManifest load(const std::string& path);
};

/// Deterministic fold construction. A patch is inside the spatial holdout
/// region iff its center is inside. The unseen-climate and unseen-spatial
/// sets are sampled uniformly without replacement up to holdout_sample_size;
/// the remaining eligible patches are split train/val/test by seeded shuffle.
FoldManifest build_fold(const std::vector<PatchIndexEntry>& index, const FoldSpec& spec);

/// Parses a fold-specs JSON file: {"folds":[{name, held_out_classes:[names
/// or codes], ...}], "spatial_holdout":{...}, "holdout_sample_size", "seed",
/// "split":[0.75,0.05,0.20]}.
std::vector<FoldSpec> load_fold_specs(const std::string& path);

} // namespace bsrk
