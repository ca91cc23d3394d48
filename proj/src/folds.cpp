#include "bsrk/folds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "bsrk/climate.hpp"
#include "bsrk/error.hpp"
#include "bsrk/rng.hpp"

namespace bsrk {

namespace {

using nlohmann::json;

json extent_to_json(const GeoExtent& e) {
    return json{{"lon_min", e.lon_min}, {"lon_max", e.lon_max},
                {"lat_min", e.lat_min}, {"lat_max", e.lat_max},
                {"cell_size", e.cell_size}};
}

GeoExtent extent_from_json(const json& j) {
    return GeoExtent::make(j.at("lon_min"), j.at("lon_max"), j.at("lat_min"),
                           j.at("lat_max"), j.at("cell_size"));
}

// Uniform sample of k ids without replacement (partial Fisher-Yates).
std::vector<std::int64_t> sample_ids(std::vector<std::int64_t> pool, std::size_t k,
                                     CounterRng& rng) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

} // namespace

void FoldSpec::validate() const {
    if (held_out_classes.empty())
        throw config_error("fold spec: held_out_classes must be non-empty");
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw config_error("fold spec: split ratios must sum to 1");
}

FoldManifest build_fold(const std::vector<PatchIndexEntry>& index, const FoldSpec& spec) {
    spec.validate();
    if (index.empty()) throw data_error("build_fold: empty patch index");

    const auto& region = spec.spatial_holdout_region;
    auto in_region = [&](const PatchIndexEntry& e) {
        return region.contains_point(e.center_lon(), e.center_lat());
    };
    auto held_out = [&](const PatchIndexEntry& e) {
        return spec.held_out_classes.count(e.climate_class) > 0;
    };

    std::vector<std::int64_t> climate_pool, spatial_pool, eligible;
    for (const auto& e : index) {
        if (held_out(e)) {
            climate_pool.push_back(e.patch_id);
        } else if (in_region(e)) {
            spatial_pool.push_back(e.patch_id);
        } else {
            eligible.push_back(e.patch_id);
        }
    }
    if (eligible.empty())
        throw data_error("build_fold: empty train pool for fold " + spec.name);
    if (climate_pool.empty())
        throw data_error("build_fold: no patches in held-out classes for fold " + spec.name);
    if (spatial_pool.empty())
        throw data_error("build_fold: no patches in spatial holdout region for fold " + spec.name);

    CounterRng rng(spec.rng_seed);

    FoldManifest m;
    m.spec = spec;
    m.test_unseen_climate = sample_ids(std::move(climate_pool), spec.holdout_sample_size, rng);
    m.test_unseen_spatial = sample_ids(std::move(spatial_pool), spec.holdout_sample_size, rng);

    rng.shuffle(eligible);
    const std::size_t n = eligible.size();
    const std::size_t n_train = static_cast<std::size_t>(std::llround(spec.train_ratio * n));
    const std::size_t n_val = static_cast<std::size_t>(std::llround(spec.val_ratio * n));
    m.train.assign(eligible.begin(), eligible.begin() + n_train);
    m.val.assign(eligible.begin() + n_train, eligible.begin() + n_train + n_val);
    m.test_standard.assign(eligible.begin() + n_train + n_val, eligible.end());

    std::sort(m.test_unseen_climate.begin(), m.test_unseen_climate.end());
    std::sort(m.test_unseen_spatial.begin(), m.test_unseen_spatial.end());
    return m;
}

void FoldManifest::save(const std::string& path) const {
    json j;
    j["spec"] = {{"name", spec.name},
                 {"held_out_classes", std::vector<int>(spec.held_out_classes.begin(),
                                                       spec.held_out_classes.end())},
                 {"split", {spec.train_ratio, spec.val_ratio, spec.test_ratio}},
                 {"spatial_holdout", extent_to_json(spec.spatial_holdout_region)},
                 {"holdout_sample_size", spec.holdout_sample_size},
                 {"rng_seed", spec.rng_seed}};
    j["train"] = train;
    j["val"] = val;
    j["test_standard"] = test_standard;
    j["test_unseen_spatial"] = test_unseen_spatial;
    j["test_unseen_climate"] = test_unseen_climate;
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for write: " + path);
    os << j.dump() << "\n";
}

FoldManifest FoldManifest::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open: " + path);
    json j;
    is >> j;
    FoldManifest m;
    const json& s = j.at("spec");
    m.spec.name = s.at("name").get<std::string>();
    for (int c : s.at("held_out_classes").get<std::vector<int>>())
        m.spec.held_out_classes.insert(c);
    m.spec.train_ratio = s.at("split")[0].get<double>();
    m.spec.val_ratio = s.at("split")[1].get<double>();
    m.spec.test_ratio = s.at("split")[2].get<double>();
    m.spec.spatial_holdout_region = extent_from_json(s.at("spatial_holdout"));
    m.spec.holdout_sample_size = s.at("holdout_sample_size").get<std::size_t>();
    m.spec.rng_seed = s.at("rng_seed").get<std::uint64_t>();
    m.train = j.at("train").get<std::vector<std::int64_t>>();
    m.val = j.at("val").get<std::vector<std::int64_t>>();
    m.test_standard = j.at("test_standard").get<std::vector<std::int64_t>>();
    m.test_unseen_spatial = j.at("test_unseen_spatial").get<std::vector<std::int64_t>>();
    m.test_unseen_climate = j.at("test_unseen_climate").get<std::vector<std::int64_t>>();
    return m;
}

std::vector<FoldSpec> load_fold_specs(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open fold spec file: " + path);
    json j;
    is >> j;

    FoldSpec base;
    base.spatial_holdout_region = extent_from_json(j.at("spatial_holdout"));
    base.holdout_sample_size = j.value("holdout_sample_size", std::size_t{10000});
    base.rng_seed = j.value("seed", std::uint64_t{0});
    if (j.contains("split")) {
        base.train_ratio = j["split"][0].get<double>();
        base.val_ratio = j["split"][1].get<double>();
        base.test_ratio = j["split"][2].get<double>();
    }

    std::vector<FoldSpec> specs;
    for (const auto& f : j.at("folds")) {
        FoldSpec s = base;
        s.name = f.at("name").get<std::string>();
        for (const auto& c : f.at("held_out_classes")) {
            if (c.is_string())
                s.held_out_classes.insert(kg::code_from_name(c.get<std::string>()));
            else
                s.held_out_classes.insert(c.get<int>());
        }
        if (f.contains("seed")) s.rng_seed = f["seed"].get<std::uint64_t>();
        s.validate();
        specs.push_back(std::move(s));
    }
    return specs;
}

} // namespace bsrk
